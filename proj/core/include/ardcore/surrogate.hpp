#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ardcore/dq_models.hpp"
#include "ardcore/identification.hpp"
#include "ardcore/types.hpp"

namespace ard {

/// Per-coordinate closed intervals over the 9 parameter coordinates.
/// Degenerate intervals (lo == hi) pin a coordinate to a constant.
struct CoordinateBounds {
    Eigen::Matrix<double, ParameterVector::kDim, 1> lo;
    Eigen::Matrix<double, ParameterVector::kDim, 1> hi;

    static CoordinateBounds degenerate_at(const ParameterVector& v);

    bool is_degenerate(int i) const { return lo(i) == hi(i); }
    double width(int i) const { return hi(i) - lo(i); }
    bool contains(const ParameterVector& v, double expand_fraction = 0.0) const;
    void validate() const;
};

/// Latin hypercube draw: one sample per stratum on every 1-D projection,
/// deterministic for a given seed. Degenerate coordinates stay constant.
std::vector<ParameterVector> lhs_sample(const CoordinateBounds& bounds, int n,
                                        std::uint64_t seed);

/// Ground-truth white-box plant: a VSG inverter behind its output filter.
struct VsgPlant {
    FilterParams filter;
    double omega0 = 2.0 * M_PI * 60.0;

    StateSpaceModel build(const ParameterVector& v) const {
        return build_vsg_state_space(v, filter, omega0);
    }
    DqMatrix impedance(const ParameterVector& v, Complex s) const {
        return evaluate_impedance(build(v), s);
    }
    ImpedanceSpectrum spectrum(const ParameterVector& v, const FrequencyGrid& grid) const;
};

struct TrainingDataset {
    std::vector<ParameterVector> params;
    std::vector<ImpedanceSpectrum> spectra;  // all on one shared grid
    FrequencyGrid grid;
    CoordinateBounds bounds;
    std::uint64_t sampling_seed = 0;
    std::vector<std::string> skipped;  // infeasible samples, logged

    void validate() const;
};

enum class DatasetMode { Direct, ViaEra };

struct DatasetOptions {
    DatasetMode mode = DatasetMode::Direct;
    // ERA synthesis settings: record step, record length and the known
    // current-shaping pole (the injected current is prefiltered by
    // a/(s+a) so the measured response has a proper realization).
    double record_dt = 2e-4;
    int record_samples = 256;
    double prefilter_a = 2.0 * M_PI * 500.0;
    double noise_rms_fraction = 0.0;
    std::uint64_t noise_seed = 0;
};

TrainingDataset generate_dataset(const VsgPlant& plant,
                                 const std::vector<ParameterVector>& params,
                                 const FrequencyGrid& grid, const CoordinateBounds& bounds,
                                 const DatasetOptions& options = DatasetOptions());

/// Synthesizes the two impulse-form transient experiments for one parameter
/// point and identifies the impedance spectrum through ERA (the gray-box
/// identification path).
ImpedanceSpectrum identify_spectrum_via_era(const VsgPlant& plant, const ParameterVector& v,
                                            const FrequencyGrid& grid,
                                            const DatasetOptions& options,
                                            std::vector<TransientRecord>* records_out = nullptr);

/// Differentiable parameter-to-impedance surrogate interface shared by the
/// fitted rational surrogate and the white-box oracle wrapper.
class ImpedanceSurrogate {
public:
    virtual ~ImpedanceSurrogate() = default;
    virtual DqMatrix evaluate(const ParameterVector& v, Complex s) const = 0;
    virtual std::array<DqMatrix, ParameterVector::kDim> gradient(const ParameterVector& v,
                                                                 Complex s) const = 0;
};

struct SurrogateFitOptions {
    int basis_degree = 2;
    int rho_degree = 1;
    double ridge = 1e-6;
    int op_degree_in_x = 1;   // operating-point degree cap inside the x basis
    int sk_iterations = 5;    // denominator reweighting passes
    int fit_grid_stride = 1;  // frequency subsampling for the fit equations
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct SurrogateFitReport {
    double validation_rel_rms = 0.0;
    double training_rel_rms = 0.0;
    double denominator_margin = 0.0;  // min/max denominator on the lattice (sign-carrying)
    int n_train = 0;
    int n_validation = 0;
    int n_coefficients = 0;
    SurrogateFitOptions options;
};

/// Rational surrogate Z_mn(s) = x^T A_mn(rho) x / x^T A_0(rho) x with x a
/// monomial basis over (normalized frequency, normalized operating point)
/// and the A-matrix entries polynomial in the normalized control
/// parameters. The frequency variable is the affine map of omega = Im(s)
/// onto [-1, 1] over the training band, continued analytically off the
/// imaginary axis; the numerator coefficients are complex while the
/// denominator is real, so denominator positivity is well defined on the
/// band.
class RationalSurrogate : public ImpedanceSurrogate {
public:
    using ExpXy = std::array<int, 1 + ParameterVector::kXopDim>;  // sigma, P0, Q0, V0
    using ExpRho = std::array<int, ParameterVector::kRhoDim>;

    DqMatrix evaluate(const ParameterVector& v, Complex s) const override;
    std::array<DqMatrix, ParameterVector::kDim> gradient(const ParameterVector& v,
                                                         Complex s) const override;

    bool in_domain(const ParameterVector& v, double expand_fraction = 0.1) const;

    /// Raw denominator value (diagnostics; the fit normalizes its mean over
    /// the training data to 1). Real on the imaginary axis, complex
    /// elsewhere.
    Complex denominator_value(const ParameterVector& v, Complex s) const;

    const SurrogateFitReport& report() const { return report_; }
    const CoordinateBounds& bounds() const { return bounds_; }
    double omega_low() const { return omega_lo_; }
    double omega_high() const { return omega_hi_; }
    const std::vector<ExpXy>& x_basis() const { return x_exponents_; }
    const std::vector<ExpXy>& xy_monomials() const { return xy_exponents_; }
    const std::vector<ExpRho>& rho_monomials() const { return rho_exponents_; }

    /// Symmetric A-matrix view of the coefficients: for matrix_index in
    /// {0..3} the numerator of entry (dd,dq,qd,qq), 4 the denominator;
    /// one basis_dim x basis_dim matrix per rho monomial. The denominator
    /// matrices have zero imaginary part.
    std::vector<Eigen::MatrixXcd> coupling_matrices(int matrix_index) const;

    std::string to_json_string() const;
    static RationalSurrogate from_json_string(const std::string& text);

    friend RationalSurrogate fit_surrogate(const TrainingDataset& d,
                                           const SurrogateFitOptions& options);

private:
    CoordinateBounds bounds_;
    double omega_lo_ = 0.0;  // training band edges, rad/s
    double omega_hi_ = 1.0;
    std::vector<ExpXy> x_exponents_;    // the x vector (degree <= basis_degree)
    std::vector<ExpXy> xy_exponents_;   // products x_i x_j, deduplicated
    std::vector<ExpRho> rho_exponents_;
    // Coefficient matrices are n_xy x n_rho over the deduplicated monomial
    // products; numerators for (dd,dq,qd,qq) plus the real denominator.
    std::array<Eigen::MatrixXcd, 4> num_coefficients_;
    Eigen::MatrixXd den_coefficients_;
    SurrogateFitReport report_;

    Complex normalized_frequency(Complex s) const {
        return (-2.0 * Complex(0.0, 1.0) * s - Complex(omega_lo_ + omega_hi_, 0.0)) /
               (omega_hi_ - omega_lo_);
    }

    void basis_values(const ParameterVector& v, Complex s, Eigen::VectorXcd& phi_xy,
                      Eigen::VectorXd& phi_rho) const;
};

RationalSurrogate fit_surrogate(const TrainingDataset& d,
                                const SurrogateFitOptions& options = SurrogateFitOptions());

/// White-box oracle behind the surrogate interface; gradients by central
/// differences scaled to the bound widths.
class WhiteboxSurrogate : public ImpedanceSurrogate {
public:
    WhiteboxSurrogate(VsgPlant plant, CoordinateBounds bounds)
        : plant_(std::move(plant)), bounds_(std::move(bounds)) {}

    DqMatrix evaluate(const ParameterVector& v, Complex s) const override;
    std::array<DqMatrix, ParameterVector::kDim> gradient(const ParameterVector& v,
                                                         Complex s) const override;

private:
    VsgPlant plant_;
    CoordinateBounds bounds_;
};

}  // namespace ard
