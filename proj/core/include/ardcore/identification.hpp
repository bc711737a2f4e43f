#pragma once

#include <optional>
#include <vector>

#include "ardcore/state_space.hpp"
#include "ardcore/types.hpp"

namespace ard {

/// One impulse-injection experiment: dq current injected at the PCC and the
/// resulting dq terminal voltage. The input must be nonzero only at the
/// first sample (impulse form); experiment_id distinguishes the two
/// injection directions.
struct TransientRecord {
    double dt = 0.0;
    std::vector<Eigen::Vector2d> inputs;   // d_id, d_iq
    std::vector<Eigen::Vector2d> outputs;  // d_vd, d_vq
    int experiment_id = 1;

    void validate() const;
};

/// Order selection for era_identify: fixed order or singular-value
/// threshold rule (normalized Hankel singular values above 1e-8, capped).
struct EraOrder {
    static EraOrder fixed(int n) { return EraOrder{n}; }
    static EraOrder auto_select(int max_order = 24) { return EraOrder{-1, max_order}; }

    int order = -1;  // -1 means auto
    int max_order = 24;
};

/// MIMO eigensystem realization from two impulse experiments. The Hankel
/// matrix of Markov parameters is factored by SVD and the discrete
/// realization is converted to continuous time through the matrix
/// logarithm scaled by 1/dt.
StateSpaceModel era_identify(const TransientRecord& rec1, const TransientRecord& rec2,
                             const EraOrder& order = EraOrder::auto_select());

/// Rational model Y(s) = sum_k Res_k / (s - p_k) + feedthrough + s*linear.
/// Complex poles occur in conjugate pairs with conjugate residues.
struct PoleResidueModel {
    std::vector<Complex> poles;
    std::vector<DqMatrix> residues;
    DqMatrix feedthrough = DqMatrix::Zero();
    std::optional<DqMatrix> linear;

    double fit_rel_rms = 0.0;
    bool poor_fit = false;
    int iterations = 0;

    DqMatrix evaluate(Complex s) const;
    ImpedanceSpectrum spectrum(const FrequencyGrid& grid) const;
    void validate() const;
};

/// Sensitivity of an eigenvalue to entrywise inverter-impedance
/// perturbations; pairing is the plain elementwise sum
/// d_lambda = sum_{m,n} P_mn * dZ_mn.
struct ParticipationFactor {
    DqMatrix P = DqMatrix::Zero();
};

struct Mode {
    Complex lambda0;
    double frequency_hz = 0.0;
    double damping_ratio = 0.0;
    ParticipationFactor participation;
};

/// Pointwise (Z_inv + Z_g)^{-1} on a shared grid.
ImpedanceSpectrum assemble_admittance(const ImpedanceSpectrum& z_inv,
                                      const ImpedanceSpectrum& z_g);

struct VectorFitOptions {
    int n_iter = 10;
    bool flip_unstable = false;  // right-half-plane poles are the signal of interest
    bool include_linear_term = false;
    double improvement_tol = 1e-10;
    double poor_fit_threshold = 1e-3;
};

/// Iterative pole-relocation rational fitting with a pole set shared by all
/// four dq entries.
PoleResidueModel vector_fit(const ImpedanceSpectrum& y, int n_poles,
                            const VectorFitOptions& options = VectorFitOptions());

struct BandHz {
    double low = 1.0;
    double high = 200.0;
};

/// Oscillatory in-band poles (positive-frequency representatives) sorted by
/// descending real part; top_k retained, each with its participation factor.
std::vector<Mode> select_critical_modes(const PoleResidueModel& m, const BandHz& band,
                                        int top_k);

/// P = -(residue at lambda0)^T. The transpose-without-conjugation pairing is
/// the one validated by the first-order perturbation oracle.
ParticipationFactor participation_factor(const PoleResidueModel& m, Complex lambda0);

}  // namespace ard
