#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ardcore/errors.hpp"

namespace ard {

using Complex = std::complex<double>;

/// 2x2 complex matrix in the dq frame. Plays the impedance role (ohm) or the
/// admittance role (siemens) depending on context.
using DqMatrix = Eigen::Matrix2cd;

/// dq cross-coupling rotation [[0,-1],[1,0]].
inline Eigen::Matrix2d dq_rotation() {
    Eigen::Matrix2d j;
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
}

/// Series RL branch impedance in the dq frame at complex frequency s,
/// with cross coupling at the synchronous frequency omega0.
inline DqMatrix dq_rl_impedance(double r, double l, double omega0, Complex s) {
    DqMatrix z;
    Complex diag = r + s * l;
    z << diag, Complex(0.0, 0.0) - omega0 * l, Complex(omega0 * l, 0.0), diag;
    return z;
}

/// Ordered evaluation grid of angular frequencies (rad/s), strictly
/// increasing and positive. Default analysis band is 1-200 Hz.
class FrequencyGrid {
public:
    /// Empty placeholder; any populated grid is validated by the value
    /// constructor.
    FrequencyGrid() = default;

    explicit FrequencyGrid(std::vector<double> points);

    /// Logarithmically spaced grid between w_lo and w_hi (rad/s).
    static FrequencyGrid log_spaced(double w_lo, double w_hi, int n);

    /// Linearly spaced grid between w_lo and w_hi (rad/s).
    static FrequencyGrid linear_spaced(double w_lo, double w_hi, int n);

    /// The default sub-synchronous analysis band: 2*pi*1 .. 2*pi*200 rad/s,
    /// 400 log-spaced points.
    static FrequencyGrid default_band();

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double low() const { return points_.front(); }
    double high() const { return points_.back(); }

    bool operator==(const FrequencyGrid& other) const { return points_ == other.points_; }

private:
    std::vector<double> points_;
};

/// A 2x2 dq matrix sampled on a frequency grid.
struct ImpedanceSpectrum {
    FrequencyGrid grid;
    std::vector<DqMatrix> values;

    ImpedanceSpectrum() = default;
    ImpedanceSpectrum(FrequencyGrid g, std::vector<DqMatrix> v);
};

struct OperatingPoint {
    double P0 = 0.0;  // W
    double Q0 = 0.0;  // var
    double V0 = 0.0;  // V, PCC voltage magnitude
};

struct ControlParams {
    double J = 0.0;      // virtual inertia, W*s^2/rad^2
    double Dp = 0.0;     // damping, W*s/rad
    double Kq = 0.0;     // reactive droop, V/var
    double tau_q = 0.0;  // voltage-loop time constant, s
    double Rv = 0.0;     // virtual resistance, ohm
    double Lv = 0.0;     // virtual inductance, H
};

/// Operating point plus control parameters; the domain of the
/// parameter-to-impedance mapping and of attack actions.
struct ParameterVector {
    OperatingPoint xop;
    ControlParams rho;

    static constexpr int kDim = 9;
    static constexpr int kXopDim = 3;
    static constexpr int kRhoDim = 6;

    /// Coordinate order: P0, Q0, V0, J, Dp, Kq, tau_q, Rv, Lv.
    static const std::array<std::string, kDim>& coordinate_names();
    static bool is_xop_coordinate(int i) { return i < kXopDim; }

    double coordinate(int i) const;
    void set_coordinate(int i, double value);

    Eigen::Matrix<double, kDim, 1> to_vector() const;
    static ParameterVector from_vector(const Eigen::Matrix<double, kDim, 1>& v);

    void validate() const;
};

/// Grid-side Thevenin RL equivalent seen from the target bus.
struct GridEquivalent {
    double Rg = 0.0;      // ohm
    double Lg = 0.0;      // H
    double omega0 = 0.0;  // rad/s

    void validate() const;
};

struct PerUnitBase {
    double S_base = 1.0;  // VA
    double V_base = 1.0;  // V

    double Z_base() const { return V_base * V_base / S_base; }
};

}  // namespace ard
