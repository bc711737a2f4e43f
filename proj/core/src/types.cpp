#include "ardcore/types.hpp"

#include <cmath>

namespace ard {

namespace {
void check_grid(const std::vector<double>& pts) {
    require(pts.size() >= 8, ErrorCode::Input, "frequency grid needs at least 8 points");
    double prev = 0.0;
    for (double w : pts) {
        require(std::isfinite(w) && w > 0.0, ErrorCode::Input,
                "frequency grid points must be finite and positive");
        require(w > prev, ErrorCode::Input, "frequency grid must be strictly increasing");
        prev = w;
    }
}
}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> points) : points_(std::move(points)) {
    check_grid(points_);
}

FrequencyGrid FrequencyGrid::log_spaced(double w_lo, double w_hi, int n) {
    require(n >= 8 && w_lo > 0.0 && w_hi > w_lo, ErrorCode::Input,
            "log_spaced: need n >= 8 and 0 < w_lo < w_hi");
    std::vector<double> pts(static_cast<std::size_t>(n));
    const double a = std::log(w_lo);
    const double b = std::log(w_hi);
    for (int i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    }
    return FrequencyGrid(std::move(pts));
}

FrequencyGrid FrequencyGrid::linear_spaced(double w_lo, double w_hi, int n) {
    require(n >= 8 && w_lo > 0.0 && w_hi > w_lo, ErrorCode::Input,
            "linear_spaced: need n >= 8 and 0 < w_lo < w_hi");
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i)] = w_lo + (w_hi - w_lo) * i / (n - 1);
    }
    return FrequencyGrid(std::move(pts));
}

FrequencyGrid FrequencyGrid::default_band() {
    return log_spaced(2.0 * M_PI * 1.0, 2.0 * M_PI * 200.0, 400);
}

ImpedanceSpectrum::ImpedanceSpectrum(FrequencyGrid g, std::vector<DqMatrix> v)
    : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid.size(), ErrorCode::Input,
            "spectrum length must match grid length");
    for (const DqMatrix& m : values) {
        require(m.allFinite(), ErrorCode::Input, "spectrum entries must be finite");
    }
}

const std::array<std::string, ParameterVector::kDim>& ParameterVector::coordinate_names() {
    static const std::array<std::string, kDim> names = {
        "P0", "Q0", "V0", "J", "Dp", "Kq", "tau_q", "Rv", "Lv"};
    return names;
}

double ParameterVector::coordinate(int i) const {
    switch (i) {
        case 0: return xop.P0;
        case 1: return xop.Q0;
        case 2: return xop.V0;
        case 3: return rho.J;
        case 4: return rho.Dp;
        case 5: return rho.Kq;
        case 6: return rho.tau_q;
        case 7: return rho.Rv;
        case 8: return rho.Lv;
        default: throw Error(ErrorCode::Input, "parameter coordinate out of range");
    }
}

void ParameterVector::set_coordinate(int i, double value) {
    switch (i) {
        case 0: xop.P0 = value; break;
        case 1: xop.Q0 = value; break;
        case 2: xop.V0 = value; break;
        case 3: rho.J = value; break;
        case 4: rho.Dp = value; break;
        case 5: rho.Kq = value; break;
        case 6: rho.tau_q = value; break;
        case 7: rho.Rv = value; break;
        case 8: rho.Lv = value; break;
        default: throw Error(ErrorCode::Input, "parameter coordinate out of range");
    }
}

Eigen::Matrix<double, ParameterVector::kDim, 1> ParameterVector::to_vector() const {
    Eigen::Matrix<double, kDim, 1> v;
    for (int i = 0; i < kDim; ++i) v(i) = coordinate(i);
    return v;
}

ParameterVector ParameterVector::from_vector(const Eigen::Matrix<double, kDim, 1>& v) {
    ParameterVector p;
    for (int i = 0; i < kDim; ++i) p.set_coordinate(i, v(i));
    return p;
}

void ParameterVector::validate() const {
    require(rho.J > 0.0, ErrorCode::Input, "J must be > 0");
    require(rho.Dp >= 0.0, ErrorCode::Input, "Dp must be >= 0");
    require(rho.tau_q > 0.0, ErrorCode::Input, "tau_q must be > 0");
    require(rho.Lv >= 0.0, ErrorCode::Input, "Lv must be >= 0");
    require(rho.Rv >= 0.0, ErrorCode::Input, "Rv must be >= 0");
    require(xop.V0 > 0.0, ErrorCode::Input, "V0 must be > 0");
    for (int i = 0; i < kDim; ++i) {
        require(std::isfinite(coordinate(i)), ErrorCode::Input,
                "parameter coordinates must be finite");
    }
}

void GridEquivalent::validate() const {
    require(Rg >= 0.0, ErrorCode::Input, "Rg must be >= 0");
    require(Lg > 0.0, ErrorCode::Input, "Lg must be > 0");
    require(omega0 > 0.0, ErrorCode::Input, "omega0 must be > 0");
}

}  // namespace ard
