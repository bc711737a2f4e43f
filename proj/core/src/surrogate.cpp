#include "ardcore/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

namespace ard {

namespace {

constexpr int kSigma = 0;  // index of the frequency variable inside ExpXy

using ExpXy = RationalSurrogate::ExpXy;
using ExpRho = RationalSurrogate::ExpRho;

int total_degree(const ExpXy& e) { return std::accumulate(e.begin(), e.end(), 0); }
int total_degree(const ExpRho& e) { return std::accumulate(e.begin(), e.end(), 0); }

}  // namespace

CoordinateBounds CoordinateBounds::degenerate_at(const ParameterVector& v) {
    CoordinateBounds b;
    b.lo = v.to_vector();
    b.hi = v.to_vector();
    return b;
}

bool CoordinateBounds::contains(const ParameterVector& v, double expand_fraction) const {
    for (int i = 0; i < ParameterVector::kDim; ++i) {
        const double pad = expand_fraction * std::max(width(i), 0.0);
        const double x = v.coordinate(i);
        if (x < lo(i) - pad || x > hi(i) + pad) return false;
    }
    return true;
}

void CoordinateBounds::validate() const {
    for (int i = 0; i < ParameterVector::kDim; ++i) {
        require(std::isfinite(lo(i)) && std::isfinite(hi(i)) && lo(i) <= hi(i),
                ErrorCode::Input, "coordinate bounds must be finite with lo <= hi");
    }
}

std::vector<ParameterVector> lhs_sample(const CoordinateBounds& bounds, int n,
                                        std::uint64_t seed) {
    bounds.validate();
    require(n >= 2, ErrorCode::Input, "lhs_sample needs n >= 2");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> columns(ParameterVector::kDim);
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        columns[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(n));
        if (bounds.is_degenerate(c)) {
            std::fill(columns[static_cast<std::size_t>(c)].begin(),
                      columns[static_cast<std::size_t>(c)].end(), bounds.lo(c));
            continue;
        }
        std::vector<int> strata(static_cast<std::size_t>(n));
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < n; ++i) {
            const double frac = (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
            columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
                bounds.lo(c) + frac * bounds.width(c);
        }
    }

    std::vector<ParameterVector> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::Matrix<double, ParameterVector::kDim, 1> v;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            v(c) = columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(i)] = ParameterVector::from_vector(v);
    }
    return out;
}

ImpedanceSpectrum VsgPlant::spectrum(const ParameterVector& v, const FrequencyGrid& grid) const {
    const StateSpaceModel model = build(v);
    std::vector<DqMatrix> values;
    values.reserve(grid.size());
    for (double w : grid.points()) {
        values.push_back(evaluate_impedance(model, Complex(0.0, w)));
    }
    return ImpedanceSpectrum(grid, std::move(values));
}

void TrainingDataset::validate() const {
    require(!params.empty() && params.size() == spectra.size(), ErrorCode::Dataset,
            "dataset must pair parameters with spectra");
    for (const auto& s : spectra) {
        require(s.grid == grid, ErrorCode::Dataset, "all dataset spectra must share one grid");
    }
    for (const auto& p : params) {
        require(bounds.contains(p), ErrorCode::Dataset, "dataset parameter outside bounds");
    }
}

ImpedanceSpectrum identify_spectrum_via_era(const VsgPlant& plant, const ParameterVector& v,
                                            const FrequencyGrid& grid,
                                            const DatasetOptions& options,
                                            std::vector<TransientRecord>* records_out) {
    const StateSpaceModel model = plant.build(v);
    const double a = options.prefilter_a;
    const double dt = options.record_dt;
    const int n_rec = options.record_samples;
    require(a > 0.0 && dt > 0.0 && n_rec >= 64, ErrorCode::Input,
            "invalid transient synthesis settings");

    // Proper realization of G(s) = Z(s) * a/(s+a): the injected current is
    // shaped by a known first-order filter so the series-inductance term of
    // Z becomes a finite feedthrough.
    const int n = model.n_states();
    Eigen::MatrixXd a_g = Eigen::MatrixXd::Zero(n + 2, n + 2);
    a_g.topLeftCorner(n, n) = model.A;
    a_g.topRightCorner(n, 2) = model.B;
    a_g.bottomRightCorner(2, 2) = -a * Eigen::Matrix2d::Identity();
    Eigen::MatrixXd b_g = Eigen::MatrixXd::Zero(n + 2, 2);
    b_g.bottomRows(2) = a * Eigen::Matrix2d::Identity();
    Eigen::MatrixXd c_g(2, n + 2);
    c_g.leftCols(n) = model.C;
    c_g.rightCols(2) = model.D - a * model.D1;
    const Eigen::Matrix2d d_g = a * model.D1;

    const Eigen::MatrixXd phi = (a_g * dt).exp();

    std::vector<TransientRecord> records(2);
    for (int dir = 0; dir < 2; ++dir) {
        TransientRecord& rec = records[static_cast<std::size_t>(dir)];
        rec.dt = dt;
        rec.experiment_id = dir + 1;
        rec.inputs.assign(static_cast<std::size_t>(n_rec), Eigen::Vector2d::Zero());
        rec.inputs[0] = Eigen::Vector2d::Unit(dir);
        rec.outputs.resize(static_cast<std::size_t>(n_rec));
        Eigen::VectorXd x = b_g.col(dir);
        rec.outputs[0] = d_g.col(dir);
        for (int k = 1; k < n_rec; ++k) {
            x = phi * x;
            rec.outputs[static_cast<std::size_t>(k)] = c_g * x;
        }
    }

    if (options.noise_rms_fraction > 0.0) {
        std::mt19937_64 rng(options.noise_seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (TransientRecord& rec : records) {
            double sumsq = 0.0;
            for (const auto& y : rec.outputs) sumsq += y.squaredNorm();
            const double rms = std::sqrt(sumsq / (2.0 * rec.outputs.size()));
            const double sigma = options.noise_rms_fraction * rms;
            for (auto& y : rec.outputs) {
                y(0) += sigma * gauss(rng);
                y(1) += sigma * gauss(rng);
            }
        }
    }

    const StateSpaceModel g_hat = era_identify(records[0], records[1]);

    std::vector<DqMatrix> values;
    values.reserve(grid.size());
    for (double w : grid.points()) {
        const Complex s(0.0, w);
        const Eigen::MatrixXcd g_val = g_hat.transfer(s);
        values.push_back(DqMatrix(g_val) * ((s + a) / a));
    }
    if (records_out) *records_out = std::move(records);
    return ImpedanceSpectrum(grid, std::move(values));
}

TrainingDataset generate_dataset(const VsgPlant& plant,
                                 const std::vector<ParameterVector>& params,
                                 const FrequencyGrid& grid, const CoordinateBounds& bounds,
                                 const DatasetOptions& options) {
    require(!params.empty(), ErrorCode::Dataset, "generate_dataset: empty parameter list");

    TrainingDataset d{{}, {}, grid, bounds, 0, {}};
    for (std::size_t i = 0; i < params.size(); ++i) {
        try {
            ImpedanceSpectrum spectrum =
                options.mode == DatasetMode::Direct
                    ? plant.spectrum(params[i], grid)
                    : identify_spectrum_via_era(plant, params[i], grid, options);
            d.params.push_back(params[i]);
            d.spectra.push_back(std::move(spectrum));
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "sample " << i << " skipped: " << e.what();
            d.skipped.push_back(msg.str());
        }
    }
    const double skip_fraction =
        static_cast<double>(d.skipped.size()) / static_cast<double>(params.size());
    require(skip_fraction <= 0.2, ErrorCode::Dataset,
            "more than 20% of dataset samples were infeasible");
    require(!d.params.empty(), ErrorCode::Dataset, "all dataset samples infeasible");
    return d;
}

// ---------------------------------------------------------------------------
// Rational surrogate
// ---------------------------------------------------------------------------

namespace {

std::vector<ExpXy> build_x_basis(int basis_degree, int op_degree_cap,
                                 const std::array<bool, 3>& op_active) {
    std::vector<ExpXy> basis;
    const int cap = std::min(op_degree_cap, basis_degree);
    // Enumerate sigma^a * P^b1 Q^b2 V^b3 with a + b <= basis_degree, b <= cap.
    for (int a = 0; a <= basis_degree; ++a) {
        for (int b1 = 0; b1 <= cap; ++b1) {
            for (int b2 = 0; b2 <= cap - b1; ++b2) {
                for (int b3 = 0; b3 <= cap - b1 - b2; ++b3) {
                    if (a + b1 + b2 + b3 > basis_degree) continue;
                    if ((b1 > 0 && !op_active[0]) || (b2 > 0 && !op_active[1]) ||
                        (b3 > 0 && !op_active[2])) {
                        continue;
                    }
                    basis.push_back(ExpXy{a, b1, b2, b3});
                }
            }
        }
    }
    std::sort(basis.begin(), basis.end());
    return basis;
}

std::vector<ExpXy> build_xy_monomials(const std::vector<ExpXy>& x_basis) {
    std::vector<ExpXy> xy;
    for (std::size_t i = 0; i < x_basis.size(); ++i) {
        for (std::size_t j = i; j < x_basis.size(); ++j) {
            ExpXy sum;
            for (std::size_t c = 0; c < sum.size(); ++c) {
                sum[c] = x_basis[i][c] + x_basis[j][c];
            }
            xy.push_back(sum);
        }
    }
    std::sort(xy.begin(), xy.end());
    xy.erase(std::unique(xy.begin(), xy.end()), xy.end());
    return xy;
}

std::vector<ExpRho> build_rho_basis(int rho_degree, const std::array<bool, 6>& active) {
    std::vector<ExpRho> basis;
    ExpRho e{};
    // Depth-first enumeration of exponents with total degree <= rho_degree.
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (idx == static_cast<int>(e.size())) {
            basis.push_back(e);
            return;
        }
        const int max_here = active[static_cast<std::size_t>(idx)] ? remaining : 0;
        for (int d = 0; d <= max_here; ++d) {
            e[static_cast<std::size_t>(idx)] = d;
            rec(idx + 1, remaining - d);
        }
        e[static_cast<std::size_t>(idx)] = 0;
    };
    rec(0, rho_degree);
    std::sort(basis.begin(), basis.end());
    return basis;
}

}  // namespace

void RationalSurrogate::basis_values(const ParameterVector& v, Complex s,
                                     Eigen::VectorXcd& phi_xy,
                                     Eigen::VectorXd& phi_rho) const {
    const Complex sigma = normalized_frequency(s);
    std::array<double, 3> t_op;
    for (int c = 0; c < 3; ++c) {
        t_op[static_cast<std::size_t>(c)] =
            bounds_.is_degenerate(c)
                ? 0.0
                : 2.0 * (v.coordinate(c) - bounds_.lo(c)) / bounds_.width(c) - 1.0;
    }
    phi_xy.resize(static_cast<Eigen::Index>(xy_exponents_.size()));
    for (std::size_t q = 0; q < xy_exponents_.size(); ++q) {
        const ExpXy& e = xy_exponents_[q];
        Complex val(1.0, 0.0);
        for (int k = 0; k < e[0]; ++k) val *= sigma;  // keeps real sigma exactly real
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < e[static_cast<std::size_t>(c) + 1]; ++k) {
                val *= t_op[static_cast<std::size_t>(c)];
            }
        }
        phi_xy(static_cast<Eigen::Index>(q)) = val;
    }

    std::array<double, 6> t_rho;
    for (int c = 0; c < 6; ++c) {
        const int ci = c + 3;
        t_rho[static_cast<std::size_t>(c)] =
            bounds_.is_degenerate(ci)
                ? 0.0
                : 2.0 * (v.coordinate(ci) - bounds_.lo(ci)) / bounds_.width(ci) - 1.0;
    }
    phi_rho.resize(static_cast<Eigen::Index>(rho_exponents_.size()));
    for (std::size_t q = 0; q < rho_exponents_.size(); ++q) {
        double val = 1.0;
        for (int c = 0; c < 6; ++c) {
            for (int k = 0; k < rho_exponents_[q][static_cast<std::size_t>(c)]; ++k) {
                val *= t_rho[static_cast<std::size_t>(c)];
            }
        }
        phi_rho(static_cast<Eigen::Index>(q)) = val;
    }
}

DqMatrix RationalSurrogate::evaluate(const ParameterVector& v, Complex s) const {
    Eigen::VectorXcd phi_xy;
    Eigen::VectorXd phi_rho;
    basis_values(v, s, phi_xy, phi_rho);
    // use transpose-product (no conjugation)
    auto num = [&](int m) -> Complex {
        const Eigen::VectorXcd w = num_coefficients_[static_cast<std::size_t>(m)] * phi_rho;
        return (phi_xy.transpose() * w)(0);
    };
    const Eigen::VectorXd wd = den_coefficients_ * phi_rho;
    const Complex den = (phi_xy.transpose() * wd.cast<Complex>())(0);
    require(std::abs(den) >= 1e-9, ErrorCode::EvaluationSingularity,
            "surrogate denominator vanished");
    DqMatrix z;
    z(0, 0) = num(0) / den;
    z(0, 1) = num(1) / den;
    z(1, 0) = num(2) / den;
    z(1, 1) = num(3) / den;
    return z;
}

std::array<DqMatrix, ParameterVector::kDim> RationalSurrogate::gradient(
    const ParameterVector& v, Complex s) const {
    Eigen::VectorXcd phi_xy;
    Eigen::VectorXd phi_rho;
    basis_values(v, s, phi_xy, phi_rho);
    auto poly = [&](int m, const Eigen::VectorXcd& pxy, const Eigen::VectorXd& prho) {
        if (m < 4) {
            const Eigen::VectorXcd w = num_coefficients_[static_cast<std::size_t>(m)] * prho;
            return Complex((pxy.transpose() * w)(0));
        }
        const Eigen::VectorXd w = den_coefficients_ * prho;
        return Complex((pxy.transpose() * w.cast<Complex>())(0));
    };

    std::array<Complex, 5> value;
    for (int m = 0; m < 5; ++m) value[static_cast<std::size_t>(m)] = poly(m, phi_xy, phi_rho);
    const Complex den = value[4];
    require(std::abs(den) >= 1e-9, ErrorCode::EvaluationSingularity,
            "surrogate denominator vanished");

    const Complex sigma = normalized_frequency(s);
    std::array<double, 3> t_op;
    for (int c = 0; c < 3; ++c) {
        t_op[static_cast<std::size_t>(c)] =
            bounds_.is_degenerate(c)
                ? 0.0
                : 2.0 * (v.coordinate(c) - bounds_.lo(c)) / bounds_.width(c) - 1.0;
    }
    std::array<double, 6> t_rho;
    for (int c = 0; c < 6; ++c) {
        const int ci = c + 3;
        t_rho[static_cast<std::size_t>(c)] =
            bounds_.is_degenerate(ci)
                ? 0.0
                : 2.0 * (v.coordinate(ci) - bounds_.lo(ci)) / bounds_.width(ci) - 1.0;
    }

    std::array<DqMatrix, ParameterVector::kDim> grads;
    for (auto& g : grads) g = DqMatrix::Zero();

    for (int coord = 0; coord < ParameterVector::kDim; ++coord) {
        if (bounds_.is_degenerate(coord)) continue;
        const double slope = 2.0 / bounds_.width(coord);
        std::array<Complex, 5> dvalue{};
        if (coord < 3) {
            Eigen::VectorXcd dphi(phi_xy.size());
            for (std::size_t q = 0; q < xy_exponents_.size(); ++q) {
                const ExpXy& e = xy_exponents_[q];
                const int ex = e[static_cast<std::size_t>(coord) + 1];
                if (ex == 0) {
                    dphi(static_cast<Eigen::Index>(q)) = 0.0;
                    continue;
                }
                Complex val(static_cast<double>(ex), 0.0);
                for (int k = 0; k < e[0]; ++k) val *= sigma;
                for (int c = 0; c < 3; ++c) {
                    int reps = e[static_cast<std::size_t>(c) + 1];
                    if (c == coord) reps -= 1;
                    for (int k = 0; k < reps; ++k) val *= t_op[static_cast<std::size_t>(c)];
                }
                dphi(static_cast<Eigen::Index>(q)) = val;
            }
            for (int m = 0; m < 5; ++m) {
                dvalue[static_cast<std::size_t>(m)] = slope * poly(m, dphi, phi_rho);
            }
        } else {
            const int rc = coord - 3;
            Eigen::VectorXd dprho(phi_rho.size());
            for (std::size_t q = 0; q < rho_exponents_.size(); ++q) {
                const int ex = rho_exponents_[q][static_cast<std::size_t>(rc)];
                if (ex == 0) {
                    dprho(static_cast<Eigen::Index>(q)) = 0.0;
                    continue;
                }
                double val = static_cast<double>(ex);
                for (int c = 0; c < 6; ++c) {
                    int reps = rho_exponents_[q][static_cast<std::size_t>(c)];
                    if (c == rc) reps -= 1;
                    for (int k = 0; k < reps; ++k) val *= t_rho[static_cast<std::size_t>(c)];
                }
                dprho(static_cast<Eigen::Index>(q)) = val;
            }
            for (int m = 0; m < 5; ++m) {
                dvalue[static_cast<std::size_t>(m)] = slope * poly(m, phi_xy, dprho);
            }
        }
        // Quotient rule for each dq entry.
        DqMatrix g;
        g(0, 0) = (dvalue[0] * den - value[0] * dvalue[4]) / (den * den);
        g(0, 1) = (dvalue[1] * den - value[1] * dvalue[4]) / (den * den);
        g(1, 0) = (dvalue[2] * den - value[2] * dvalue[4]) / (den * den);
        g(1, 1) = (dvalue[3] * den - value[3] * dvalue[4]) / (den * den);
        grads[static_cast<std::size_t>(coord)] = g;
    }
    return grads;
}

bool RationalSurrogate::in_domain(const ParameterVector& v, double expand_fraction) const {
    return bounds_.contains(v, expand_fraction);
}

Complex RationalSurrogate::denominator_value(const ParameterVector& v, Complex s) const {
    Eigen::VectorXcd phi_xy;
    Eigen::VectorXd phi_rho;
    basis_values(v, s, phi_xy, phi_rho);
    const Eigen::VectorXd w = den_coefficients_ * phi_rho;
    return (phi_xy.transpose() * w.cast<Complex>())(0);
}

std::vector<Eigen::MatrixXcd> RationalSurrogate::coupling_matrices(int matrix_index) const {
    require(matrix_index >= 0 && matrix_index < 5, ErrorCode::Input,
            "matrix_index out of range");
    const std::size_t k = x_exponents_.size();
    std::vector<Eigen::MatrixXcd> out(rho_exponents_.size(),
                                      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k),
                                                             static_cast<Eigen::Index>(k)));
    for (std::size_t q = 0; q < xy_exponents_.size(); ++q) {
        // Canonical decomposition: the first (i, j) pair whose exponents sum
        // to this monomial.
        int pi = -1, pj = -1;
        for (std::size_t i = 0; i < k && pi < 0; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                ExpXy sum;
                for (std::size_t c = 0; c < sum.size(); ++c) {
                    sum[c] = x_exponents_[i][c] + x_exponents_[j][c];
                }
                if (sum == xy_exponents_[q]) {
                    pi = static_cast<int>(i);
                    pj = static_cast<int>(j);
                    break;
                }
            }
        }
        require(pi >= 0, ErrorCode::Input, "xy monomial without x-pair decomposition");
        for (std::size_t t = 0; t < rho_exponents_.size(); ++t) {
            const Complex c =
                matrix_index < 4
                    ? num_coefficients_[static_cast<std::size_t>(matrix_index)](
                          static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(t))
                    : Complex(den_coefficients_(static_cast<Eigen::Index>(q),
                                                static_cast<Eigen::Index>(t)),
                              0.0);
            if (pi == pj) {
                out[t](pi, pi) += c;
            } else {
                out[t](pi, pj) += 0.5 * c;
                out[t](pj, pi) += 0.5 * c;
            }
        }
    }
    return out;
}

RationalSurrogate fit_surrogate(const TrainingDataset& d, const SurrogateFitOptions& options) {
    d.validate();
    require(options.basis_degree >= 1 && options.rho_degree >= 0, ErrorCode::Input,
            "invalid surrogate degrees");
    require(options.ridge >= 0.0, ErrorCode::Input, "ridge must be non-negative");

    RationalSurrogate f;
    f.bounds_ = d.bounds;
    f.omega_lo_ = d.grid.low();
    f.omega_hi_ = d.grid.high();
    require(f.omega_hi_ > f.omega_lo_, ErrorCode::Input,
            "surrogate training grid needs at least two distinct frequencies");

    std::array<bool, 3> op_active;
    for (int c = 0; c < 3; ++c) op_active[static_cast<std::size_t>(c)] = !d.bounds.is_degenerate(c);
    std::array<bool, 6> rho_active;
    for (int c = 0; c < 6; ++c) {
        rho_active[static_cast<std::size_t>(c)] = !d.bounds.is_degenerate(c + 3);
    }

    f.x_exponents_ = build_x_basis(options.basis_degree, options.op_degree_in_x, op_active);
    f.xy_exponents_ = build_xy_monomials(f.x_exponents_);
    f.rho_exponents_ = build_rho_basis(options.rho_degree, rho_active);

    const int n_xy = static_cast<int>(f.xy_exponents_.size());
    const int n_rho = static_cast<int>(f.rho_exponents_.size());
    const int nb = n_xy * n_rho;
    // Real unknowns: complex numerators for the four dq entries plus the
    // real denominator, minus the pinned denominator constant.
    const int n_unknowns = 9 * nb - 1;

    // Index of the constant monomial inside the kron layout (pinned to 1 in
    // the denominator).
    int xy_const = -1, rho_const = -1;
    for (int q = 0; q < n_xy; ++q) {
        if (total_degree(f.xy_exponents_[static_cast<std::size_t>(q)]) == 0) xy_const = q;
    }
    for (int t = 0; t < n_rho; ++t) {
        if (total_degree(f.rho_exponents_[static_cast<std::size_t>(t)]) == 0) rho_const = t;
    }
    require(xy_const >= 0 && rho_const >= 0, ErrorCode::Input, "basis lacks constant monomial");
    const int pinned = xy_const * n_rho + rho_const;  // inside the denominator block

    // Train/validation split over samples.
    const int n_total = static_cast<int>(d.params.size());
    std::vector<int> order(static_cast<std::size_t>(n_total));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    int n_val = static_cast<int>(std::lround(options.validation_fraction * n_total));
    n_val = std::min(n_val, n_total - 1);
    const std::vector<int> val_idx(order.begin(), order.begin() + n_val);
    const std::vector<int> train_idx(order.begin() + n_val, order.end());

    // Frequency subset used for the fit equations.
    std::vector<int> freq_idx;
    for (int i = 0; i < static_cast<int>(d.grid.size()); i += std::max(1, options.fit_grid_stride)) {
        freq_idx.push_back(i);
    }

    const long n_obs = static_cast<long>(train_idx.size()) * freq_idx.size() * 4 * 2;
    require(n_obs >= 3L * n_unknowns, ErrorCode::InsufficientData,
            "dataset too small for the requested surrogate basis");

    // Precompute per-sample bases. On the imaginary axis the normalized
    // frequency is real, so the xy basis is stored as a real matrix.
    std::vector<Eigen::VectorXd> phi_rho_s(static_cast<std::size_t>(n_total));
    std::vector<Eigen::MatrixXd> phi_xy_s(static_cast<std::size_t>(n_total));
    {
        Eigen::VectorXcd pxy;
        Eigen::VectorXd prho;
        for (int p = 0; p < n_total; ++p) {
            phi_xy_s[static_cast<std::size_t>(p)].resize(
                static_cast<Eigen::Index>(freq_idx.size()), n_xy);
            for (std::size_t wi = 0; wi < freq_idx.size(); ++wi) {
                const Complex s(0.0, d.grid[static_cast<std::size_t>(freq_idx[wi])]);
                f.basis_values(d.params[static_cast<std::size_t>(p)], s, pxy, prho);
                phi_xy_s[static_cast<std::size_t>(p)].row(static_cast<Eigen::Index>(wi)) =
                    pxy.real().transpose();
            }
            phi_rho_s[static_cast<std::size_t>(p)] = prho;
        }
    }

    using RowMajorMap = Eigen::Map<
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    // Nontriviality constraint vector: the training-data mean of the
    // denominator is held at 1. Pinning a single coefficient instead lets
    // the least squares cancel it with other monomials and collapse the
    // denominator toward zero on the data manifold.
    Eigen::VectorXd mean_r = Eigen::VectorXd::Zero(nb);
    {
        for (int p_i : train_idx) {
            const Eigen::VectorXd xy_sum =
                phi_xy_s[static_cast<std::size_t>(p_i)].colwise().sum().transpose();
            const Eigen::VectorXd& prho = phi_rho_s[static_cast<std::size_t>(p_i)];
            for (int q = 0; q < n_xy; ++q) {
                mean_r.segment(q * n_rho, n_rho) += xy_sum(q) * prho;
            }
        }
        mean_r /= static_cast<double>(train_idx.size() * freq_idx.size());
    }
    Eigen::Index anchor = 0;
    mean_r.cwiseAbs().maxCoeff(&anchor);
    require(std::abs(mean_r(anchor)) > 0.0, ErrorCode::NumericalConditioning,
            "degenerate denominator constraint");

    // Sanathanan-Koerner iterations with the previous denominator as row
    // weight. Each dq entry contributes the real equation pair
    //   Re(Z) r.den - r.num_re = 0,  Im(Z) r.den - r.num_im = 0
    // with shared regressor r = kron(phi_xy, phi_rho), so the eight
    // numerator blocks share one Gram matrix and are eliminated; only the
    // denominator's Schur complement is solved at full block size.
    Eigen::VectorXd theta_den = Eigen::VectorXd::Zero(nb);
    theta_den(pinned) = 1.0;
    std::array<Eigen::VectorXd, 4> theta_re, theta_im;

    Eigen::MatrixXd g0(nb, nb), gd(nb, nb);
    std::array<Eigen::MatrixXd, 4> br, bi;

    auto add_kron = [&](Eigen::MatrixXd& dst, const Eigen::MatrixXd& xy_part,
                        const Eigen::MatrixXd& rho_outer) {
        for (int qa = 0; qa < n_xy; ++qa) {
            for (int qb = 0; qb < n_xy; ++qb) {
                dst.block(qa * n_rho, qb * n_rho, n_rho, n_rho) += xy_part(qa, qb) * rho_outer;
            }
        }
    };

    for (int sk = 0; sk < std::max(1, options.sk_iterations); ++sk) {
        g0 = Eigen::MatrixXd::Zero(nb, nb);
        gd = Eigen::MatrixXd::Zero(nb, nb);
        for (auto& m : br) m = Eigen::MatrixXd::Zero(nb, nb);
        for (auto& m : bi) m = Eigen::MatrixXd::Zero(nb, nb);

        for (int p_i : train_idx) {
            const Eigen::MatrixXd& pxy = phi_xy_s[static_cast<std::size_t>(p_i)];
            const Eigen::VectorXd& prho = phi_rho_s[static_cast<std::size_t>(p_i)];
            const Eigen::MatrixXd rho_outer = prho * prho.transpose();
            const auto& spec = d.spectra[static_cast<std::size_t>(p_i)];

            Eigen::VectorXd dvec;
            if (sk > 0) {
                RowMajorMap wd(theta_den.data(), n_xy, n_rho);
                dvec = wd * prho;
            }

            Eigen::MatrixXd s0_xy = Eigen::MatrixXd::Zero(n_xy, n_xy);
            Eigen::MatrixXd gd_xy = Eigen::MatrixXd::Zero(n_xy, n_xy);
            std::array<Eigen::MatrixXd, 4> br_xy, bi_xy;
            for (auto& m : br_xy) m = Eigen::MatrixXd::Zero(n_xy, n_xy);
            for (auto& m : bi_xy) m = Eigen::MatrixXd::Zero(n_xy, n_xy);

            for (std::size_t wi = 0; wi < freq_idx.size(); ++wi) {
                const Eigen::RowVectorXd x = pxy.row(static_cast<Eigen::Index>(wi));
                double w2 = 1.0;
                if (sk > 0) {
                    const double mag = std::max(std::abs(x.dot(dvec)), 1e-8);
                    w2 = 1.0 / (mag * mag);
                }
                const DqMatrix& z = spec.values[static_cast<std::size_t>(freq_idx[wi])];
                const std::array<Complex, 4> y = {z(0, 0), z(0, 1), z(1, 0), z(1, 1)};
                const Eigen::MatrixXd outer = w2 * (x.transpose() * x);
                s0_xy += outer;
                double abs2 = 0.0;
                for (int e = 0; e < 4; ++e) {
                    br_xy[static_cast<std::size_t>(e)] +=
                        y[static_cast<std::size_t>(e)].real() * outer;
                    bi_xy[static_cast<std::size_t>(e)] +=
                        y[static_cast<std::size_t>(e)].imag() * outer;
                    abs2 += std::norm(y[static_cast<std::size_t>(e)]);
                }
                gd_xy += abs2 * outer;
            }

            add_kron(g0, s0_xy, rho_outer);
            add_kron(gd, gd_xy, rho_outer);
            for (int e = 0; e < 4; ++e) {
                add_kron(br[static_cast<std::size_t>(e)], br_xy[static_cast<std::size_t>(e)],
                         rho_outer);
                add_kron(bi[static_cast<std::size_t>(e)], bi_xy[static_cast<std::size_t>(e)],
                         rho_outer);
            }
        }

        // Shared numerator Gram factorization, then the denominator Schur
        // complement S = Gd - sum_m (B_m^T G0^{-1} B_m) over all eight
        // numerator blocks.
        Eigen::MatrixXd g0r = g0;
        g0r.diagonal().array() += options.ridge * std::max(g0.diagonal().maxCoeff(), 1.0);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt0(g0r);
        require(ldlt0.info() == Eigen::Success, ErrorCode::NumericalConditioning,
                "surrogate numerator Gram matrix not positive definite");

        Eigen::MatrixXd schur = gd;
        for (int e = 0; e < 4; ++e) {
            const auto& mr = br[static_cast<std::size_t>(e)];
            const auto& mi = bi[static_cast<std::size_t>(e)];
            schur.noalias() -= mr.transpose() * ldlt0.solve(mr);
            schur.noalias() -= mi.transpose() * ldlt0.solve(mi);
        }
        // Enforce mean_r . d = 1 by eliminating the anchor coefficient:
        // d = e_a/c_a + M y with M's columns e_k - (c_k/c_a) e_a.
        const double c_a = mean_r(anchor);
        Eigen::MatrixXd sm(nb, nb - 1);
        const Eigen::VectorXd sd0 = schur.col(anchor) / c_a;
        {
            int ci = 0;
            for (int j = 0; j < nb; ++j) {
                if (j == anchor) continue;
                sm.col(ci) = schur.col(j) - (mean_r(j) / c_a) * schur.col(anchor);
                ++ci;
            }
        }
        Eigen::MatrixXd s_red(nb - 1, nb - 1);
        Eigen::VectorXd rhs_red(nb - 1);
        {
            int ri = 0;
            for (int i = 0; i < nb; ++i) {
                if (i == anchor) continue;
                s_red.row(ri) = sm.row(i) - (mean_r(i) / c_a) * sm.row(anchor);
                rhs_red(ri) = -(sd0(i) - (mean_r(i) / c_a) * sd0(anchor));
                ++ri;
            }
        }
        s_red.diagonal().array() += options.ridge * std::max(s_red.diagonal().maxCoeff(), 1.0);

        const Eigen::LDLT<Eigen::MatrixXd> ldlt_s(s_red);
        require(ldlt_s.info() == Eigen::Success, ErrorCode::NumericalConditioning,
                "surrogate normal equations not positive definite");
        const Eigen::VectorXd sol = ldlt_s.solve(rhs_red);
        require(sol.allFinite(), ErrorCode::NumericalConditioning,
                "non-finite surrogate fit solution");
        {
            int ri = 0;
            double acc = 0.0;
            for (int i = 0; i < nb; ++i) {
                if (i == anchor) continue;
                theta_den(i) = sol(ri);
                acc += mean_r(i) * sol(ri);
                ++ri;
            }
            theta_den(anchor) = (1.0 - acc) / c_a;
        }

        // Back-substitute the numerator blocks for this denominator.
        for (int e = 0; e < 4; ++e) {
            theta_re[static_cast<std::size_t>(e)] =
                ldlt0.solve(br[static_cast<std::size_t>(e)] * theta_den);
            theta_im[static_cast<std::size_t>(e)] =
                ldlt0.solve(bi[static_cast<std::size_t>(e)] * theta_den);
        }
    }

    for (int m = 0; m < 4; ++m) {
        const Eigen::MatrixXd re =
            RowMajorMap(theta_re[static_cast<std::size_t>(m)].data(), n_xy, n_rho);
        const Eigen::MatrixXd im =
            RowMajorMap(theta_im[static_cast<std::size_t>(m)].data(), n_xy, n_rho);
        f.num_coefficients_[static_cast<std::size_t>(m)] =
            re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
    }
    f.den_coefficients_ = RowMajorMap(theta_den.data(), n_xy, n_rho);

    // Quality report from the true rational evaluation; a vanished
    // denominator counts as full error at that point (the lattice check
    // below decides whether the surrogate is usable at all).
    auto rel_rms = [&](const std::vector<int>& idx) {
        double err2 = 0.0, ref2 = 0.0;
        for (int p : idx) {
            for (std::size_t wi = 0; wi < d.grid.size(); ++wi) {
                const Complex s(0.0, d.grid[wi]);
                const DqMatrix& ref = d.spectra[static_cast<std::size_t>(p)].values[wi];
                ref2 += ref.squaredNorm();
                try {
                    const DqMatrix pred =
                        f.evaluate(d.params[static_cast<std::size_t>(p)], s);
                    err2 += (pred - ref).squaredNorm();
                } catch (const Error&) {
                    err2 += ref.squaredNorm();
                }
            }
        }
        return ref2 > 0.0 ? std::sqrt(err2 / ref2) : 0.0;
    };

    f.report_.options = options;
    f.report_.n_train = static_cast<int>(train_idx.size());
    f.report_.n_validation = static_cast<int>(val_idx.size());
    f.report_.n_coefficients = n_unknowns;
    f.report_.training_rel_rms = rel_rms(train_idx);
    f.report_.validation_rel_rms = val_idx.empty() ? f.report_.training_rel_rms : rel_rms(val_idx);

    // Denominator margin check on a validation lattice: dataset parameters
    // plus seeded random points, on a coarse frequency subset.
    double lattice_margin = 0.0;
    {
        std::vector<ParameterVector> lattice = d.params;
        std::mt19937_64 lat_rng(options.seed + 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 100; ++k) {
            ParameterVector v = d.params[0];
            for (int c = 0; c < ParameterVector::kDim; ++c) {
                if (d.bounds.is_degenerate(c)) {
                    v.set_coordinate(c, d.bounds.lo(c));
                } else {
                    v.set_coordinate(c, d.bounds.lo(c) + unit(lat_rng) * d.bounds.width(c));
                }
            }
            lattice.push_back(v);
        }
        // The denominator is real on the band, so positivity is checked
        // directly: the signed minimum normalized by the largest magnitude
        // must stay above the margin (a sign change makes it negative).
        double min_den = std::numeric_limits<double>::infinity();
        double max_abs = 0.0;
        Eigen::VectorXcd pxy;
        Eigen::VectorXd prho;
        for (const auto& v : lattice) {
            for (std::size_t wi = 0; wi < d.grid.size(); wi += 16) {
                f.basis_values(v, Complex(0.0, d.grid[wi]), pxy, prho);
                const Eigen::VectorXd wden = f.den_coefficients_ * prho;
                const double den = pxy.real().dot(wden);
                min_den = std::min(min_den, den);
                max_abs = std::max(max_abs, std::abs(den));
            }
        }
        lattice_margin = (max_abs > 0.0) ? min_den / max_abs : 0.0;
        f.report_.denominator_margin = lattice_margin;
        char msg[224];
        std::snprintf(msg, sizeof(msg),
                      "surrogate denominator is not positive over the validation lattice "
                      "(normalized margin = %.3e, train relrms = %.3e, val relrms = %.3e)",
                      lattice_margin, f.report_.training_rel_rms,
                      f.report_.validation_rel_rms);
        require(lattice_margin >= 1e-6, ErrorCode::InvalidSurrogate, msg);
    }

    return f;
}

DqMatrix WhiteboxSurrogate::evaluate(const ParameterVector& v, Complex s) const {
    return plant_.impedance(v, s);
}

std::array<DqMatrix, ParameterVector::kDim> WhiteboxSurrogate::gradient(
    const ParameterVector& v, Complex s) const {
    std::array<DqMatrix, ParameterVector::kDim> grads;
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        const double width = bounds_.width(c);
        if (width == 0.0) {
            grads[static_cast<std::size_t>(c)] = DqMatrix::Zero();
            continue;
        }
        const double h = 1e-6 * width;
        // Keep the stencil inside the box so corner points stay physically
        // valid; at a bound this degrades to a one-sided difference.
        const double a = std::max(v.coordinate(c) - h, bounds_.lo(c));
        const double b = std::min(v.coordinate(c) + h, bounds_.hi(c));
        ParameterVector vp = v, vm = v;
        vp.set_coordinate(c, b);
        vm.set_coordinate(c, a);
        grads[static_cast<std::size_t>(c)] =
            (plant_.impedance(vp, s) - plant_.impedance(vm, s)) / (b - a);
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string RationalSurrogate::to_json_string() const {
    nlohmann::ordered_json j;
    j["format"] = "ardscan-surrogate";
    j["version"] = 1;
    j["omega_low"] = omega_lo_;
    j["omega_high"] = omega_hi_;
    j["bounds"]["lo"] = std::vector<double>(bounds_.lo.data(), bounds_.lo.data() + 9);
    j["bounds"]["hi"] = std::vector<double>(bounds_.hi.data(), bounds_.hi.data() + 9);
    j["x_basis"] = x_exponents_;
    j["rho_basis"] = rho_exponents_;
    static const char* names[5] = {"A_dd", "A_dq", "A_qd", "A_qq", "A_0"};
    for (int m = 0; m < 5; ++m) {
        // Numerator entries serialize as [re, im] pairs; the denominator is
        // real and serializes as plain numbers.
        const auto mats = coupling_matrices(m);
        nlohmann::ordered_json jm = nlohmann::ordered_json::array();
        for (const auto& a : mats) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (Eigen::Index r = 0; r < a.rows(); ++r) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (Eigen::Index c = 0; c < a.cols(); ++c) {
                    if (m < 4) {
                        row.push_back({a(r, c).real(), a(r, c).imag()});
                    } else {
                        row.push_back(a(r, c).real());
                    }
                }
                rows.push_back(row);
            }
            jm.push_back(rows);
        }
        j[names[m]] = jm;
    }
    j["report"]["validation_rel_rms"] = report_.validation_rel_rms;
    j["report"]["training_rel_rms"] = report_.training_rel_rms;
    j["report"]["n_train"] = report_.n_train;
    j["report"]["n_validation"] = report_.n_validation;
    j["report"]["n_coefficients"] = report_.n_coefficients;
    j["report"]["denominator_margin"] = report_.denominator_margin;
    j["report"]["basis_degree"] = report_.options.basis_degree;
    j["report"]["rho_degree"] = report_.options.rho_degree;
    j["report"]["op_degree_in_x"] = report_.options.op_degree_in_x;
    j["report"]["ridge"] = report_.options.ridge;
    j["report"]["seed"] = report_.options.seed;
    return j.dump(2);
}

RationalSurrogate RationalSurrogate::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("surrogate JSON parse error: ") + e.what());
    }
    require(j.value("format", "") == "ardscan-surrogate" && j.value("version", 0) == 1,
            ErrorCode::Config, "unrecognized surrogate file format");

    RationalSurrogate f;
    f.omega_lo_ = j.at("omega_low").get<double>();
    f.omega_hi_ = j.at("omega_high").get<double>();
    require(f.omega_hi_ > f.omega_lo_, ErrorCode::Config, "bad frequency band in surrogate file");
    const auto lo = j.at("bounds").at("lo").get<std::vector<double>>();
    const auto hi = j.at("bounds").at("hi").get<std::vector<double>>();
    require(lo.size() == 9 && hi.size() == 9, ErrorCode::Config, "bad bounds in surrogate file");
    for (int c = 0; c < 9; ++c) {
        f.bounds_.lo(c) = lo[static_cast<std::size_t>(c)];
        f.bounds_.hi(c) = hi[static_cast<std::size_t>(c)];
    }
    f.x_exponents_ = j.at("x_basis").get<std::vector<ExpXy>>();
    f.rho_exponents_ = j.at("rho_basis").get<std::vector<ExpRho>>();
    f.xy_exponents_ = build_xy_monomials(f.x_exponents_);

    const int n_xy = static_cast<int>(f.xy_exponents_.size());
    const int n_rho = static_cast<int>(f.rho_exponents_.size());
    const int k = static_cast<int>(f.x_exponents_.size());
    static const char* names[5] = {"A_dd", "A_dq", "A_qd", "A_qq", "A_0"};
    for (int m = 0; m < 5; ++m) {
        const auto& jm = j.at(names[m]);
        require(static_cast<int>(jm.size()) == n_rho, ErrorCode::Config,
                "surrogate coefficient tensor shape mismatch");
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n_xy, n_rho);
        for (int t = 0; t < n_rho; ++t) {
            for (int i = 0; i < k; ++i) {
                for (int jx = 0; jx < k; ++jx) {
                    const auto& cell = jm[static_cast<std::size_t>(t)]
                                         [static_cast<std::size_t>(i)]
                                         [static_cast<std::size_t>(jx)];
                    Complex a_val;
                    if (m < 4) {
                        require(cell.is_array() && cell.size() == 2, ErrorCode::Config,
                                "surrogate numerator entries must be [re, im] pairs");
                        a_val = Complex(cell[0].get<double>(), cell[1].get<double>());
                    } else {
                        a_val = Complex(cell.get<double>(), 0.0);
                    }
                    if (a_val == Complex(0.0, 0.0)) continue;
                    ExpXy sum;
                    for (std::size_t cc = 0; cc < sum.size(); ++cc) {
                        sum[cc] = f.x_exponents_[static_cast<std::size_t>(i)][cc] +
                                  f.x_exponents_[static_cast<std::size_t>(jx)][cc];
                    }
                    const auto it = std::lower_bound(f.xy_exponents_.begin(),
                                                     f.xy_exponents_.end(), sum);
                    require(it != f.xy_exponents_.end() && *it == sum, ErrorCode::Config,
                            "surrogate coefficient outside monomial set");
                    const int q = static_cast<int>(it - f.xy_exponents_.begin());
                    c(q, t) += a_val;
                }
            }
        }
        if (m < 4) {
            f.num_coefficients_[static_cast<std::size_t>(m)] = c;
        } else {
            f.den_coefficients_ = c.real();
        }
    }
    if (j.contains("report")) {
        const auto& r = j.at("report");
        f.report_.validation_rel_rms = r.value("validation_rel_rms", 0.0);
        f.report_.training_rel_rms = r.value("training_rel_rms", 0.0);
        f.report_.denominator_margin = r.value("denominator_margin", 0.0);
        f.report_.n_train = r.value("n_train", 0);
        f.report_.n_validation = r.value("n_validation", 0);
        f.report_.n_coefficients = r.value("n_coefficients", 0);
        f.report_.options.basis_degree = r.value("basis_degree", 2);
        f.report_.options.rho_degree = r.value("rho_degree", 2);
        f.report_.options.op_degree_in_x = r.value("op_degree_in_x", 1);
        f.report_.options.ridge = r.value("ridge", 0.0);
        f.report_.options.seed = r.value("seed", std::uint64_t{0});
    }
    return f;
}

}  // namespace ard
