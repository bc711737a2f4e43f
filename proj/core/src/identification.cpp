#include "ardcore/identification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace ard {

namespace {

constexpr double kHankelSvThreshold = 1e-8;

std::array<std::pair<int, int>, 4> entry_indices() {
    return {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
}

}  // namespace

void TransientRecord::validate() const {
    require(dt > 0.0, ErrorCode::Input, "transient record needs dt > 0");
    require(inputs.size() == outputs.size(), ErrorCode::Input,
            "transient record input/output length mismatch");
    require(inputs.size() >= 32, ErrorCode::Input,
            "transient record needs at least 32 samples");
    require(experiment_id == 1 || experiment_id == 2, ErrorCode::Input,
            "experiment_id must be 1 or 2");
}

StateSpaceModel era_identify(const TransientRecord& rec1, const TransientRecord& rec2,
                             const EraOrder& order) {
    rec1.validate();
    rec2.validate();
    require(rec1.dt == rec2.dt, ErrorCode::Input, "records have mismatched dt");

    const std::size_t n_samples = std::min(rec1.inputs.size(), rec2.inputs.size());

    // Impulse-form check: input energy only at the first sample.
    for (const TransientRecord* rec : {&rec1, &rec2}) {
        for (std::size_t k = 1; k < rec->inputs.size(); ++k) {
            require(rec->inputs[k].norm() == 0.0, ErrorCode::Input,
                    "era_identify expects impulse-form records (input only at t=0)");
        }
    }

    Eigen::Matrix2d u0;
    u0.col(0) = rec1.inputs[0];
    u0.col(1) = rec2.inputs[0];
    require(std::abs(u0.determinant()) > 1e-12 * u0.norm() * u0.norm(),
            ErrorCode::Input, "records need linearly independent input directions");
    const Eigen::Matrix2d u0_inv = u0.inverse();

    // Markov parameters Y_k = [y1_k y2_k] U0^{-1}.
    std::vector<Eigen::Matrix2d> markov(n_samples);
    double total = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        Eigen::Matrix2d yk;
        yk.col(0) = rec1.outputs[k];
        yk.col(1) = rec2.outputs[k];
        markov[k] = yk * u0_inv;
        total += markov[k].norm();
    }
    require(total > 0.0, ErrorCode::Unidentifiable, "zero-output records");

    const int max_blocks = 120;
    const int r = std::min<int>(max_blocks, static_cast<int>((n_samples - 2) / 2));
    const int c = r;
    require(r >= 2, ErrorCode::Input, "records too short for Hankel assembly");

    Eigen::MatrixXd h0(2 * r, 2 * c), h1(2 * r, 2 * c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            h0.block(2 * i, 2 * j, 2, 2) = markov[static_cast<std::size_t>(i + j + 1)];
            h1.block(2 * i, 2 * j, 2, 2) = markov[static_cast<std::size_t>(i + j + 2)];
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(h0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    require(sv.size() > 0 && sv(0) > 0.0, ErrorCode::Unidentifiable,
            "rank-deficient Hankel matrix");

    int n;
    if (order.order > 0) {
        n = order.order;
        require(n <= sv.size(), ErrorCode::Input, "requested ERA order exceeds Hankel rank bound");
    } else {
        n = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) / sv(0) > kHankelSvThreshold) ++n;
        }
        n = std::min(n, order.max_order);
        require(n > 0, ErrorCode::Unidentifiable, "all Hankel singular values below threshold");
    }

    const Eigen::MatrixXd u1 = svd.matrixU().leftCols(n);
    const Eigen::MatrixXd v1 = svd.matrixV().leftCols(n);
    const Eigen::VectorXd s_half = sv.head(n).cwiseSqrt();
    const Eigen::VectorXd s_half_inv = s_half.cwiseInverse();

    const Eigen::MatrixXd a_d =
        s_half_inv.asDiagonal() * u1.transpose() * h1 * v1 * s_half_inv.asDiagonal();
    const Eigen::MatrixXd b_d = (s_half.asDiagonal() * v1.transpose()).leftCols(2);
    const Eigen::MatrixXd c_d = (u1 * s_half.asDiagonal()).topRows(2);

    // Continuous-time conversion: A = log(A_d)/dt via eigendecomposition,
    // B = A_d^{-1} B_d (the Markov sequence samples C e^{A k dt} B).
    Eigen::EigenSolver<Eigen::MatrixXd> es(a_d);
    Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::MatrixXcd w = es.eigenvectors();
    Eigen::VectorXcd log_lam(n), inv_lam(n);
    for (int i = 0; i < n; ++i) {
        Complex li = lam(i);
        if (std::abs(li) < 1e-12) li = Complex(1e-12, 0.0);
        log_lam(i) = std::log(li) / rec1.dt;
        inv_lam(i) = 1.0 / li;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXcd> w_lu(w);
    const Eigen::MatrixXd a_c =
        (w * log_lam.asDiagonal() * w_lu.solve(Eigen::MatrixXcd::Identity(n, n))).real();
    const Eigen::MatrixXd ad_inv =
        (w * inv_lam.asDiagonal() * w_lu.solve(Eigen::MatrixXcd::Identity(n, n))).real();

    StateSpaceModel model;
    model.A = a_c;
    model.B = ad_inv * b_d;
    model.C = c_d;
    model.D = markov[0];
    model.input_labels = {"d_id", "d_iq"};
    model.output_labels = {"d_vd", "d_vq"};
    require(model.A.allFinite() && model.B.allFinite(), ErrorCode::NumericalConditioning,
            "ERA produced non-finite realization");
    return model;
}

DqMatrix PoleResidueModel::evaluate(Complex s) const {
    DqMatrix y = feedthrough;
    if (linear) y += s * (*linear);
    for (std::size_t k = 0; k < poles.size(); ++k) {
        y += residues[k] / (s - poles[k]);
    }
    return y;
}

ImpedanceSpectrum PoleResidueModel::spectrum(const FrequencyGrid& grid) const {
    std::vector<DqMatrix> values;
    values.reserve(grid.size());
    for (double w : grid.points()) values.push_back(evaluate(Complex(0.0, w)));
    return ImpedanceSpectrum(grid, std::move(values));
}

void PoleResidueModel::validate() const {
    require(poles.size() == residues.size(), ErrorCode::Input,
            "pole/residue count mismatch");
    for (std::size_t k = 0; k < poles.size(); ++k) {
        if (std::abs(poles[k].imag()) < 1e-12 * std::abs(poles[k])) continue;
        bool found = false;
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (j == k) continue;
            const double scale = std::max(1.0, std::abs(poles[k]));
            if (std::abs(poles[j] - std::conj(poles[k])) < 1e-6 * scale &&
                (residues[j] - residues[k].conjugate()).norm() <=
                    1e-6 * (residues[k].norm() + 1e-300)) {
                found = true;
                break;
            }
        }
        require(found, ErrorCode::Input, "complex pole without conjugate partner");
    }
}

ImpedanceSpectrum assemble_admittance(const ImpedanceSpectrum& z_inv,
                                      const ImpedanceSpectrum& z_g) {
    require(z_inv.grid == z_g.grid, ErrorCode::Input,
            "assemble_admittance requires identical grids");
    std::vector<DqMatrix> values;
    values.reserve(z_inv.grid.size());
    for (std::size_t i = 0; i < z_inv.grid.size(); ++i) {
        const DqMatrix sum = z_inv.values[i] + z_g.values[i];
        Eigen::JacobiSVD<DqMatrix> svd(sum);
        const double smin = svd.singularValues()(1);
        const double smax = svd.singularValues()(0);
        if (smin <= 0.0 || smax / smin > 1e12) {
            std::ostringstream msg;
            msg << "near-resonance: Z_inv + Z_g is singular at omega = "
                << z_inv.grid[i] << " rad/s";
            throw Error(ErrorCode::NearResonance, msg.str());
        }
        values.push_back(sum.inverse());
    }
    return ImpedanceSpectrum(z_inv.grid, std::move(values));
}

namespace {

// Pole bookkeeping for the real-arithmetic vector-fitting formulation:
// a real pole contributes one basis column, a conjugate pair two.
struct PoleGroups {
    std::vector<double> real_poles;
    std::vector<Complex> pairs;  // Im > 0 representatives

    int n_cols() const {
        return static_cast<int>(real_poles.size() + 2 * pairs.size());
    }
};

PoleGroups group_poles(const std::vector<Complex>& poles) {
    PoleGroups g;
    for (const Complex& p : poles) {
        if (std::abs(p.imag()) < 1e-9 * std::max(1.0, std::abs(p))) {
            g.real_poles.push_back(p.real());
        } else if (p.imag() > 0.0) {
            g.pairs.push_back(p);
        }
    }
    return g;
}

// Basis row phi(s): real pole -> 1/(s-p); pair -> {1/(s-p)+1/(s-pb),
// j/(s-p)-j/(s-pb)} so that real coefficients (a,b) represent the residue
// a+jb of the Im>0 pole.
void fill_basis_row(const PoleGroups& g, Complex s, Eigen::RowVectorXcd& row) {
    int col = 0;
    for (double p : g.real_poles) {
        row(col++) = 1.0 / (s - Complex(p, 0.0));
    }
    const Complex j(0.0, 1.0);
    for (const Complex& p : g.pairs) {
        const Complex f1 = 1.0 / (s - p);
        const Complex f2 = 1.0 / (s - std::conj(p));
        row(col++) = f1 + f2;
        row(col++) = j * (f1 - f2);
    }
}

std::vector<Complex> relocate_poles(const PoleGroups& g, const Eigen::VectorXd& sigma_coef,
                                    bool flip_unstable) {
    const int n = g.n_cols();
    Eigen::MatrixXd ap = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    int col = 0;
    for (double p : g.real_poles) {
        ap(col, col) = p;
        b(col) = 1.0;
        ++col;
    }
    for (const Complex& p : g.pairs) {
        ap(col, col) = p.real();
        ap(col, col + 1) = p.imag();
        ap(col + 1, col) = -p.imag();
        ap(col + 1, col + 1) = p.real();
        b(col) = 2.0;
        col += 2;
    }
    const Eigen::MatrixXd zeros_matrix = ap - b * sigma_coef.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> es(zeros_matrix, /*computeEigenvectors=*/false);
    std::vector<Complex> poles;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        Complex p = es.eigenvalues()(i);
        if (flip_unstable && p.real() > 0.0) p = Complex(-p.real(), p.imag());
        poles.push_back(p);
    }
    return poles;
}

struct ResidueFit {
    PoleResidueModel model;
    double rel_rms = 0.0;
};

// Linear least squares for residues/feedthrough with the pole set fixed.
ResidueFit fit_residues(const ImpedanceSpectrum& y, const PoleGroups& g,
                        bool include_linear) {
    const std::size_t n_s = y.grid.size();
    const int n_cols = g.n_cols();
    const int extra = include_linear ? 2 : 1;  // d (and h)
    const int cols = n_cols + extra;

    const auto entries = entry_indices();
    ResidueFit out;
    out.model.poles.clear();

    Eigen::MatrixXcd phi(n_s, n_cols);
    for (std::size_t i = 0; i < n_s; ++i) {
        Eigen::RowVectorXcd row(n_cols);
        fill_basis_row(g, Complex(0.0, y.grid[i]), row);
        phi.row(static_cast<Eigen::Index>(i)) = row;
    }

    // Shared real design matrix (stacked Re/Im rows).
    Eigen::MatrixXd a(2 * n_s, cols);
    for (std::size_t i = 0; i < n_s; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        a.row(2 * ei).head(n_cols) = phi.row(ei).real();
        a.row(2 * ei + 1).head(n_cols) = phi.row(ei).imag();
        a(2 * ei, n_cols) = 1.0;
        a(2 * ei + 1, n_cols) = 0.0;
        if (include_linear) {
            a(2 * ei, n_cols + 1) = 0.0;
            a(2 * ei + 1, n_cols + 1) = y.grid[i];
        }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);

    std::vector<Eigen::VectorXd> solutions(4);
    double err2 = 0.0;
    double ref2 = 0.0;
    for (int e = 0; e < 4; ++e) {
        Eigen::VectorXd rhs(2 * n_s);
        for (std::size_t i = 0; i < n_s; ++i) {
            const Complex val = y.values[i](entries[static_cast<std::size_t>(e)].first,
                                            entries[static_cast<std::size_t>(e)].second);
            rhs(2 * static_cast<Eigen::Index>(i)) = val.real();
            rhs(2 * static_cast<Eigen::Index>(i) + 1) = val.imag();
            ref2 += std::norm(val);
        }
        solutions[static_cast<std::size_t>(e)] = qr.solve(rhs);
        require(solutions[static_cast<std::size_t>(e)].allFinite(),
                ErrorCode::NumericalConditioning, "ill-conditioned residue least squares");
        err2 += (a * solutions[static_cast<std::size_t>(e)] - rhs).squaredNorm();
    }

    // Assemble the pole-residue model with conjugates expanded.
    PoleResidueModel m;
    int col = 0;
    for (double p : g.real_poles) {
        DqMatrix res;
        for (int e = 0; e < 4; ++e) {
            const auto [r_i, c_i] = entries[static_cast<std::size_t>(e)];
            res(r_i, c_i) = Complex(solutions[static_cast<std::size_t>(e)](col), 0.0);
        }
        m.poles.push_back(Complex(p, 0.0));
        m.residues.push_back(res);
        ++col;
    }
    for (const Complex& p : g.pairs) {
        DqMatrix res;
        for (int e = 0; e < 4; ++e) {
            const auto [r_i, c_i] = entries[static_cast<std::size_t>(e)];
            res(r_i, c_i) = Complex(solutions[static_cast<std::size_t>(e)](col),
                                    solutions[static_cast<std::size_t>(e)](col + 1));
        }
        m.poles.push_back(p);
        m.residues.push_back(res);
        m.poles.push_back(std::conj(p));
        m.residues.push_back(res.conjugate());
        col += 2;
    }
    for (int e = 0; e < 4; ++e) {
        const auto [r_i, c_i] = entries[static_cast<std::size_t>(e)];
        m.feedthrough(r_i, c_i) = Complex(solutions[static_cast<std::size_t>(e)](n_cols), 0.0);
        if (include_linear) {
            if (!m.linear) m.linear = DqMatrix::Zero();
            (*m.linear)(r_i, c_i) =
                Complex(solutions[static_cast<std::size_t>(e)](n_cols + 1), 0.0);
        }
    }

    out.model = std::move(m);
    out.rel_rms = ref2 > 0.0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
    return out;
}

}  // namespace

PoleResidueModel vector_fit(const ImpedanceSpectrum& y, int n_poles,
                            const VectorFitOptions& options) {
    require(n_poles > 0 && n_poles % 2 == 0, ErrorCode::Input,
            "n_poles must be a positive even integer");
    require(static_cast<std::size_t>(n_poles) <= 2 * y.grid.size() / 4, ErrorCode::Input,
            "n_poles too large for the sample count");

    // Starting poles: conjugate pairs log-spaced over the band, Re = -Im/100.
    std::vector<Complex> poles;
    {
        const int n_pairs = n_poles / 2;
        const double lo = std::log(y.grid.low());
        const double hi = std::log(y.grid.high());
        for (int k = 0; k < n_pairs; ++k) {
            const double frac = n_pairs == 1 ? 0.5 : static_cast<double>(k) / (n_pairs - 1);
            const double beta = std::exp(lo + (hi - lo) * frac);
            poles.push_back(Complex(-beta / 100.0, beta));
            poles.push_back(Complex(-beta / 100.0, -beta));
        }
    }

    const std::size_t n_s = y.grid.size();
    const auto entries = entry_indices();

    ResidueFit best;
    best.rel_rms = std::numeric_limits<double>::infinity();
    double prev_rms = std::numeric_limits<double>::infinity();
    int iterations_done = 0;

    for (int iter = 0; iter < options.n_iter; ++iter) {
        PoleGroups g = group_poles(poles);
        const int n_cols = g.n_cols();
        const int per_entry = n_cols + (options.include_linear_term ? 2 : 1);
        const int total_cols = 4 * per_entry + n_cols;

        Eigen::MatrixXcd phi(n_s, n_cols);
        for (std::size_t i = 0; i < n_s; ++i) {
            Eigen::RowVectorXcd row(n_cols);
            fill_basis_row(g, Complex(0.0, y.grid[i]), row);
            phi.row(static_cast<Eigen::Index>(i)) = row;
        }

        // Sigma-augmented system: per entry e,
        //   sum_k c_{e,k} phi_k + d_e (+ s h_e) - F_e sum_k ct_k phi_k = F_e.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8 * n_s, total_cols);
        Eigen::VectorXd rhs(8 * n_s);
        for (int e = 0; e < 4; ++e) {
            const auto [r_i, c_i] = entries[static_cast<std::size_t>(e)];
            const int col0 = e * per_entry;
            for (std::size_t i = 0; i < n_s; ++i) {
                const auto ei = static_cast<Eigen::Index>(i);
                const Eigen::Index row_re = 2 * (e * static_cast<Eigen::Index>(n_s) + ei);
                const Eigen::Index row_im = row_re + 1;
                const Complex f = y.values[i](r_i, c_i);
                a.row(row_re).segment(col0, n_cols) = phi.row(ei).real();
                a.row(row_im).segment(col0, n_cols) = phi.row(ei).imag();
                a(row_re, col0 + n_cols) = 1.0;
                if (options.include_linear_term) {
                    a(row_im, col0 + n_cols + 1) = y.grid[i];
                }
                const Eigen::RowVectorXcd sigma_cols = -f * phi.row(ei);
                a.row(row_re).tail(n_cols) = sigma_cols.real();
                a.row(row_im).tail(n_cols) = sigma_cols.imag();
                rhs(row_re) = f.real();
                rhs(row_im) = f.imag();
            }
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::VectorXd sol = qr.solve(rhs);
        require(sol.allFinite(), ErrorCode::NumericalConditioning,
                "ill-conditioned vector-fitting least squares");

        const Eigen::VectorXd sigma_coef = sol.tail(n_cols);
        poles = relocate_poles(g, sigma_coef, options.flip_unstable);

        ResidueFit fit = fit_residues(y, group_poles(poles), options.include_linear_term);
        iterations_done = iter + 1;
        if (fit.rel_rms < best.rel_rms) best = fit;
        if (prev_rms - fit.rel_rms < options.improvement_tol &&
            std::isfinite(prev_rms)) {
            break;
        }
        prev_rms = fit.rel_rms;
    }

    best.model.fit_rel_rms = best.rel_rms;
    best.model.poor_fit = best.rel_rms > options.poor_fit_threshold;
    best.model.iterations = iterations_done;
    return best.model;
}

std::vector<Mode> select_critical_modes(const PoleResidueModel& m, const BandHz& band,
                                        int top_k) {
    require(top_k > 0, ErrorCode::Input, "top_k must be positive");
    // Over-ordered fits carry spurious poles with vanishing residues; they
    // are not physical modes and are dropped before ranking.
    double max_residue = 0.0;
    for (const auto& r : m.residues) max_residue = std::max(max_residue, r.norm());
    std::vector<Mode> modes;
    for (std::size_t k = 0; k < m.poles.size(); ++k) {
        const Complex p = m.poles[k];
        if (p.imag() <= 2.0 * M_PI * band.low) continue;
        const double f_hz = p.imag() / (2.0 * M_PI);
        if (f_hz > band.high) continue;
        if (m.residues[k].norm() < 1e-8 * max_residue) continue;
        Mode mode;
        mode.lambda0 = p;
        mode.frequency_hz = f_hz;
        mode.damping_ratio = -p.real() / std::abs(p);
        mode.participation = participation_factor(m, p);
        modes.push_back(mode);
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.lambda0.real() != b.lambda0.real()) return a.lambda0.real() > b.lambda0.real();
        return a.frequency_hz < b.frequency_hz;
    });
    if (static_cast<int>(modes.size()) > top_k) modes.resize(static_cast<std::size_t>(top_k));
    return modes;
}

ParticipationFactor participation_factor(const PoleResidueModel& m, Complex lambda0) {
    for (std::size_t k = 0; k < m.poles.size(); ++k) {
        const double scale = std::max(1.0, std::abs(lambda0));
        if (std::abs(m.poles[k] - lambda0) <= 1e-6 * scale) {
            ParticipationFactor pf;
            pf.P = -m.residues[k].transpose();
            require(pf.P.allFinite() && pf.P.norm() > 0.0, ErrorCode::Input,
                    "degenerate participation factor");
            return pf;
        }
    }
    throw Error(ErrorCode::UnknownMode, "lambda0 does not match any pole of the model");
}

}  // namespace ard
