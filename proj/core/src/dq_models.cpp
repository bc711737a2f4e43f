#include "ardcore/dq_models.hpp"

#include <cmath>

namespace ard {

namespace {

Eigen::Matrix2d coupling_impedance(double r, double l, double omega0) {
    Eigen::Matrix2d z;
    z << r, -omega0 * l, omega0 * l, r;
    return z;
}

struct PQ {
    double P;
    double Q;
};

// Terminal power for a candidate EMF (delta, E) with the terminal voltage
// pinned at (V0, 0). Current is positive from inverter to grid.
PQ terminal_power(double delta, double e_mag, double v0, const Eigen::Matrix2d& zc) {
    Eigen::Vector2d e(e_mag * std::cos(delta), e_mag * std::sin(delta));
    Eigen::Vector2d v(v0, 0.0);
    Eigen::Vector2d i = zc.partialPivLu().solve(e - v);
    return {v0 * i(0), -v0 * i(1)};
}

}  // namespace

VsgSteadyState solve_vsg_steady_state(const ParameterVector& v, const FilterParams& filter,
                                      double omega0) {
    v.validate();
    require(filter.Lf > 0.0, ErrorCode::Input, "Lf must be > 0");
    require(filter.Rf >= 0.0, ErrorCode::Input, "Rf must be >= 0");
    require(omega0 > 0.0, ErrorCode::Input, "omega0 must be > 0");

    const double rc = v.rho.Rv + filter.Rf;
    const double lc = v.rho.Lv + filter.Lf;
    const Eigen::Matrix2d zc = coupling_impedance(rc, lc, omega0);
    require(std::abs(zc.determinant()) > 1e-300, ErrorCode::DegenerateModel,
            "series branch impedance is singular");

    const double v0 = v.xop.V0;
    const double s_ref =
        std::max({v0 * v0 / zc.norm(), std::abs(v.xop.P0), std::abs(v.xop.Q0)});

    // Damped Newton on (delta0, E0); per-unit mismatch tolerance 1e-10.
    double delta = 0.0;
    double e_mag = v0;
    const double tol = 1e-10;
    const int max_iter = 50;
    bool converged = false;
    auto mismatch = [&](double d, double e) -> Eigen::Vector2d {
        PQ pq = terminal_power(d, e, v0, zc);
        return Eigen::Vector2d((pq.P - v.xop.P0) / s_ref, (pq.Q - v.xop.Q0) / s_ref);
    };
    Eigen::Vector2d r = mismatch(delta, e_mag);
    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() < tol) {
            converged = true;
            break;
        }
        const double hd = 1e-7;
        const double he = 1e-7 * std::max(1.0, std::abs(e_mag));
        Eigen::Matrix2d jac;
        jac.col(0) = (mismatch(delta + hd, e_mag) - mismatch(delta - hd, e_mag)) / (2 * hd);
        jac.col(1) = (mismatch(delta, e_mag + he) - mismatch(delta, e_mag - he)) / (2 * he);
        require(std::isfinite(jac.determinant()) && std::abs(jac.determinant()) > 1e-300,
                ErrorCode::DegenerateModel, "singular power-flow Jacobian");
        Eigen::Vector2d step = jac.partialPivLu().solve(-r);
        double damping = 1.0;
        for (int half = 0; half < 30; ++half) {
            Eigen::Vector2d r_new = mismatch(delta + damping * step(0), e_mag + damping * step(1));
            if (r_new.norm() < r.norm() || r_new.norm() < tol) {
                delta += damping * step(0);
                e_mag += damping * step(1);
                r = r_new;
                break;
            }
            damping *= 0.5;
            if (half == 29) {
                throw Error(ErrorCode::InfeasibleOperatingPoint,
                            "steady-state Newton stalled; operating point infeasible");
            }
        }
    }
    if (!converged && r.norm() >= tol) {
        throw Error(ErrorCode::InfeasibleOperatingPoint,
                    "no steady-state solution within solver tolerance");
    }

    Eigen::Vector2d e(e_mag * std::cos(delta), e_mag * std::sin(delta));
    Eigen::Vector2d i = zc.partialPivLu().solve(e - Eigen::Vector2d(v0, 0.0));
    VsgSteadyState ss;
    ss.delta0 = delta;
    ss.E0 = e_mag;
    ss.I0d = i(0);
    ss.I0q = i(1);
    return ss;
}

StateSpaceModel build_vsg_state_space(const ParameterVector& v, const FilterParams& filter,
                                      double omega0) {
    const VsgSteadyState ss = solve_vsg_steady_state(v, filter, omega0);

    const double rc = v.rho.Rv + filter.Rf;
    const double lc = v.rho.Lv + filter.Lf;
    const Eigen::Matrix2d zc = coupling_impedance(rc, lc, omega0);

    const double sd = std::sin(ss.delta0);
    const double cd = std::cos(ss.delta0);

    // EMF sensitivity to [d_delta, d_E].
    Eigen::Matrix2d me;
    me << -ss.E0 * sd, cd, ss.E0 * cd, sd;

    Eigen::MatrixXd c_raw = Eigen::MatrixXd::Zero(2, 3);
    c_raw.col(0) = me.col(0);
    c_raw.col(2) = me.col(1);

    const Eigen::Vector2d m_p(ss.I0d, ss.I0q);
    const Eigen::Vector2d m_q(-ss.I0q, ss.I0d);
    const Eigen::Vector2d v_terminal(v.xop.V0, 0.0);
    const Eigen::Vector2d w_q(0.0, -v.xop.V0);

    const double inv_j = 1.0 / v.rho.J;
    const double kq_tau = v.rho.Kq / v.rho.tau_q;

    // Raw linearization with input u = terminal current into the inverter
    // (u = -i, with i the current delivered to the grid). The derivative
    // coupling B1 (from L_c du/dt inside the power terms) is folded away by
    // the state shift x' = x - B1 u.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a(0, 1) = 1.0;
    a.row(1) = -inv_j * (m_p.transpose() * c_raw);
    a(1, 1) += -v.rho.Dp * inv_j;
    a.row(2) = -kq_tau * (m_q.transpose() * c_raw);
    a(2, 2) += -1.0 / v.rho.tau_q;

    Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(3, 2);
    b0.row(1) = -inv_j * (m_p.transpose() * zc - v_terminal.transpose());
    b0.row(2) = -kq_tau * (m_q.transpose() * zc - w_q.transpose());

    Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(3, 2);
    b1.row(1) = -(lc * inv_j) * m_p.transpose();
    b1.row(2) = -(kq_tau * lc) * m_q.transpose();

    StateSpaceModel model;
    model.A = a;
    model.B = b0 + a * b1;
    model.C = c_raw;
    model.D = Eigen::MatrixXd(zc) + c_raw * b1;
    model.D1 = lc * Eigen::Matrix2d::Identity();
    model.state_labels = {"d_delta", "d_omega", "d_E"};
    model.input_labels = {"d_id", "d_iq"};
    model.output_labels = {"d_vd", "d_vq"};
    require(model.A.allFinite() && model.B.allFinite() && model.C.allFinite() &&
                model.D.allFinite(),
            ErrorCode::DegenerateModel, "non-finite linearization");
    return model;
}

DqMatrix evaluate_impedance(const StateSpaceModel& model, Complex s) {
    require(model.n_outputs() == 2 && model.n_inputs() == 2, ErrorCode::Input,
            "evaluate_impedance expects a 2x2 model");
    if (model.n_states() > 0) {
        const Eigen::VectorXcd eigs = model.eigenvalues();
        const double tol = 1e-9 * model.A.norm();
        for (Eigen::Index i = 0; i < eigs.size(); ++i) {
            if (std::abs(s - eigs(i)) < tol) {
                throw Error(ErrorCode::NearSingularEvaluation,
                            "evaluation frequency coincides with a model eigenvalue");
            }
        }
    }
    Eigen::MatrixXcd g = model.transfer(s);
    require(g.allFinite(), ErrorCode::NearSingularEvaluation,
            "non-finite impedance evaluation");
    return DqMatrix(g);
}

ImpedanceSpectrum grid_impedance_spectrum(const GridEquivalent& g, const FrequencyGrid& grid) {
    g.validate();
    std::vector<DqMatrix> values;
    values.reserve(grid.size());
    for (double w : grid.points()) {
        values.push_back(dq_rl_impedance(g.Rg, g.Lg, g.omega0, Complex(0.0, w)));
    }
    return ImpedanceSpectrum(grid, std::move(values));
}

StateSpaceModel grid_equivalent_state_space(const GridEquivalent& g) {
    g.validate();
    StateSpaceModel model;
    model.A = Eigen::MatrixXd::Zero(0, 0);
    model.B = Eigen::MatrixXd::Zero(0, 2);
    model.C = Eigen::MatrixXd::Zero(2, 0);
    model.D = coupling_impedance(g.Rg, g.Lg, g.omega0);
    model.D1 = g.Lg * Eigen::Matrix2d::Identity();
    model.input_labels = {"d_id", "d_iq"};
    model.output_labels = {"d_vd", "d_vq"};
    return model;
}

StateSpaceModel assemble_interconnection(const StateSpaceModel& inverter,
                                         const GridEquivalent& g,
                                         const Eigen::Matrix2d& extra_series) {
    g.validate();
    require(inverter.n_inputs() == 2 && inverter.n_outputs() == 2, ErrorCode::Input,
            "interconnection expects a 2x2 inverter model");

    Eigen::Matrix2d e_inv = Eigen::Matrix2d::Zero();
    if (inverter.D1.size() > 0) e_inv = inverter.D1;
    const Eigen::Matrix2d l_loop = e_inv + g.Lg * Eigen::Matrix2d::Identity();
    require(std::abs(l_loop.determinant()) > 1e-300, ErrorCode::Assembly,
            "algebraic loop: no series inductance in the interconnection");

    const Eigen::Matrix2d rg = coupling_impedance(g.Rg, g.Lg, g.omega0);
    const Eigen::Matrix2d d_total = inverter.D + extra_series + rg;
    const Eigen::Matrix2d l_inv = l_loop.inverse();

    const int n = inverter.n_states();
    StateSpaceModel closed;
    closed.A = Eigen::MatrixXd::Zero(n + 2, n + 2);
    if (n > 0) {
        closed.A.topLeftCorner(n, n) = inverter.A;
        closed.A.topRightCorner(n, 2) = inverter.B;
        closed.A.bottomLeftCorner(2, n) = -l_inv * inverter.C;
    }
    closed.A.bottomRightCorner(2, 2) = -l_inv * d_total;

    closed.B = Eigen::MatrixXd::Zero(n + 2, 0);
    // Outputs: loop current (into the inverter) and terminal voltage.
    closed.C = Eigen::MatrixXd::Zero(4, n + 2);
    closed.C.block(0, n, 2, 2) = Eigen::Matrix2d::Identity();
    if (n > 0) {
        closed.C.block(2, 0, 2, n) = g.Lg * l_inv * inverter.C;
    }
    closed.C.block(2, n, 2, 2) = -rg + g.Lg * l_inv * d_total;
    closed.D = Eigen::MatrixXd::Zero(4, 0);
    closed.state_labels = inverter.state_labels;
    closed.state_labels.push_back("d_id");
    closed.state_labels.push_back("d_iq");
    closed.output_labels = {"d_id", "d_iq", "d_vd", "d_vq"};
    return closed;
}

}  // namespace ard
