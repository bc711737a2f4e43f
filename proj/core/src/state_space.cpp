#include "ardcore/state_space.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace ard {

void StateSpaceModel::validate() const {
    const auto n = A.rows();
    require(A.cols() == n, ErrorCode::Input, "A must be square");
    require(B.rows() == n, ErrorCode::Input, "B row count must match A");
    require(C.cols() == n, ErrorCode::Input, "C column count must match A");
    require(D.rows() == C.rows() || C.rows() == 0, ErrorCode::Input,
            "D rows must match C rows");
    require(D.cols() == B.cols() || B.cols() == 0, ErrorCode::Input,
            "D cols must match B cols");
    if (D1.size() > 0) {
        require(D1.rows() == D.rows() && D1.cols() == D.cols(), ErrorCode::Input,
                "D1 shape must match D");
    }
}

Eigen::MatrixXcd StateSpaceModel::transfer(Complex s) const {
    Eigen::MatrixXcd g = D.cast<Complex>();
    if (D1.size() > 0) g += s * D1.cast<Complex>();
    const int n = n_states();
    if (n > 0 && B.cols() > 0 && C.rows() > 0) {
        Eigen::MatrixXcd resolvent_arg =
            s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(resolvent_arg);
        g += C.cast<Complex>() * lu.solve(B.cast<Complex>());
    }
    return g;
}

Eigen::VectorXcd StateSpaceModel::eigenvalues() const {
    if (n_states() == 0) return Eigen::VectorXcd();
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues();
}

TimeSeries linear_response(const StateSpaceModel& model, const Eigen::VectorXd& x0,
                           double t_end, double dt) {
    require(dt > 0.0 && t_end >= dt, ErrorCode::Input,
            "linear_response: need dt > 0 and t_end >= dt");
    require(x0.size() == model.n_states(), ErrorCode::Input,
            "linear_response: initial state dimension mismatch");

    const auto n_steps = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
    Eigen::MatrixXd phi = (model.A * dt).exp();

    TimeSeries out;
    out.dt = dt;
    out.t.resize(n_steps);
    out.outputs.resize(model.C.rows(), static_cast<Eigen::Index>(n_steps));

    Eigen::VectorXd x = x0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        out.t[k] = static_cast<double>(k) * dt;
        out.outputs.col(static_cast<Eigen::Index>(k)) = model.C * x;
        x = phi * x;
    }
    return out;
}

}  // namespace ard
