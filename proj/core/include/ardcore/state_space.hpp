#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ardcore/types.hpp"

namespace ard {

/// Linear time-invariant model. The transfer function is
///   G(s) = C (sI - A)^{-1} B + D + s * D1
/// where D1 is an optional s-proportional feedthrough (zero for strictly
/// proper-plus-constant models). D1 is what carries the series-inductance
/// term of an impedance model whose input is a terminal current.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;
    Eigen::MatrixXd D1;

    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;

    int n_states() const { return static_cast<int>(A.rows()); }
    int n_inputs() const { return static_cast<int>(B.cols() > 0 ? B.cols() : D.cols()); }
    int n_outputs() const { return static_cast<int>(C.rows() > 0 ? C.rows() : D.rows()); }

    void validate() const;

    /// Evaluates C(sI-A)^{-1}B + D + s*D1.
    Eigen::MatrixXcd transfer(Complex s) const;

    Eigen::VectorXcd eigenvalues() const;
};

struct TimeSeries {
    double dt = 0.0;
    std::vector<double> t;
    Eigen::MatrixXd outputs;  // one column per time step
};

/// Fixed-step matrix-exponential propagation of the autonomous response
/// x_{k+1} = exp(A dt) x_k, y_k = C x_k.
TimeSeries linear_response(const StateSpaceModel& model, const Eigen::VectorXd& x0,
                           double t_end, double dt);

}  // namespace ard
