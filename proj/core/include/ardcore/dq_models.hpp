#pragma once

#include "ardcore/state_space.hpp"
#include "ardcore/types.hpp"

namespace ard {

struct FilterParams {
    double Rf = 0.0;  // ohm
    double Lf = 0.0;  // H
};

/// Steady state of the VSG series branch, solved so that the terminal
/// delivers (P0, Q0) at voltage magnitude V0 (terminal angle is the dq
/// reference). Currents are positive from inverter to grid.
struct VsgSteadyState {
    double delta0 = 0.0;
    double E0 = 0.0;
    double I0d = 0.0;
    double I0q = 0.0;
};

VsgSteadyState solve_vsg_steady_state(const ParameterVector& v, const FilterParams& filter,
                                      double omega0);

/// Linearized 3-state grid-forming VSG model: swing dynamics, first-order
/// reactive-droop voltage loop and an algebraic series (virtual + filter)
/// impedance. States [d_delta, d_omega, d_E]; input is the dq terminal
/// current (positive into the inverter terminal, so that the transfer
/// function is the output impedance Z_inv(s) seen at the PCC); output is
/// the dq terminal voltage.
StateSpaceModel build_vsg_state_space(const ParameterVector& v, const FilterParams& filter,
                                      double omega0);

/// Z(s) = C(sI-A)^{-1}B + D + s*D1 as a 2x2 dq matrix.
DqMatrix evaluate_impedance(const StateSpaceModel& model, Complex s);

/// Analytic grid-side RL impedance on a frequency grid.
ImpedanceSpectrum grid_impedance_spectrum(const GridEquivalent& g, const FrequencyGrid& grid);

/// Converts the RL grid equivalent to a state-space impedance model
/// (static D plus s-proportional D1).
StateSpaceModel grid_equivalent_state_space(const GridEquivalent& g);

/// Closed-loop autonomous model of the inverter in series with the grid RL
/// branch behind an ideal source. Its eigenvalues are the true system
/// modes; optional extra_series adds a constant 2x2 impedance in series
/// with the inverter terminal (used by perturbation oracles).
StateSpaceModel assemble_interconnection(const StateSpaceModel& inverter,
                                         const GridEquivalent& g,
                                         const Eigen::Matrix2d& extra_series =
                                             Eigen::Matrix2d::Zero());

}  // namespace ard
