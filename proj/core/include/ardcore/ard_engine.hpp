#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ardcore/identification.hpp"
#include "ardcore/surrogate.hpp"
#include "ardcore/types.hpp"

namespace ard {

/// The feasible attack set Omega: a per-coordinate box around the nominal
/// parameter vector, restricted to the coordinates the attacker can reach.
/// Non-attackable coordinates have a degenerate interval pinned at nominal.
struct FeasibleAttackSet {
    ParameterVector nominal;
    CoordinateBounds box;
    std::array<bool, ParameterVector::kDim> attackable{};

    /// Builds the box from deviation magnitudes: absolute deviations for the
    /// operating point (P0, Q0 in W/var; V0 in V) and relative fractions for
    /// the control parameters.
    static FeasibleAttackSet from_deviations(
        const ParameterVector& nominal, const std::array<double, 3>& xop_abs_dev,
        const std::array<double, 6>& rho_rel_dev,
        const std::array<bool, ParameterVector::kDim>& attackable);

    bool is_singleton() const;
    void validate() const;
};

/// Detector-evasion thresholds: a weighted Euclidean bound on per-unit
/// operating-point deviations (bad-data detection proxy) and a weighted
/// max-norm bound on relative control-parameter changes (per-parameter
/// intrusion-detection proxy).
struct StealthModel {
    Eigen::Vector3d bdd_weights = Eigen::Vector3d::Ones();
    double eps1 = 0.0;
    Eigen::Matrix<double, 6, 1> ids_weights = Eigen::Matrix<double, 6, 1>::Ones();
    double eps2 = 0.0;
    PerUnitBase base;

    static StealthModel unconstrained();

    void validate() const;
};

/// (d_bdd, d_ids) for a candidate attack point relative to nominal.
std::pair<double, double> stealth_distances(const ParameterVector& v,
                                            const ParameterVector& nominal,
                                            const StealthModel& s);

bool stealth_feasible(const ParameterVector& v, const ParameterVector& nominal,
                      const StealthModel& s, double slack = 1e-9);

/// Feasible-point projection onto box-and-stealth constraints by alternating
/// projections (box clamp, BDD radial scale, IDS coordinate clamp); converges
/// to a feasible point, not necessarily the Euclidean-nearest one.
ParameterVector project_feasible(const FeasibleAttackSet& omega, const StealthModel& s,
                                 const ParameterVector& v);

/// First-order eigenvalue drift: delta_lambda = sum_mn P_mn * dZ_mn, with dZ
/// the surrogate impedance change evaluated at the complex pole s = lambda0.
Complex drift(const ParameterVector& v_atk, const ParameterVector& nominal,
              const ImpedanceSurrogate& f, const Mode& mode);

struct ArdSample {
    ParameterVector v_atk;
    Complex delta_lambda{0.0, 0.0};
    Complex lambda{0.0, 0.0};  // lambda0 + delta_lambda
    bool stealth_ok = true;
};

/// The sampled attack reachable domain of one mode.
struct ArdCloud {
    Mode mode;
    std::vector<ArdSample> samples;   // stealth-feasible only; nominal included
    std::vector<ArdSample> boundary;  // directional support points, ordered by angle
    std::uint64_t seed = 0;
    int n_requested = 0;
    int n_rejected = 0;
};

/// Hybrid Latin-hypercube + uniform draw over the attack box with stealth
/// rejection. Errors if fewer than half of the draws are feasible.
ArdCloud sample_ard(const FeasibleAttackSet& omega, const StealthModel& s,
                    const ImpedanceSurrogate& f, const Mode& mode, int n,
                    std::uint64_t seed);

struct AscentConfig {
    double alpha = 0.05;  // step in box-normalized coordinates
    int max_iter = 200;
    int restarts = 8;  // nominal start + (restarts-1) seeded LHS starts
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

/// Projected gradient ascent maximizing Re(e^{-j phi} * delta_lambda);
/// phi = 0 gives the worst-case damping-erosion direction.
ArdSample boundary_ascent(const FeasibleAttackSet& omega, const StealthModel& s,
                          const ImpedanceSurrogate& f, const Mode& mode,
                          double direction_phi, const AscentConfig& cfg = AscentConfig());

/// boundary_ascent swept over phi = 2*pi*k/n_directions, ordered by phi.
std::vector<ArdSample> trace_boundary(const FeasibleAttackSet& omega, const StealthModel& s,
                                      const ImpedanceSurrogate& f, const Mode& mode,
                                      int n_directions, const AscentConfig& cfg = AscentConfig());

enum class ApiBranch { MarginErosion, ReachableInstability };

struct ApiResult {
    double value = 0.0;
    ApiBranch branch = ApiBranch::MarginErosion;
    double max_re_drift = 0.0;  // rad/s
    double unstable_fraction = 0.0;
    ArdSample worst_case;
};

/// Attack penetration index of one cloud: worst-case damping erosion
/// normalized by |Re(lambda0)| while the cloud stays stable, else one plus
/// the unstable occupancy-grid area fraction.
ApiResult compute_api(const ArdCloud& cloud, int grid_resolution = 200);

struct BusApiReport {
    std::string bus_id;
    std::vector<std::pair<Mode, ApiResult>> per_mode;
    std::vector<int> dominant_mode_set;  // indices into per_mode
    double bus_api = 0.0;
    int bus_api_mode_index = -1;
};

/// Bus-level aggregation: retain modes whose participation Frobenius norm is
/// at least gamma times the largest, take the maximum API over them; ties go
/// to the lowest mode frequency.
BusApiReport bus_report(const std::string& bus_id,
                        const std::vector<std::pair<Mode, ApiResult>>& modes,
                        double participation_threshold = 0.1);

}  // namespace ard
