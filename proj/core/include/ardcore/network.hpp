#pragma once

#include <string>
#include <vector>

#include "ardcore/ard_engine.hpp"
#include "ardcore/dq_models.hpp"
#include "ardcore/identification.hpp"
#include "ardcore/surrogate.hpp"
#include "ardcore/types.hpp"

namespace ard {

enum class BusType { Slack, Ibr, Passive };

struct Bus {
    std::string id;
    BusType type = BusType::Passive;
};

struct NetworkBranch {
    std::string from;
    std::string to;
    double R = 0.0;  // ohm
    double L = 0.0;  // H
};

/// Shunt element at a bus: a series RL path to ground (load) and/or a
/// capacitor, both optional.
struct Shunt {
    std::string bus;
    double R = 0.0;
    double L = 0.0;
    double C = 0.0;
};

struct IbrUnit {
    std::string bus;
    ParameterVector params;
    FilterParams filter;
    double P_rated = 0.0;  // W, used by the SCR proxy
};

struct SystemDescription {
    std::vector<Bus> buses;
    std::vector<NetworkBranch> branches;
    std::vector<Shunt> shunts;
    std::vector<IbrUnit> ibr_units;
    double omega0 = 2.0 * M_PI * 60.0;
    PerUnitBase base;

    int bus_index(const std::string& id) const;  // -1 when absent
    const Bus& bus(const std::string& id) const;
    const IbrUnit& ibr_at(const std::string& bus_id) const;
    void validate() const;
};

/// Nodal admittance at one complex frequency: 2x2 dq blocks over the
/// non-slack buses (the slack is an ideal source; its rows/columns are
/// eliminated while its branch admittances stay on the neighbor diagonals).
/// Non-target IBRs contribute their white-box admittance at nominal.
struct NodalAdmittance {
    Eigen::MatrixXcd Y;                  // 2n x 2n
    std::vector<std::string> bus_order;  // block index -> bus id
};

NodalAdmittance nodal_admittance(const SystemDescription& sys, Complex s,
                                 const std::string& exclude_ibr_bus = "");

struct TheveninEquivalent {
    std::string bus_id;
    ImpedanceSpectrum spectrum;
};

/// Grid-side impedance seen from an IBR bus with its own unit removed:
/// Kron reduction of the nodal admittance to the bus, inverted per grid
/// point.
TheveninEquivalent thevenin_at(const SystemDescription& sys, const std::string& bus_id,
                               const FrequencyGrid& grid);

/// Nominal-strength comparison column: (V_base^2 / ||Z_th(j omega0)||_2)
/// divided by the unit's rated power.
double scr_proxy(const SystemDescription& sys, const std::string& bus_id);

/// RL grid equivalent matched to the Thevenin block at the synchronous
/// frequency (used to build the interconnection oracle for a bus; exact for
/// purely RL grid sides).
GridEquivalent rl_grid_equivalent(const SystemDescription& sys, const std::string& bus_id);

struct AssessOptions {
    enum class SurrogateMode { WhiteboxOracle, RationalFit };

    FrequencyGrid grid = FrequencyGrid::default_band();
    SurrogateMode surrogate_mode = SurrogateMode::WhiteboxOracle;
    int dataset_size = 160;
    DatasetOptions dataset;
    SurrogateFitOptions fit;
    int n_poles = 8;
    VectorFitOptions vf;
    BandHz band;
    int top_k = 2;
    int n_samples = 2000;
    int n_directions = 16;  // 0 skips boundary tracing
    AscentConfig ascent;
    int grid_resolution = 200;
    double participation_gamma = 0.1;
    std::uint64_t seed = 1;      // dataset sampling / surrogate fit
    std::uint64_t ard_seed = 1;  // reachable-domain sampling / ascent starts
};

struct BusAssessment {
    BusApiReport report;
    TheveninEquivalent thevenin;
    PoleResidueModel y_sys_fit;
    std::vector<Mode> modes;
    std::vector<ArdCloud> clouds;  // one per retained mode
    double scr = 0.0;
};

/// End-to-end per-bus pipeline: Thevenin reduction, surrogate (fitted or
/// white-box oracle), system-admittance rational fit, critical-mode
/// selection, reachable-domain sampling and boundary tracing, penetration
/// index, bus-level aggregation. Stage failures rethrow with a stage label.
BusAssessment assess_bus(const SystemDescription& sys, const std::string& bus_id,
                         const FeasibleAttackSet& omega, const StealthModel& stealth,
                         const AssessOptions& options = AssessOptions());

}  // namespace ard
