#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "ardcore/ard_engine.hpp"
#include "ardcore/network.hpp"

namespace ard {

/// Attack reach specification shared by every target bus: operating-point
/// deviations in per-unit (converted to absolute units via the system
/// bases), relative control-parameter deviations, and the privilege mask.
struct AttackSpec {
    std::array<double, 3> xop_dev_pu{};   // P0, Q0 (on S_base); V0 (on V_base)
    std::array<double, 6> rho_rel_dev{};  // J, Dp, Kq, tau_q, Rv, Lv
    std::array<bool, ParameterVector::kDim> attackable{};
};

/// One fully validated run description. All seeds are explicit in the file;
/// a config without them is rejected (no entropy defaults).
struct RunConfig {
    SystemDescription system;
    std::vector<std::string> targets;
    FrequencyGrid grid = FrequencyGrid::default_band();
    std::string grid_spacing = "log";
    AttackSpec attack;
    StealthModel stealth;
    AssessOptions assess;
    std::string output_dir = "out";

    /// Box around the target unit's nominal parameter vector.
    FeasibleAttackSet attack_set_for(const std::string& bus_id) const;

    void validate() const;

    static RunConfig from_json_string(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);

    /// Effective configuration (defaults resolved) as canonical JSON.
    std::string to_json_string() const;
};

}  // namespace ard
