#include "ardcore/demo.hpp"

#include <cmath>

namespace ard {

namespace {

constexpr double kSBase = 1e6;   // VA
constexpr double kVBase = 690.0;  // V

ParameterVector standard_unit_params() {
    ParameterVector v;
    v.xop = OperatingPoint{8e5, 1e5, kVBase};
    v.rho = ControlParams{800.0, 5000.0, 1e-4, 0.05, 0.02, 2e-4};
    return v;
}

IbrUnit make_unit(const std::string& bus, const ParameterVector& params) {
    IbrUnit u;
    u.bus = bus;
    u.params = params;
    u.filter = FilterParams{0.002, 1e-4};
    u.P_rated = kSBase;
    return u;
}

void apply_common_settings(RunConfig& cfg) {
    cfg.system.omega0 = 2.0 * M_PI * 60.0;
    cfg.system.base = PerUnitBase{kSBase, kVBase};
    cfg.grid = FrequencyGrid::default_band();
    cfg.assess.grid = cfg.grid;

    cfg.attack.xop_dev_pu = {0.2, 0.2, 0.03};
    // J, Dp, Kq, tau_q, Rv, Lv
    cfg.attack.rho_rel_dev = {0.4, 0.4, 0.4, 0.4, 1.2, 0.3};
    cfg.attack.attackable.fill(true);

    cfg.stealth.eps1 = 0.25;
    cfg.stealth.eps2 = 1.2;
    cfg.stealth.base = cfg.system.base;

    cfg.assess.n_samples = 2000;
    cfg.assess.n_directions = 16;
    cfg.assess.n_poles = 8;
    cfg.assess.band = BandHz{1.0, 200.0};
    cfg.assess.top_k = 2;
    cfg.assess.grid_resolution = 200;
    cfg.assess.participation_gamma = 0.1;
    cfg.assess.seed = 42;
    cfg.assess.ard_seed = 1337;
}

}  // namespace

RunConfig demo_two_bus_config() {
    RunConfig cfg;
    apply_common_settings(cfg);

    cfg.system.buses = {{"B1", BusType::Slack}, {"B2", BusType::Ibr}};
    cfg.system.branches = {{"B1", "B2", 0.005, 2e-4}};
    cfg.system.ibr_units = {make_unit("B2", standard_unit_params())};
    cfg.targets = {"B2"};

    cfg.assess.surrogate_mode = AssessOptions::SurrogateMode::WhiteboxOracle;
    cfg.output_dir = "out/two_bus";
    cfg.validate();
    return cfg;
}

RunConfig demo_four_bus_config() {
    RunConfig cfg;
    apply_common_settings(cfg);

    cfg.system.buses = {{"B1", BusType::Slack},
                        {"B2", BusType::Passive},
                        {"B3", BusType::Ibr},
                        {"B4", BusType::Ibr}};
    cfg.system.branches = {{"B1", "B2", 0.004, 1.5e-4},
                           {"B2", "B3", 0.004, 2e-4},
                           {"B2", "B4", 0.006, 3e-4}};
    cfg.system.shunts = {{"B2", 20.0, 0.01, 0.0}};

    ParameterVector other = standard_unit_params();
    other.xop.P0 = 6e5;
    other.rho.J = 600.0;
    other.rho.Dp = 4000.0;
    other.rho.Rv = 0.015;
    cfg.system.ibr_units = {make_unit("B3", standard_unit_params()),
                            make_unit("B4", other)};
    cfg.targets = {"B3"};

    cfg.assess.surrogate_mode = AssessOptions::SurrogateMode::RationalFit;
    // Surrogate training wants a linearly spaced band: the affine frequency
    // normalization otherwise crams the log grid's low-frequency decades
    // into one corner of the basis domain.
    cfg.grid = FrequencyGrid::linear_spaced(2.0 * M_PI * 1.0, 2.0 * M_PI * 200.0, 240);
    cfg.grid_spacing = "linear";
    cfg.assess.grid = cfg.grid;
    cfg.assess.dataset_size = 320;
    cfg.assess.dataset.mode = DatasetMode::ViaEra;
    cfg.assess.fit.basis_degree = 3;
    cfg.assess.fit.rho_degree = 1;
    cfg.assess.fit.ridge = 1e-6;
    cfg.assess.fit.fit_grid_stride = 4;
    cfg.output_dir = "out/four_bus";
    cfg.validate();
    return cfg;
}

RunConfig demo_multibus_config() {
    RunConfig cfg;
    apply_common_settings(cfg);

    cfg.system.buses = {{"B1", BusType::Slack}, {"B2", BusType::Passive},
                        {"B3", BusType::Ibr},   {"B4", BusType::Passive},
                        {"B5", BusType::Ibr},   {"B6", BusType::Ibr},
                        {"B7", BusType::Ibr}};
    cfg.system.branches = {{"B1", "B2", 0.003, 1e-4},  {"B2", "B3", 0.004, 1.5e-4},
                           {"B2", "B4", 0.008, 4e-4},  {"B4", "B5", 0.004, 2e-4},
                           {"B4", "B6", 0.010, 5e-4},  {"B6", "B7", 0.008, 4e-4}};
    cfg.system.shunts = {{"B2", 25.0, 0.01, 0.0}, {"B4", 30.0, 0.012, 0.0}};

    // B3 is electrically close to the slack (high SCR) but carries the most
    // aggressive control tuning, so its penetration index ends up out of
    // line with the nominal-strength ordering.
    ParameterVector strong_grid_weak_control = standard_unit_params();
    strong_grid_weak_control.rho.Dp = 2500.0;
    strong_grid_weak_control.rho.Rv = 0.012;

    ParameterVector mid = standard_unit_params();
    mid.xop.P0 = 7e5;

    ParameterVector conservative = standard_unit_params();
    conservative.rho.Dp = 7000.0;
    conservative.rho.Rv = 0.03;
    conservative.xop.P0 = 5e5;

    ParameterVector far_bus = standard_unit_params();
    far_bus.rho.Dp = 6500.0;
    far_bus.rho.Rv = 0.028;
    far_bus.xop.P0 = 4e5;

    cfg.system.ibr_units = {make_unit("B3", strong_grid_weak_control),
                            make_unit("B5", mid), make_unit("B6", conservative),
                            make_unit("B7", far_bus)};
    cfg.targets = {"B3", "B5", "B6", "B7"};

    cfg.assess.surrogate_mode = AssessOptions::SurrogateMode::WhiteboxOracle;
    cfg.assess.n_samples = 600;
    cfg.assess.n_directions = 8;
    cfg.output_dir = "out/multibus";
    cfg.validate();
    return cfg;
}

}  // namespace ard
