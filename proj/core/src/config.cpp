#include "ardcore/config.hpp"

#include <cmath>

#include "ardcore/io.hpp"
#include "json.hpp"

namespace ard {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const json& field(const json& j, const char* key, const std::string& context) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError("missing required field '" + std::string(key) + "' in " + context);
    }
    return *it;
}

BusType bus_type_from_string(const std::string& s) {
    if (s == "slack") return BusType::Slack;
    if (s == "ibr") return BusType::Ibr;
    if (s == "passive") return BusType::Passive;
    throw ConfigError("unknown bus type '" + s + "'");
}

const char* bus_type_name(BusType t) {
    switch (t) {
        case BusType::Slack: return "slack";
        case BusType::Ibr: return "ibr";
        default: return "passive";
    }
}

ParameterVector params_from_json(const json& j) {
    ParameterVector v;
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        const std::string& name = ParameterVector::coordinate_names()[static_cast<std::size_t>(c)];
        v.set_coordinate(c, field(j, name.c_str(), "ibr params").get<double>());
    }
    return v;
}

SystemDescription system_from_json(const json& j) {
    SystemDescription sys;
    sys.omega0 = 2.0 * M_PI * field(j, "omega0_hz", "system").get<double>();
    sys.base.S_base = field(j, "s_base", "system").get<double>();
    sys.base.V_base = field(j, "v_base", "system").get<double>();
    for (const auto& jb : field(j, "buses", "system")) {
        sys.buses.push_back(Bus{field(jb, "id", "bus").get<std::string>(),
                                bus_type_from_string(field(jb, "type", "bus").get<std::string>())});
    }
    for (const auto& jb : field(j, "branches", "system")) {
        sys.branches.push_back(NetworkBranch{field(jb, "from", "branch").get<std::string>(),
                                             field(jb, "to", "branch").get<std::string>(),
                                             field(jb, "R", "branch").get<double>(),
                                             field(jb, "L", "branch").get<double>()});
    }
    if (j.contains("shunts")) {
        for (const auto& js : j.at("shunts")) {
            sys.shunts.push_back(Shunt{field(js, "bus", "shunt").get<std::string>(),
                                       js.value("R", 0.0), js.value("L", 0.0),
                                       js.value("C", 0.0)});
        }
    }
    for (const auto& ju : field(j, "ibr_units", "system")) {
        IbrUnit unit;
        unit.bus = field(ju, "bus", "ibr unit").get<std::string>();
        unit.P_rated = field(ju, "P_rated", "ibr unit").get<double>();
        unit.params = params_from_json(field(ju, "params", "ibr unit"));
        unit.filter.Rf = field(field(ju, "filter", "ibr unit"), "Rf", "filter").get<double>();
        unit.filter.Lf = field(field(ju, "filter", "ibr unit"), "Lf", "filter").get<double>();
        sys.ibr_units.push_back(unit);
    }
    return sys;
}

int coordinate_index(const std::string& name) {
    const auto& names = ParameterVector::coordinate_names();
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        if (names[static_cast<std::size_t>(c)] == name) return c;
    }
    throw ConfigError("unknown parameter coordinate '" + name + "'");
}

}  // namespace

FeasibleAttackSet RunConfig::attack_set_for(const std::string& bus_id) const {
    const IbrUnit& unit = system.ibr_at(bus_id);
    std::array<double, 3> xop_abs = {attack.xop_dev_pu[0] * system.base.S_base,
                                     attack.xop_dev_pu[1] * system.base.S_base,
                                     attack.xop_dev_pu[2] * system.base.V_base};
    return FeasibleAttackSet::from_deviations(unit.params, xop_abs, attack.rho_rel_dev,
                                              attack.attackable);
}

void RunConfig::validate() const {
    system.validate();
    require(!targets.empty(), ErrorCode::Config, "no target buses configured");
    for (const auto& t : targets) {
        require(system.bus(t).type == BusType::Ibr, ErrorCode::Config,
                "target bus '" + t + "' is not an IBR bus");
    }
    stealth.validate();
    for (double d : attack.xop_dev_pu) {
        require(d >= 0.0, ErrorCode::Config, "negative operating-point deviation");
    }
    for (double d : attack.rho_rel_dev) {
        require(d >= 0.0, ErrorCode::Config, "negative parameter deviation");
    }
    require(assess.n_samples >= 100, ErrorCode::Config, "ard.n_samples must be >= 100");
    require(assess.n_directions == 0 || assess.n_directions >= 8, ErrorCode::Config,
            "ard.n_directions must be 0 or >= 8");
    require(assess.dataset_size >= 2, ErrorCode::Config, "surrogate.dataset_size must be >= 2");
    require(assess.grid_resolution >= 2, ErrorCode::Config, "api.grid_resolution must be >= 2");
    require(assess.participation_gamma > 0.0 && assess.participation_gamma <= 1.0,
            ErrorCode::Config, "api.participation_gamma must be in (0, 1]");
    require(!output_dir.empty(), ErrorCode::Config, "output_dir must not be empty");
    // every target's attack box must be constructible
    for (const auto& t : targets) {
        attack_set_for(t).validate();
    }
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON parse error: ") + e.what());
    }

    try {
        RunConfig cfg;
        cfg.system = system_from_json(field(j, "system", "config"));
        cfg.targets = field(j, "targets", "config").get<std::vector<std::string>>();

        if (j.contains("grid")) {
            const auto& jg = j.at("grid");
            const std::string spacing = jg.value("spacing", "log");
            require(spacing == "log" || spacing == "linear", ErrorCode::Config,
                    "grid.spacing must be \"log\" or \"linear\"");
            const double w_lo = 2.0 * M_PI * field(jg, "f_low_hz", "grid").get<double>();
            const double w_hi = 2.0 * M_PI * field(jg, "f_high_hz", "grid").get<double>();
            const int n_points = field(jg, "n_points", "grid").get<int>();
            cfg.grid = spacing == "log" ? FrequencyGrid::log_spaced(w_lo, w_hi, n_points)
                                        : FrequencyGrid::linear_spaced(w_lo, w_hi, n_points);
            cfg.grid_spacing = spacing;
        }
        cfg.assess.grid = cfg.grid;

        const auto& ja = field(j, "attack", "config");
        const auto xop = field(ja, "xop_dev_pu", "attack").get<std::vector<double>>();
        const auto rho = field(ja, "rho_rel_dev", "attack").get<std::vector<double>>();
        require(xop.size() == 3 && rho.size() == 6, ErrorCode::Config,
                "attack deviations need 3 operating-point and 6 parameter entries");
        std::copy(xop.begin(), xop.end(), cfg.attack.xop_dev_pu.begin());
        std::copy(rho.begin(), rho.end(), cfg.attack.rho_rel_dev.begin());
        for (const auto& name :
             field(ja, "attackable", "attack").get<std::vector<std::string>>()) {
            cfg.attack.attackable[static_cast<std::size_t>(coordinate_index(name))] = true;
        }

        const auto& js = field(j, "stealth", "config");
        cfg.stealth.eps1 = field(js, "eps1", "stealth").get<double>();
        cfg.stealth.eps2 = field(js, "eps2", "stealth").get<double>();
        if (js.contains("bdd_weights")) {
            const auto w = js.at("bdd_weights").get<std::vector<double>>();
            require(w.size() == 3, ErrorCode::Config, "bdd_weights needs 3 entries");
            for (int c = 0; c < 3; ++c) cfg.stealth.bdd_weights(c) = w[static_cast<std::size_t>(c)];
        }
        if (js.contains("ids_weights")) {
            const auto w = js.at("ids_weights").get<std::vector<double>>();
            require(w.size() == 6, ErrorCode::Config, "ids_weights needs 6 entries");
            for (int c = 0; c < 6; ++c) cfg.stealth.ids_weights(c) = w[static_cast<std::size_t>(c)];
        }
        cfg.stealth.base = cfg.system.base;

        const auto& jf = field(j, "surrogate", "config");
        const std::string mode = field(jf, "mode", "surrogate").get<std::string>();
        if (mode == "whitebox_oracle") {
            cfg.assess.surrogate_mode = AssessOptions::SurrogateMode::WhiteboxOracle;
        } else if (mode == "rational_fit") {
            cfg.assess.surrogate_mode = AssessOptions::SurrogateMode::RationalFit;
        } else {
            throw ConfigError("unknown surrogate mode '" + mode + "'");
        }
        cfg.assess.seed = field(jf, "seed", "surrogate").get<std::uint64_t>();
        cfg.assess.dataset_size = jf.value("dataset_size", cfg.assess.dataset_size);
        const std::string dmode = jf.value("dataset_mode", std::string("direct"));
        if (dmode == "direct") {
            cfg.assess.dataset.mode = DatasetMode::Direct;
        } else if (dmode == "via_era") {
            cfg.assess.dataset.mode = DatasetMode::ViaEra;
        } else {
            throw ConfigError("unknown dataset mode '" + dmode + "'");
        }
        cfg.assess.dataset.record_dt = jf.value("record_dt", cfg.assess.dataset.record_dt);
        cfg.assess.dataset.record_samples =
            jf.value("record_samples", cfg.assess.dataset.record_samples);
        if (jf.contains("prefilter_a_hz")) {
            cfg.assess.dataset.prefilter_a = 2.0 * M_PI * jf.at("prefilter_a_hz").get<double>();
        }
        cfg.assess.dataset.noise_rms_fraction =
            jf.value("noise_rms_fraction", cfg.assess.dataset.noise_rms_fraction);
        cfg.assess.dataset.noise_seed = jf.value("noise_seed", cfg.assess.seed);
        cfg.assess.fit.basis_degree = jf.value("basis_degree", cfg.assess.fit.basis_degree);
        cfg.assess.fit.rho_degree = jf.value("rho_degree", cfg.assess.fit.rho_degree);
        cfg.assess.fit.op_degree_in_x =
            jf.value("op_degree_in_x", cfg.assess.fit.op_degree_in_x);
        cfg.assess.fit.ridge = jf.value("ridge", cfg.assess.fit.ridge);
        cfg.assess.fit.sk_iterations = jf.value("sk_iterations", cfg.assess.fit.sk_iterations);
        cfg.assess.fit.fit_grid_stride =
            jf.value("fit_grid_stride", cfg.assess.fit.fit_grid_stride);
        cfg.assess.fit.validation_fraction =
            jf.value("validation_fraction", cfg.assess.fit.validation_fraction);
        cfg.assess.fit.seed = cfg.assess.seed;

        if (j.contains("optimizer")) {
            const auto& jo = j.at("optimizer");
            cfg.assess.ascent.alpha = jo.value("alpha", cfg.assess.ascent.alpha);
            cfg.assess.ascent.max_iter = jo.value("max_iter", cfg.assess.ascent.max_iter);
            cfg.assess.ascent.restarts = jo.value("restarts", cfg.assess.ascent.restarts);
            cfg.assess.ascent.tol = jo.value("tol", cfg.assess.ascent.tol);
        }

        const auto& jr = field(j, "ard", "config");
        cfg.assess.ard_seed = field(jr, "seed", "ard").get<std::uint64_t>();
        cfg.assess.n_samples = jr.value("n_samples", cfg.assess.n_samples);
        cfg.assess.n_directions = jr.value("n_directions", cfg.assess.n_directions);

        if (j.contains("api")) {
            const auto& jp = j.at("api");
            cfg.assess.grid_resolution =
                jp.value("grid_resolution", cfg.assess.grid_resolution);
            cfg.assess.participation_gamma =
                jp.value("participation_gamma", cfg.assess.participation_gamma);
        }
        if (j.contains("modes")) {
            const auto& jm = j.at("modes");
            cfg.assess.n_poles = jm.value("n_poles", cfg.assess.n_poles);
            cfg.assess.band.low = jm.value("band_low_hz", cfg.assess.band.low);
            cfg.assess.band.high = jm.value("band_high_hz", cfg.assess.band.high);
            cfg.assess.top_k = jm.value("top_k", cfg.assess.top_k);
        }
        cfg.output_dir = j.value("output_dir", cfg.output_dir);

        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error&) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    return from_json_string(text);
}

std::string RunConfig::to_json_string() const {
    ordered_json j;
    ordered_json& sys = j["system"];
    sys["omega0_hz"] = system.omega0 / (2.0 * M_PI);
    sys["s_base"] = system.base.S_base;
    sys["v_base"] = system.base.V_base;
    sys["buses"] = ordered_json::array();
    for (const auto& b : system.buses) {
        sys["buses"].push_back({{"id", b.id}, {"type", bus_type_name(b.type)}});
    }
    sys["branches"] = ordered_json::array();
    for (const auto& br : system.branches) {
        sys["branches"].push_back(
            {{"from", br.from}, {"to", br.to}, {"R", br.R}, {"L", br.L}});
    }
    sys["shunts"] = ordered_json::array();
    for (const auto& sh : system.shunts) {
        sys["shunts"].push_back({{"bus", sh.bus}, {"R", sh.R}, {"L", sh.L}, {"C", sh.C}});
    }
    sys["ibr_units"] = ordered_json::array();
    for (const auto& u : system.ibr_units) {
        ordered_json ju;
        ju["bus"] = u.bus;
        ju["P_rated"] = u.P_rated;
        ordered_json jp;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            jp[ParameterVector::coordinate_names()[static_cast<std::size_t>(c)]] =
                u.params.coordinate(c);
        }
        ju["params"] = jp;
        ju["filter"] = {{"Rf", u.filter.Rf}, {"Lf", u.filter.Lf}};
        sys["ibr_units"].push_back(ju);
    }

    j["targets"] = targets;
    j["grid"] = {{"f_low_hz", grid.low() / (2.0 * M_PI)},
                 {"f_high_hz", grid.high() / (2.0 * M_PI)},
                 {"n_points", grid.size()},
                 {"spacing", grid_spacing}};

    std::vector<std::string> attackable_names;
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        if (attack.attackable[static_cast<std::size_t>(c)]) {
            attackable_names.push_back(
                ParameterVector::coordinate_names()[static_cast<std::size_t>(c)]);
        }
    }
    j["attack"] = {{"xop_dev_pu", attack.xop_dev_pu},
                   {"rho_rel_dev", attack.rho_rel_dev},
                   {"attackable", attackable_names}};
    j["stealth"] = {
        {"eps1", stealth.eps1},
        {"eps2", stealth.eps2},
        {"bdd_weights",
         std::vector<double>{stealth.bdd_weights(0), stealth.bdd_weights(1),
                             stealth.bdd_weights(2)}},
        {"ids_weights",
         std::vector<double>{stealth.ids_weights(0), stealth.ids_weights(1),
                             stealth.ids_weights(2), stealth.ids_weights(3),
                             stealth.ids_weights(4), stealth.ids_weights(5)}}};
    j["surrogate"] = {
        {"mode", assess.surrogate_mode == AssessOptions::SurrogateMode::WhiteboxOracle
                     ? "whitebox_oracle"
                     : "rational_fit"},
        {"seed", assess.seed},
        {"dataset_size", assess.dataset_size},
        {"dataset_mode", assess.dataset.mode == DatasetMode::Direct ? "direct" : "via_era"},
        {"record_dt", assess.dataset.record_dt},
        {"record_samples", assess.dataset.record_samples},
        {"prefilter_a_hz", assess.dataset.prefilter_a / (2.0 * M_PI)},
        {"noise_rms_fraction", assess.dataset.noise_rms_fraction},
        {"noise_seed", assess.dataset.noise_seed},
        {"basis_degree", assess.fit.basis_degree},
        {"rho_degree", assess.fit.rho_degree},
        {"op_degree_in_x", assess.fit.op_degree_in_x},
        {"ridge", assess.fit.ridge},
        {"sk_iterations", assess.fit.sk_iterations},
        {"fit_grid_stride", assess.fit.fit_grid_stride},
        {"validation_fraction", assess.fit.validation_fraction}};
    j["optimizer"] = {{"alpha", assess.ascent.alpha},
                      {"max_iter", assess.ascent.max_iter},
                      {"restarts", assess.ascent.restarts},
                      {"tol", assess.ascent.tol}};
    j["ard"] = {{"seed", assess.ard_seed},
                {"n_samples", assess.n_samples},
                {"n_directions", assess.n_directions}};
    j["api"] = {{"grid_resolution", assess.grid_resolution},
                {"participation_gamma", assess.participation_gamma}};
    j["modes"] = {{"n_poles", assess.n_poles},
                  {"band_low_hz", assess.band.low},
                  {"band_high_hz", assess.band.high},
                  {"top_k", assess.top_k}};
    j["output_dir"] = output_dir;
    return j.dump(2) + "\n";
}

}  // namespace ard
