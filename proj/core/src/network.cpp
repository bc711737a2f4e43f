#include "ardcore/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

namespace ard {

int SystemDescription::bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

const Bus& SystemDescription::bus(const std::string& id) const {
    const int i = bus_index(id);
    require(i >= 0, ErrorCode::Config, "unknown bus '" + id + "'");
    return buses[static_cast<std::size_t>(i)];
}

const IbrUnit& SystemDescription::ibr_at(const std::string& bus_id) const {
    for (const auto& unit : ibr_units) {
        if (unit.bus == bus_id) return unit;
    }
    throw ConfigError("bus '" + bus_id + "' hosts no IBR unit");
}

void SystemDescription::validate() const {
    require(!buses.empty(), ErrorCode::Config, "system has no buses");
    require(omega0 > 0.0, ErrorCode::Config, "omega0 must be positive");

    std::set<std::string> ids;
    int n_slack = 0;
    for (const auto& b : buses) {
        require(ids.insert(b.id).second, ErrorCode::Config, "duplicate bus id '" + b.id + "'");
        if (b.type == BusType::Slack) ++n_slack;
    }
    require(n_slack == 1, ErrorCode::Config, "system must have exactly one slack bus");

    for (const auto& br : branches) {
        require(bus_index(br.from) >= 0 && bus_index(br.to) >= 0, ErrorCode::Config,
                "branch endpoint references an unknown bus");
        require(br.from != br.to, ErrorCode::Config, "branch endpoints must differ");
        require(br.R >= 0.0 && br.L >= 0.0 && (br.R > 0.0 || br.L > 0.0), ErrorCode::Config,
                "branch must have positive impedance");
    }
    for (const auto& sh : shunts) {
        require(bus_index(sh.bus) >= 0, ErrorCode::Config, "shunt references an unknown bus");
        require(sh.R >= 0.0 && sh.L >= 0.0 && sh.C >= 0.0, ErrorCode::Config,
                "shunt values must be non-negative");
    }

    std::set<std::string> ibr_buses;
    for (const auto& unit : ibr_units) {
        const int i = bus_index(unit.bus);
        require(i >= 0, ErrorCode::Config, "IBR unit references an unknown bus");
        require(buses[static_cast<std::size_t>(i)].type == BusType::Ibr, ErrorCode::Config,
                "IBR unit placed on a non-IBR bus '" + unit.bus + "'");
        require(ibr_buses.insert(unit.bus).second, ErrorCode::Config,
                "bus '" + unit.bus + "' hosts more than one IBR unit");
    }
    for (const auto& b : buses) {
        if (b.type == BusType::Ibr) {
            require(ibr_buses.count(b.id) == 1, ErrorCode::Config,
                    "IBR bus '" + b.id + "' has no unit");
        }
    }

    // connectivity (branches only)
    std::vector<int> comp(buses.size());
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (comp[static_cast<std::size_t>(x)] != x) x = comp[static_cast<std::size_t>(x)];
        return x;
    };
    for (const auto& br : branches) {
        const int a = find(bus_index(br.from));
        const int b = find(bus_index(br.to));
        if (a != b) comp[static_cast<std::size_t>(a)] = b;
    }
    const int root = find(0);
    for (std::size_t i = 1; i < buses.size(); ++i) {
        require(find(static_cast<int>(i)) == root, ErrorCode::Config,
                "network graph is not connected");
    }
}

namespace {

DqMatrix invert_block(const DqMatrix& z, const std::string& element_name) {
    const Complex det = z(0, 0) * z(1, 1) - z(0, 1) * z(1, 0);
    require(std::abs(det) > 1e-300 && std::isfinite(std::abs(det)),
            ErrorCode::ComponentSingularity,
            "singular 2x2 block for element '" + element_name + "'");
    DqMatrix y;
    y << z(1, 1), -z(0, 1), -z(1, 0), z(0, 0);
    return y / det;
}

DqMatrix shunt_admittance(const Shunt& sh, double omega0, Complex s) {
    DqMatrix y = DqMatrix::Zero();
    if (sh.R > 0.0 || sh.L > 0.0) {
        y += invert_block(dq_rl_impedance(sh.R, sh.L, omega0, s), "shunt@" + sh.bus);
    }
    if (sh.C > 0.0) {
        DqMatrix yc;
        yc << s * sh.C, Complex(-omega0 * sh.C, 0.0), Complex(omega0 * sh.C, 0.0), s * sh.C;
        y += yc;
    }
    return y;
}

}  // namespace

NodalAdmittance nodal_admittance(const SystemDescription& sys, Complex s,
                                 const std::string& exclude_ibr_bus) {
    require(std::isfinite(s.real()) && std::isfinite(s.imag()), ErrorCode::Input,
            "nodal_admittance needs a finite frequency");

    NodalAdmittance out;
    std::vector<int> block_of(sys.buses.size(), -1);
    for (std::size_t i = 0; i < sys.buses.size(); ++i) {
        if (sys.buses[i].type == BusType::Slack) continue;
        block_of[i] = static_cast<int>(out.bus_order.size());
        out.bus_order.push_back(sys.buses[i].id);
    }
    const int n = static_cast<int>(out.bus_order.size());
    out.Y = Eigen::MatrixXcd::Zero(2 * n, 2 * n);

    auto add_block = [&](int bi, int bj, const DqMatrix& y) {
        out.Y.block<2, 2>(2 * bi, 2 * bj) += y;
    };

    for (const auto& br : sys.branches) {
        const DqMatrix yb = invert_block(dq_rl_impedance(br.R, br.L, sys.omega0, s),
                                         "branch " + br.from + "-" + br.to);
        const int a = block_of[static_cast<std::size_t>(sys.bus_index(br.from))];
        const int b = block_of[static_cast<std::size_t>(sys.bus_index(br.to))];
        if (a >= 0) add_block(a, a, yb);
        if (b >= 0) add_block(b, b, yb);
        if (a >= 0 && b >= 0) {
            add_block(a, b, -yb);
            add_block(b, a, -yb);
        }
    }
    for (const auto& sh : sys.shunts) {
        const int b = block_of[static_cast<std::size_t>(sys.bus_index(sh.bus))];
        if (b >= 0) add_block(b, b, shunt_admittance(sh, sys.omega0, s));
    }
    for (const auto& unit : sys.ibr_units) {
        if (unit.bus == exclude_ibr_bus) continue;
        const int b = block_of[static_cast<std::size_t>(sys.bus_index(unit.bus))];
        if (b < 0) continue;
        const StateSpaceModel model =
            build_vsg_state_space(unit.params, unit.filter, sys.omega0);
        add_block(b, b, invert_block(evaluate_impedance(model, s), "ibr@" + unit.bus));
    }
    return out;
}

namespace {

// Kron reduction of the nodal admittance to the target bus, inverted.
DqMatrix thevenin_block(const SystemDescription& sys, const std::string& bus_id, Complex s) {
    const NodalAdmittance nodal = nodal_admittance(sys, s, bus_id);
    int t = -1;
    for (std::size_t i = 0; i < nodal.bus_order.size(); ++i) {
        if (nodal.bus_order[i] == bus_id) t = static_cast<int>(i);
    }
    require(t >= 0, ErrorCode::Input, "target bus eliminated from the nodal matrix");

    const int n = static_cast<int>(nodal.bus_order.size());
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
        if (i != t) rest.push_back(i);
    }
    const DqMatrix y_tt = nodal.Y.block<2, 2>(2 * t, 2 * t);
    DqMatrix y_red = y_tt;
    if (!rest.empty()) {
        const int m = static_cast<int>(rest.size());
        Eigen::MatrixXcd y_rr(2 * m, 2 * m);
        Eigen::MatrixXcd y_rt(2 * m, 2);
        Eigen::MatrixXcd y_tr(2, 2 * m);
        for (int i = 0; i < m; ++i) {
            y_rt.block<2, 2>(2 * i, 0) = nodal.Y.block<2, 2>(2 * rest[static_cast<std::size_t>(i)], 2 * t);
            y_tr.block<2, 2>(0, 2 * i) = nodal.Y.block<2, 2>(2 * t, 2 * rest[static_cast<std::size_t>(i)]);
            for (int j = 0; j < m; ++j) {
                y_rr.block<2, 2>(2 * i, 2 * j) =
                    nodal.Y.block<2, 2>(2 * rest[static_cast<std::size_t>(i)],
                                        2 * rest[static_cast<std::size_t>(j)]);
            }
        }
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y_rr);
        const Eigen::MatrixXcd solved = lu.solve(y_rt);
        require(solved.allFinite(), ErrorCode::NearResonance,
                "Kron reduction singular near the requested frequency");
        y_red -= DqMatrix(y_tr * solved);
    }
    const DqMatrix z = invert_block(y_red, "thevenin@" + bus_id);
    require(z.allFinite(), ErrorCode::NearResonance, "non-finite Thevenin block");
    return z;
}

}  // namespace

TheveninEquivalent thevenin_at(const SystemDescription& sys, const std::string& bus_id,
                               const FrequencyGrid& grid) {
    sys.validate();
    require(sys.bus(bus_id).type == BusType::Ibr, ErrorCode::Input,
            "thevenin_at target must be an IBR bus");

    std::vector<DqMatrix> values;
    values.reserve(grid.size());
    for (double w : grid.points()) {
        try {
            values.push_back(thevenin_block(sys, bus_id, Complex(0.0, w)));
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "Thevenin reduction failed at omega=" << w << " rad/s: " << e.what();
            throw Error(ErrorCode::NearResonance, msg.str());
        }
    }
    return TheveninEquivalent{bus_id, ImpedanceSpectrum(grid, std::move(values))};
}

double scr_proxy(const SystemDescription& sys, const std::string& bus_id) {
    sys.validate();
    const IbrUnit& unit = sys.ibr_at(bus_id);
    require(unit.P_rated > 0.0, ErrorCode::Config,
            "scr_proxy needs a positive rated power for bus '" + bus_id + "'");
    const DqMatrix z = thevenin_block(sys, bus_id, Complex(0.0, sys.omega0));
    const double z_mag = z.jacobiSvd().singularValues()(0);
    if (z_mag <= 0.0) return std::numeric_limits<double>::infinity();
    return (sys.base.V_base * sys.base.V_base / z_mag) / unit.P_rated;
}

GridEquivalent rl_grid_equivalent(const SystemDescription& sys, const std::string& bus_id) {
    const DqMatrix z = thevenin_block(sys, bus_id, Complex(0.0, sys.omega0));
    GridEquivalent g;
    g.omega0 = sys.omega0;
    g.Rg = 0.5 * (z(0, 0).real() + z(1, 1).real());
    g.Lg = 0.5 * (z(0, 0).imag() + z(1, 1).imag()) / sys.omega0;
    g.validate();
    return g;
}

namespace {

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(name) + ": " + e.what());
    }
}

}  // namespace

BusAssessment assess_bus(const SystemDescription& sys, const std::string& bus_id,
                         const FeasibleAttackSet& omega, const StealthModel& stealth,
                         const AssessOptions& options) {
    sys.validate();
    omega.validate();
    stealth.validate();
    require(sys.bus(bus_id).type == BusType::Ibr, ErrorCode::Input,
            "assess_bus target must be an IBR bus");

    BusAssessment out;
    const IbrUnit& unit = sys.ibr_at(bus_id);
    const VsgPlant plant{unit.filter, sys.omega0};

    out.thevenin = stage("thevenin", [&] { return thevenin_at(sys, bus_id, options.grid); });

    std::unique_ptr<ImpedanceSurrogate> surrogate = stage("surrogate", [&] {
        std::unique_ptr<ImpedanceSurrogate> f;
        if (options.surrogate_mode == AssessOptions::SurrogateMode::WhiteboxOracle) {
            f = std::make_unique<WhiteboxSurrogate>(plant, omega.box);
        } else {
            const auto sample_points =
                lhs_sample(omega.box, options.dataset_size, options.seed);
            const TrainingDataset dataset =
                generate_dataset(plant, sample_points, options.grid, omega.box,
                                 options.dataset);
            SurrogateFitOptions fit = options.fit;
            fit.seed = options.seed;
            f = std::make_unique<RationalSurrogate>(fit_surrogate(dataset, fit));
        }
        return f;
    });

    out.modes = stage("modes", [&] {
        const ImpedanceSpectrum z_inv = plant.spectrum(omega.nominal, options.grid);
        const ImpedanceSpectrum y_sys = assemble_admittance(z_inv, out.thevenin.spectrum);
        out.y_sys_fit = vector_fit(y_sys, options.n_poles, options.vf);
        auto modes = select_critical_modes(out.y_sys_fit, options.band, options.top_k);
        require(!modes.empty(), ErrorCode::Unidentifiable,
                "no oscillatory mode inside the analysis band");
        return modes;
    });

    std::vector<std::pair<Mode, ApiResult>> per_mode;
    for (std::size_t k = 0; k < out.modes.size(); ++k) {
        const Mode& mode = out.modes[k];
        ArdCloud cloud = stage("ard", [&] {
            ArdCloud c = sample_ard(omega, stealth, *surrogate, mode, options.n_samples,
                                    options.ard_seed + 1000 * (k + 1));
            AscentConfig ascent = options.ascent;
            ascent.seed = options.ard_seed + 2000 * (k + 1);
            if (options.n_directions > 0) {
                c.boundary = trace_boundary(omega, stealth, *surrogate, mode,
                                            options.n_directions, ascent);
            } else {
                c.boundary.push_back(
                    boundary_ascent(omega, stealth, *surrogate, mode, 0.0, ascent));
            }
            return c;
        });
        const ApiResult api =
            stage("api", [&] { return compute_api(cloud, options.grid_resolution); });
        per_mode.emplace_back(mode, api);
        out.clouds.push_back(std::move(cloud));
    }

    out.report = stage("report", [&] {
        return bus_report(bus_id, per_mode, options.participation_gamma);
    });
    out.scr = unit.P_rated > 0.0 ? scr_proxy(sys, bus_id) : 0.0;
    return out;
}

}  // namespace ard
