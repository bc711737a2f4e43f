#include "ardcore/ard_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ard {

FeasibleAttackSet FeasibleAttackSet::from_deviations(
    const ParameterVector& nominal, const std::array<double, 3>& xop_abs_dev,
    const std::array<double, 6>& rho_rel_dev,
    const std::array<bool, ParameterVector::kDim>& attackable) {
    FeasibleAttackSet omega;
    omega.nominal = nominal;
    omega.attackable = attackable;
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        const double center = nominal.coordinate(c);
        double dev = 0.0;
        if (attackable[static_cast<std::size_t>(c)]) {
            dev = c < 3 ? xop_abs_dev[static_cast<std::size_t>(c)]
                        : rho_rel_dev[static_cast<std::size_t>(c - 3)] * std::abs(center);
        }
        require(dev >= 0.0, ErrorCode::Input, "attack deviation must be non-negative");
        omega.box.lo(c) = center - dev;
        omega.box.hi(c) = center + dev;
    }
    // The feasible set is the command range intersected with the physical
    // protection limits: coordinates with hard validity floors are clamped
    // so every box point is a valid parameter vector.
    {
        ParameterVector probe = nominal;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            if (omega.box.lo(c) >= nominal.coordinate(c)) continue;
            probe = nominal;
            probe.set_coordinate(c, omega.box.lo(c));
            try {
                probe.validate();
            } catch (const Error&) {
                // Binary-search style clamp is unnecessary: validity floors
                // are all at zero (or strictly above for scale parameters),
                // so clamp to a tiny positive fraction of nominal.
                const double floor_value =
                    (c == 3 || c == 6 || c == 2) ? 1e-6 * std::abs(nominal.coordinate(c)) : 0.0;
                omega.box.lo(c) = floor_value;
            }
        }
    }
    omega.validate();
    return omega;
}

bool FeasibleAttackSet::is_singleton() const {
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        if (!box.is_degenerate(c)) return false;
    }
    return true;
}

void FeasibleAttackSet::validate() const {
    box.validate();
    require(box.contains(nominal), ErrorCode::Input, "nominal point outside the attack box");
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        if (!attackable[static_cast<std::size_t>(c)]) {
            require(box.is_degenerate(c) && box.lo(c) == nominal.coordinate(c),
                    ErrorCode::Input,
                    "non-attackable coordinate must be pinned at nominal");
        }
    }
}

StealthModel StealthModel::unconstrained() {
    StealthModel s;
    s.eps1 = std::numeric_limits<double>::infinity();
    s.eps2 = std::numeric_limits<double>::infinity();
    return s;
}

void StealthModel::validate() const {
    require(eps1 > 0.0 && eps2 > 0.0, ErrorCode::Input,
            "stealth thresholds must be positive");
    require((bdd_weights.array() >= 0.0).all() && (ids_weights.array() >= 0.0).all(),
            ErrorCode::Input, "stealth weights must be non-negative");
    require(base.S_base > 0.0 && base.V_base > 0.0, ErrorCode::Input,
            "per-unit base must be positive");
}

namespace {

// Per-unit operating-point deviation (P, Q on S_base; V on V_base).
Eigen::Vector3d xop_deviation_pu(const ParameterVector& v, const ParameterVector& nominal,
                                 const PerUnitBase& base) {
    return Eigen::Vector3d((v.xop.P0 - nominal.xop.P0) / base.S_base,
                           (v.xop.Q0 - nominal.xop.Q0) / base.S_base,
                           (v.xop.V0 - nominal.xop.V0) / base.V_base);
}

double rho_relative_change(double value, double nominal_value) {
    if (nominal_value == 0.0) {
        return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::abs(value - nominal_value) / std::abs(nominal_value);
}

}  // namespace

std::pair<double, double> stealth_distances(const ParameterVector& v,
                                            const ParameterVector& nominal,
                                            const StealthModel& s) {
    const Eigen::Vector3d dev = xop_deviation_pu(v, nominal, s.base);
    const double d_bdd = (s.bdd_weights.array() * dev.array()).matrix().norm();
    double d_ids = 0.0;
    for (int c = 0; c < ParameterVector::kRhoDim; ++c) {
        const int ci = c + 3;
        const double rel = rho_relative_change(v.coordinate(ci), nominal.coordinate(ci));
        d_ids = std::max(d_ids, s.ids_weights(c) * rel);
    }
    return {d_bdd, d_ids};
}

bool stealth_feasible(const ParameterVector& v, const ParameterVector& nominal,
                      const StealthModel& s, double slack) {
    const auto [d_bdd, d_ids] = stealth_distances(v, nominal, s);
    return d_bdd <= s.eps1 * (1.0 + slack) && d_ids <= s.eps2 * (1.0 + slack);
}

ParameterVector project_feasible(const FeasibleAttackSet& omega, const StealthModel& s,
                                 const ParameterVector& v) {
    ParameterVector p = v;
    const int max_rounds = 20;
    for (int round = 0; round < max_rounds; ++round) {
        const Eigen::Matrix<double, ParameterVector::kDim, 1> before = p.to_vector();

        // 1) box clamp (also pins non-attackable coordinates at nominal)
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            p.set_coordinate(c, std::clamp(p.coordinate(c), omega.box.lo(c), omega.box.hi(c)));
        }

        // 2) BDD ball: radial scaling of the operating-point deviation
        {
            const Eigen::Vector3d dev = xop_deviation_pu(p, omega.nominal, s.base);
            const double d_bdd = (s.bdd_weights.array() * dev.array()).matrix().norm();
            if (d_bdd > s.eps1 && std::isfinite(s.eps1)) {
                const double scale = s.eps1 / d_bdd;
                p.xop.P0 = omega.nominal.xop.P0 + scale * (p.xop.P0 - omega.nominal.xop.P0);
                p.xop.Q0 = omega.nominal.xop.Q0 + scale * (p.xop.Q0 - omega.nominal.xop.Q0);
                p.xop.V0 = omega.nominal.xop.V0 + scale * (p.xop.V0 - omega.nominal.xop.V0);
            }
        }

        // 3) IDS max-norm ball: per-coordinate clamp of the relative change
        if (std::isfinite(s.eps2)) {
            for (int c = 0; c < ParameterVector::kRhoDim; ++c) {
                const int ci = c + 3;
                const double w = s.ids_weights(c);
                if (w <= 0.0) continue;
                const double nom = omega.nominal.coordinate(ci);
                const double limit = s.eps2 / w * std::abs(nom);
                const double delta = p.coordinate(ci) - nom;
                if (nom == 0.0) {
                    // any change has infinite relative distance
                    p.set_coordinate(ci, 0.0);
                } else if (std::abs(delta) > limit) {
                    p.set_coordinate(ci, nom + std::copysign(limit, delta));
                }
            }
        }

        double change = 0.0;
        const Eigen::Matrix<double, ParameterVector::kDim, 1> after = p.to_vector();
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            change = std::max(change,
                              std::abs(after(c) - before(c)) / std::max(1.0, std::abs(after(c))));
        }
        if (change < 1e-12) break;
    }
    return p;
}

Complex drift(const ParameterVector& v_atk, const ParameterVector& nominal,
              const ImpedanceSurrogate& f, const Mode& mode) {
    const DqMatrix dz =
        f.evaluate(v_atk, mode.lambda0) - f.evaluate(nominal, mode.lambda0);
    return (mode.participation.P.array() * dz.array()).sum();
}

ArdCloud sample_ard(const FeasibleAttackSet& omega, const StealthModel& s,
                    const ImpedanceSurrogate& f, const Mode& mode, int n,
                    std::uint64_t seed) {
    omega.validate();
    s.validate();
    require(n >= 100, ErrorCode::Input, "sample_ard needs n >= 100");

    const int n_lhs = n / 2;
    std::vector<ParameterVector> draws = lhs_sample(omega.box, n_lhs, seed);
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = n_lhs; k < n; ++k) {
        ParameterVector v = omega.nominal;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            v.set_coordinate(c, omega.box.is_degenerate(c)
                                    ? omega.box.lo(c)
                                    : omega.box.lo(c) + unit(rng) * omega.box.width(c));
        }
        draws.push_back(v);
    }

    ArdCloud cloud;
    cloud.mode = mode;
    cloud.seed = seed;
    cloud.n_requested = n;

    // Nominal point is always part of the reachable domain.
    cloud.samples.push_back(ArdSample{omega.nominal, Complex(0.0, 0.0), mode.lambda0, true});

    int feasible = 0;
    for (const ParameterVector& v : draws) {
        if (!stealth_feasible(v, omega.nominal, s)) {
            ++cloud.n_rejected;
            continue;
        }
        ++feasible;
        const Complex dl = drift(v, omega.nominal, f, mode);
        cloud.samples.push_back(ArdSample{v, dl, mode.lambda0 + dl, true});
    }

    if (static_cast<double>(feasible) < 0.5 * static_cast<double>(n)) {
        throw Error(ErrorCode::OverConstrainedOmega,
                    "fewer than half of the attack draws are stealth-feasible; "
                    "review the stealth thresholds or the attack box");
    }
    return cloud;
}

namespace {

struct AscentObjective {
    const FeasibleAttackSet& omega;
    const ImpedanceSurrogate& f;
    const Mode& mode;
    Complex rotation;  // e^{-j phi}

    double value(const ParameterVector& v, Complex* dl_out = nullptr) const {
        const Complex dl = drift(v, omega.nominal, f, mode);
        if (dl_out) *dl_out = dl;
        return (rotation * dl).real();
    }

    // Gradient in box-normalized coordinates (zero for pinned coordinates).
    Eigen::Matrix<double, ParameterVector::kDim, 1> normalized_gradient(
        const ParameterVector& v) const {
        const auto dz = f.gradient(v, mode.lambda0);
        Eigen::Matrix<double, ParameterVector::kDim, 1> g;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            const Complex dldc =
                (mode.participation.P.array() * dz[static_cast<std::size_t>(c)].array()).sum();
            g(c) = (rotation * dldc).real() * omega.box.width(c);
        }
        require(g.allFinite(), ErrorCode::SurrogateDomain,
                "non-finite drift gradient during ascent");
        return g;
    }
};

}  // namespace

ArdSample boundary_ascent(const FeasibleAttackSet& omega, const StealthModel& s,
                          const ImpedanceSurrogate& f, const Mode& mode,
                          double direction_phi, const AscentConfig& cfg) {
    omega.validate();
    s.validate();
    require(cfg.alpha > 0.0, ErrorCode::Input, "ascent step alpha must be > 0");
    require(cfg.restarts >= 1 && cfg.max_iter >= 1, ErrorCode::Input,
            "ascent needs at least one start and one iteration");

    const AscentObjective obj{omega, f, mode,
                              std::exp(Complex(0.0, -direction_phi))};

    std::vector<ParameterVector> starts;
    starts.push_back(omega.nominal);
    if (cfg.restarts > 1 && !omega.is_singleton()) {
        const auto lhs = lhs_sample(omega.box, std::max(2, cfg.restarts - 1), cfg.seed);
        for (int k = 0; k < cfg.restarts - 1; ++k) {
            starts.push_back(lhs[static_cast<std::size_t>(k)]);
        }
    }

    bool have_best = false;
    double best_value = -std::numeric_limits<double>::infinity();
    ParameterVector best_point = omega.nominal;
    Complex best_drift(0.0, 0.0);

    for (const ParameterVector& start : starts) {
        ParameterVector v = project_feasible(omega, s, start);
        if (!stealth_feasible(v, omega.nominal, s)) continue;

        Complex dl;
        double val;
        try {
            val = obj.value(v, &dl);
        } catch (const Error&) {
            continue;  // start outside the surrogate's safe region
        }

        for (int it = 0; it < cfg.max_iter; ++it) {
            const Eigen::Matrix<double, ParameterVector::kDim, 1> g =
                obj.normalized_gradient(v);
            const double gnorm = g.norm();
            if (gnorm <= cfg.tol) break;

            bool improved = false;
            double step = cfg.alpha;
            for (int half = 0; half < 20; ++half) {
                ParameterVector trial = v;
                for (int c = 0; c < ParameterVector::kDim; ++c) {
                    trial.set_coordinate(
                        c, v.coordinate(c) + step * (g(c) / gnorm) * omega.box.width(c));
                }
                trial = project_feasible(omega, s, trial);
                Complex dl_try;
                double val_try;
                try {
                    val_try = obj.value(trial, &dl_try);
                } catch (const Error&) {
                    step *= 0.5;
                    continue;
                }
                if (val_try > val) {
                    v = trial;
                    val = val_try;
                    dl = dl_try;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }

        if (!have_best || val > best_value) {
            have_best = true;
            best_value = val;
            best_point = v;
            best_drift = dl;
        }
    }

    require(have_best, ErrorCode::InfeasibleStart,
            "no ascent start satisfied the stealth constraints");
    return ArdSample{best_point, best_drift, mode.lambda0 + best_drift, true};
}

std::vector<ArdSample> trace_boundary(const FeasibleAttackSet& omega, const StealthModel& s,
                                      const ImpedanceSurrogate& f, const Mode& mode,
                                      int n_directions, const AscentConfig& cfg) {
    require(n_directions >= 8, ErrorCode::Input, "trace_boundary needs >= 8 directions");
    std::vector<ArdSample> boundary;
    boundary.reserve(static_cast<std::size_t>(n_directions));
    for (int k = 0; k < n_directions; ++k) {
        const double phi = 2.0 * M_PI * k / n_directions;
        AscentConfig dir_cfg = cfg;
        dir_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
        boundary.push_back(boundary_ascent(omega, s, f, mode, phi, dir_cfg));
    }
    return boundary;
}

ApiResult compute_api(const ArdCloud& cloud, int grid_resolution) {
    require(!cloud.samples.empty(), ErrorCode::Input, "compute_api: empty cloud");
    require(grid_resolution >= 2, ErrorCode::Input, "grid_resolution must be >= 2");
    require(cloud.mode.lambda0.real() < 0.0, ErrorCode::BaselineUnstable,
            "baseline mode is already unstable; penetration index undefined");

    std::vector<const ArdSample*> points;
    points.reserve(cloud.samples.size() + cloud.boundary.size());
    for (const auto& p : cloud.samples) points.push_back(&p);
    for (const auto& p : cloud.boundary) points.push_back(&p);

    ApiResult result;
    const ArdSample* worst = points.front();
    bool any_unstable = false;
    double max_re_drift = -std::numeric_limits<double>::infinity();
    for (const ArdSample* p : points) {
        if (p->lambda.real() >= 0.0) any_unstable = true;
        if (p->delta_lambda.real() > max_re_drift) {
            max_re_drift = p->delta_lambda.real();
            worst = p;
        }
    }
    result.max_re_drift = max_re_drift;
    result.worst_case = *worst;

    if (!any_unstable) {
        result.branch = ApiBranch::MarginErosion;
        result.value = max_re_drift / std::abs(cloud.mode.lambda0.real());
        result.unstable_fraction = 0.0;
        return result;
    }

    // Occupancy-grid area estimate over the cloud + boundary bounding box;
    // a cell counts as unstable when its center lies in Re >= 0.
    double re_min = std::numeric_limits<double>::infinity(), re_max = -re_min;
    double im_min = re_min, im_max = -re_min;
    for (const ArdSample* p : points) {
        re_min = std::min(re_min, p->lambda.real());
        re_max = std::max(re_max, p->lambda.real());
        im_min = std::min(im_min, p->lambda.imag());
        im_max = std::max(im_max, p->lambda.imag());
    }
    const double re_w = re_max - re_min;
    const double im_w = im_max - im_min;
    const int res = grid_resolution;
    auto cell_of = [&](double x, double lo, double w) {
        if (w <= 0.0) return 0;
        const int i = static_cast<int>(std::floor((x - lo) / w * res));
        return std::clamp(i, 0, res - 1);
    };

    std::vector<char> occupied(static_cast<std::size_t>(res) * res, 0);
    for (const ArdSample* p : points) {
        const int i = cell_of(p->lambda.real(), re_min, re_w);
        const int j = cell_of(p->lambda.imag(), im_min, im_w);
        occupied[static_cast<std::size_t>(i) * res + j] = 1;
    }
    long n_occupied = 0, n_unstable = 0;
    for (int i = 0; i < res; ++i) {
        const double center_re =
            re_w > 0.0 ? re_min + (i + 0.5) * re_w / res : re_min;
        for (int j = 0; j < res; ++j) {
            if (!occupied[static_cast<std::size_t>(i) * res + j]) continue;
            ++n_occupied;
            if (center_re >= 0.0) ++n_unstable;
        }
    }
    result.branch = ApiBranch::ReachableInstability;
    result.unstable_fraction =
        static_cast<double>(n_unstable) / static_cast<double>(n_occupied);
    result.value = 1.0 + result.unstable_fraction;
    return result;
}

BusApiReport bus_report(const std::string& bus_id,
                        const std::vector<std::pair<Mode, ApiResult>>& modes,
                        double participation_threshold) {
    require(!modes.empty(), ErrorCode::Input, "bus_report needs at least one mode");

    double max_part = 0.0;
    for (const auto& [mode, api] : modes) {
        max_part = std::max(max_part, mode.participation.P.norm());
    }

    BusApiReport report;
    report.bus_id = bus_id;
    report.per_mode = modes;
    for (int k = 0; k < static_cast<int>(modes.size()); ++k) {
        const double p = modes[static_cast<std::size_t>(k)].first.participation.P.norm();
        if (p >= participation_threshold * max_part) {
            report.dominant_mode_set.push_back(k);
        }
    }
    for (int k : report.dominant_mode_set) {
        const auto& [mode, api] = modes[static_cast<std::size_t>(k)];
        const bool better =
            report.bus_api_mode_index < 0 || api.value > report.bus_api ||
            (api.value == report.bus_api &&
             mode.frequency_hz <
                 modes[static_cast<std::size_t>(report.bus_api_mode_index)].first.frequency_hz);
        if (better) {
            report.bus_api = api.value;
            report.bus_api_mode_index = k;
        }
    }
    return report;
}

}  // namespace ard
