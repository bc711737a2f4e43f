#include "doctest.h"

#include <random>

#include "ardcore/ard_engine.hpp"
#include "ardcore/demo.hpp"

using namespace ard;

namespace {

ParameterVector nominal_params() {
    ParameterVector v;
    v.xop = OperatingPoint{8e5, 1e5, 690.0};
    v.rho = ControlParams{800.0, 5000.0, 1e-4, 0.05, 0.02, 2e-4};
    return v;
}

std::array<bool, 9> all_attackable() {
    std::array<bool, 9> a{};
    a.fill(true);
    return a;
}

StealthModel demo_stealth() {
    StealthModel s;
    s.eps1 = 0.25;
    s.eps2 = 1.2;
    s.base = PerUnitBase{1e6, 690.0};
    return s;
}

}  // namespace

TEST_CASE("attack box construction honors deviations and physical floors") {
    const ParameterVector nominal = nominal_params();
    const FeasibleAttackSet omega = FeasibleAttackSet::from_deviations(
        nominal, {2e5, 2e5, 20.7}, {0.4, 0.4, 0.4, 0.4, 1.2, 0.3}, all_attackable());
    CHECK(omega.box.lo(0) == doctest::Approx(6e5));
    CHECK(omega.box.hi(0) == doctest::Approx(1e6));
    CHECK(omega.box.lo(4) == doctest::Approx(3000.0));
    // Relative deviation above 1 would drive Rv negative; the box is clamped
    // to the protection limit instead.
    CHECK(omega.box.lo(7) == 0.0);
    CHECK(omega.box.hi(7) == doctest::Approx(0.044));
    CHECK_NOTHROW(omega.validate());

    // Every corner of the clamped box is a valid parameter vector.
    ParameterVector corner = nominal;
    for (int c = 0; c < ParameterVector::kDim; ++c) corner.set_coordinate(c, omega.box.lo(c));
    CHECK_NOTHROW(corner.validate());
}

TEST_CASE("strictly positive coordinates clamp above zero") {
    const ParameterVector nominal = nominal_params();
    const FeasibleAttackSet omega = FeasibleAttackSet::from_deviations(
        nominal, {0, 0, 0}, {1.5, 0.0, 0.0, 1.5, 0.0, 0.0}, all_attackable());
    CHECK(omega.box.lo(3) == doctest::Approx(1e-6 * nominal.rho.J));      // J > 0
    CHECK(omega.box.lo(6) == doctest::Approx(1e-6 * nominal.rho.tau_q));  // tau_q > 0
}

TEST_CASE("non-attackable coordinates stay pinned") {
    const ParameterVector nominal = nominal_params();
    std::array<bool, 9> mask{};
    mask[4] = true;  // only the damping coefficient
    const FeasibleAttackSet omega = FeasibleAttackSet::from_deviations(
        nominal, {2e5, 2e5, 20.7}, {0.4, 0.4, 0.4, 0.4, 0.4, 0.4}, mask);
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        if (c == 4) {
            CHECK(!omega.box.is_degenerate(c));
        } else {
            CHECK(omega.box.is_degenerate(c));
            CHECK(omega.box.lo(c) == nominal.coordinate(c));
        }
    }
    CHECK(!omega.is_singleton());

    FeasibleAttackSet broken = omega;
    broken.box.lo(0) += 1.0;
    broken.box.hi(0) = broken.box.lo(0);
    CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("stealth distances follow the two detector norms") {
    const ParameterVector nominal = nominal_params();
    const StealthModel s = demo_stealth();

    ParameterVector v = nominal;
    v.xop.P0 += 0.1 * s.base.S_base;
    v.xop.Q0 -= 0.2 * s.base.S_base;
    v.xop.V0 += 0.02 * s.base.V_base;
    v.rho.Dp *= 1.3;   // +30% relative
    v.rho.Rv *= 0.5;   // -50% relative
    const auto [d_bdd, d_ids] = stealth_distances(v, nominal, s);
    CHECK(d_bdd == doctest::Approx(std::sqrt(0.1 * 0.1 + 0.2 * 0.2 + 0.02 * 0.02)));
    CHECK(d_ids == doctest::Approx(0.5));

    CHECK(stealth_feasible(nominal, nominal, s));
    CHECK(stealth_feasible(v, nominal, s));
    v.rho.Kq *= 2.5;  // +150% > eps2
    CHECK(!stealth_feasible(v, nominal, s));
}

TEST_CASE("feasible projection is idempotent and feasible") {
    const ParameterVector nominal = nominal_params();
    const FeasibleAttackSet omega = FeasibleAttackSet::from_deviations(
        nominal, {2e5, 2e5, 20.7}, {0.4, 0.4, 0.4, 0.4, 1.2, 0.3}, all_attackable());
    const StealthModel s = demo_stealth();

    // A point already feasible is untouched.
    ParameterVector inside = nominal;
    inside.rho.Dp *= 1.1;
    const ParameterVector p_inside = project_feasible(omega, s, inside);
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        CHECK(p_inside.coordinate(c) == doctest::Approx(inside.coordinate(c)));
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        ParameterVector v = nominal;
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            v.set_coordinate(c, omega.box.lo(c) + u(rng) * omega.box.width(c));
        }
        const ParameterVector p1 = project_feasible(omega, s, v);
        const ParameterVector p2 = project_feasible(omega, s, p1);
        CHECK(stealth_feasible(p1, nominal, s));
        CHECK(omega.box.contains(p1, 1e-12));
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            CHECK(std::abs(p2.coordinate(c) - p1.coordinate(c)) <=
                  1e-9 * std::max(1.0, std::abs(p1.coordinate(c))));
        }
    }
}

TEST_CASE("reachable-domain sampling is seeded and stealth-filtered") {
    const RunConfig cfg = demo_two_bus_config();
    const IbrUnit& unit = cfg.system.ibr_at("B2");
    const FeasibleAttackSet omega = cfg.attack_set_for("B2");
    const WhiteboxSurrogate f{VsgPlant{unit.filter, cfg.system.omega0}, omega.box};

    Mode mode;
    mode.lambda0 = Complex(-52.3, 372.0);
    mode.frequency_hz = 59.2;
    mode.participation.P << Complex(10, -3), Complex(2, 1), Complex(-1, 4), Complex(8, 2);

    const ArdCloud a = sample_ard(omega, cfg.stealth, f, mode, 400, 17);
    const ArdCloud b = sample_ard(omega, cfg.stealth, f, mode, 400, 17);
    CHECK(a.n_requested == 400);
    CHECK(a.samples.size() == b.samples.size());
    CHECK(a.n_rejected == b.n_rejected);
    CHECK(a.samples.size() + static_cast<std::size_t>(a.n_rejected) == 401);  // nominal included
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].delta_lambda == b.samples[k].delta_lambda);
    }
    // First sample is the nominal point with zero drift.
    CHECK(a.samples.front().delta_lambda == Complex(0.0, 0.0));
    CHECK(a.samples.front().lambda == mode.lambda0);

    // Drift at the nominal point is exactly zero.
    CHECK(drift(omega.nominal, omega.nominal, f, mode) == Complex(0.0, 0.0));

    // Too few samples for a meaningful domain estimate.
    CHECK_THROWS_AS(sample_ard(omega, cfg.stealth, f, mode, 50, 1), Error);
}

TEST_CASE("over-tight stealth thresholds are reported as such") {
    const RunConfig cfg = demo_two_bus_config();
    const IbrUnit& unit = cfg.system.ibr_at("B2");
    const FeasibleAttackSet omega = cfg.attack_set_for("B2");
    const WhiteboxSurrogate f{VsgPlant{unit.filter, cfg.system.omega0}, omega.box};
    Mode mode;
    mode.lambda0 = Complex(-52.3, 372.0);
    mode.participation.P = DqMatrix::Identity();

    StealthModel tight = demo_stealth();
    tight.eps2 = 0.05;  // rejects nearly every control-parameter change
    try {
        sample_ard(omega, tight, f, mode, 200, 1);
        FAIL("expected an over-constrained feasible set error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OverConstrainedOmega);
    }
}

TEST_CASE("penetration index arithmetic on crafted clouds") {
    Mode mode;
    mode.lambda0 = Complex(-2.0, 100.0);
    ParameterVector v = nominal_params();

    ArdCloud stable;
    stable.mode = mode;
    stable.samples.push_back(ArdSample{v, Complex(0, 0), mode.lambda0, true});
    stable.samples.push_back(ArdSample{v, Complex(1.0, 0.5), mode.lambda0 + Complex(1.0, 0.5), true});
    const ApiResult a = compute_api(stable);
    CHECK(a.branch == ApiBranch::MarginErosion);
    CHECK(a.value == doctest::Approx(0.5));  // 1.0 / |-2|
    CHECK(a.max_re_drift == doctest::Approx(1.0));
    CHECK(a.unstable_fraction == 0.0);

    // Boundary points participate in the worst case.
    ArdCloud with_boundary = stable;
    with_boundary.boundary.push_back(
        ArdSample{v, Complex(1.5, 0.0), mode.lambda0 + Complex(1.5, 0.0), true});
    CHECK(compute_api(with_boundary).value == doctest::Approx(0.75));

    ArdCloud unstable = stable;
    unstable.samples.push_back(ArdSample{v, Complex(3.0, 0.0), Complex(1.0, 100.0), true});
    const ApiResult b = compute_api(unstable);
    CHECK(b.branch == ApiBranch::ReachableInstability);
    CHECK(b.value > 1.0);
    CHECK(b.value <= 2.0);

    Mode bad = mode;
    bad.lambda0 = Complex(0.5, 100.0);
    ArdCloud baseline_unstable;
    baseline_unstable.mode = bad;
    baseline_unstable.samples.push_back(ArdSample{v, Complex(0, 0), bad.lambda0, true});
    CHECK_THROWS_AS(compute_api(baseline_unstable), Error);
}

TEST_CASE("bus aggregation keeps strongly participating modes only") {
    Mode strong;
    strong.lambda0 = Complex(-3, 300);
    strong.frequency_hz = 47.7;
    strong.participation.P = DqMatrix::Identity() * Complex(10.0, 0.0);
    Mode weak = strong;
    weak.frequency_hz = 12.0;
    weak.lambda0 = Complex(-1, 75);
    weak.participation.P = DqMatrix::Identity() * Complex(0.5, 0.0);  // below 0.1 * strong

    ApiResult strong_api;
    strong_api.value = 0.4;
    ApiResult weak_api;
    weak_api.value = 0.9;

    const BusApiReport r =
        bus_report("B2", {{strong, strong_api}, {weak, weak_api}}, 0.1);
    CHECK(r.dominant_mode_set == std::vector<int>{0});
    CHECK(r.bus_api == doctest::Approx(0.4));
    CHECK(r.bus_api_mode_index == 0);

    // Ties break toward the lower frequency.
    Mode strong2 = strong;
    strong2.frequency_hz = 20.0;
    ApiResult tie;
    tie.value = 0.4;
    const BusApiReport t =
        bus_report("B2", {{strong, strong_api}, {strong2, tie}}, 0.1);
    CHECK(t.bus_api_mode_index == 1);
}

TEST_CASE("ascent on a singleton box returns the nominal point") {
    const ParameterVector nominal = nominal_params();
    std::array<bool, 9> none{};
    const FeasibleAttackSet omega =
        FeasibleAttackSet::from_deviations(nominal, {0, 0, 0}, {0, 0, 0, 0, 0, 0}, none);
    CHECK(omega.is_singleton());

    const RunConfig cfg = demo_two_bus_config();
    const IbrUnit& unit = cfg.system.ibr_at("B2");
    const WhiteboxSurrogate f{VsgPlant{unit.filter, cfg.system.omega0}, omega.box};
    Mode mode;
    mode.lambda0 = Complex(-52.3, 372.0);
    mode.participation.P = DqMatrix::Identity();

    const ArdSample best = boundary_ascent(omega, StealthModel::unconstrained(), f, mode, 0.0);
    CHECK(best.delta_lambda == Complex(0.0, 0.0));
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        CHECK(best.v_atk.coordinate(c) == nominal.coordinate(c));
    }
}
