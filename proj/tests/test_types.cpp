#include "doctest.h"

#include "ardcore/types.hpp"

using namespace ard;

TEST_CASE("log-spaced grid is monotone with equal ratios") {
    const FrequencyGrid g = FrequencyGrid::log_spaced(2.0 * M_PI, 2.0 * M_PI * 200.0, 50);
    CHECK(g.size() == 50);
    CHECK(g.low() == doctest::Approx(2.0 * M_PI));
    CHECK(g.high() == doctest::Approx(2.0 * M_PI * 200.0));
    const double ratio = g[1] / g[0];
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] > g[i - 1]);
        CHECK(g[i] / g[i - 1] == doctest::Approx(ratio).epsilon(1e-10));
    }
}

TEST_CASE("linear-spaced grid has equal steps and exact endpoints") {
    const FrequencyGrid g = FrequencyGrid::linear_spaced(10.0, 100.0, 10);
    CHECK(g.size() == 10);
    CHECK(g.low() == doctest::Approx(10.0));
    CHECK(g.high() == doctest::Approx(100.0));
    const double step = g[1] - g[0];
    CHECK(step == doctest::Approx(10.0));
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] - g[i - 1] == doctest::Approx(step).epsilon(1e-12));
    }
}

TEST_CASE("grid constructors reject bad input") {
    CHECK_THROWS_AS(FrequencyGrid::log_spaced(0.0, 100.0, 20), Error);
    CHECK_THROWS_AS(FrequencyGrid::log_spaced(100.0, 10.0, 20), Error);
    CHECK_THROWS_AS(FrequencyGrid::linear_spaced(1.0, 100.0, 4), Error);
    CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{1, 2, 3, 4, 5, 6, 7}), Error);
    CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{2, 1, 3, 4, 5, 6, 7, 8}), Error);
    CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{-1, 1, 2, 3, 4, 5, 6, 7}), Error);
}

TEST_CASE("default band covers 1-200 Hz") {
    const FrequencyGrid g = FrequencyGrid::default_band();
    CHECK(g.size() == 400);
    CHECK(g.low() == doctest::Approx(2.0 * M_PI));
    CHECK(g.high() == doctest::Approx(2.0 * M_PI * 200.0));
}

TEST_CASE("series RL impedance carries the synchronous coupling") {
    const double r = 0.5, l = 1e-3, w0 = 2.0 * M_PI * 60.0;
    const Complex s(0.0, 2.0 * M_PI * 25.0);
    const DqMatrix z = dq_rl_impedance(r, l, w0, s);
    CHECK(z(0, 0) == z(1, 1));
    CHECK(std::abs(z(0, 0) - (r + s * l)) == doctest::Approx(0.0));
    CHECK(z(0, 1).real() == doctest::Approx(-w0 * l));
    CHECK(z(1, 0).real() == doctest::Approx(w0 * l));
    CHECK(z(0, 1).imag() == doctest::Approx(0.0));
}

TEST_CASE("parameter vector coordinate access round-trips") {
    ParameterVector v;
    v.xop = OperatingPoint{8e5, 1e5, 690.0};
    v.rho = ControlParams{800.0, 5000.0, 1e-4, 0.05, 0.02, 2e-4};

    const auto vec = v.to_vector();
    const ParameterVector back = ParameterVector::from_vector(vec);
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        CHECK(back.coordinate(c) == v.coordinate(c));
    }

    ParameterVector w = v;
    w.set_coordinate(4, 1234.0);
    CHECK(w.rho.Dp == 1234.0);
    CHECK(ParameterVector::coordinate_names()[4] == "Dp");
    CHECK(ParameterVector::is_xop_coordinate(2));
    CHECK(!ParameterVector::is_xop_coordinate(3));
}

TEST_CASE("parameter validation enforces the physical floors") {
    ParameterVector v;
    v.xop = OperatingPoint{8e5, 1e5, 690.0};
    v.rho = ControlParams{800.0, 5000.0, 1e-4, 0.05, 0.02, 2e-4};
    CHECK_NOTHROW(v.validate());

    ParameterVector bad = v;
    bad.rho.J = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = v;
    bad.rho.Rv = -1e-6;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = v;
    bad.rho.tau_q = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = v;
    bad.xop.V0 = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = v;
    bad.rho.Dp = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = v;
    bad.rho.Lv = -1e-9;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("grid equivalent and per-unit base validate") {
    GridEquivalent g{0.005, 2e-4, 2.0 * M_PI * 60.0};
    CHECK_NOTHROW(g.validate());
    g.Lg = 0.0;
    CHECK_THROWS_AS(g.validate(), Error);

    const PerUnitBase base{1e6, 690.0};
    CHECK(base.Z_base() == doctest::Approx(690.0 * 690.0 / 1e6));
}
