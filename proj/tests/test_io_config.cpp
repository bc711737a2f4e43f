#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <random>

#include "json.hpp"

#include "ardcore/demo.hpp"
#include "ardcore/io.hpp"

using namespace ard;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* tag)
        : path(std::filesystem::temp_directory_path() /
               (std::string("ardscan-test-") + tag + "-" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ImpedanceSpectrum random_spectrum(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const FrequencyGrid grid = FrequencyGrid::log_spaced(2 * M_PI, 2 * M_PI * 200, n);
    std::vector<DqMatrix> values;
    for (int k = 0; k < n; ++k) {
        DqMatrix z;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) z(r, c) = Complex(u(rng), u(rng));
        }
        values.push_back(z);
    }
    return ImpedanceSpectrum(grid, std::move(values));
}

}  // namespace

TEST_CASE("decimal formatting round-trips doubles exactly") {
    for (double x : {0.0, 1.0, -1.0 / 3.0, 1e-17, 6.02214076e23, M_PI, 5e-308}) {
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("spectrum CSV round-trips bit for bit") {
    const ImpedanceSpectrum s = random_spectrum(21, 24);
    const std::string text = spectrum_to_csv(s);
    const ImpedanceSpectrum back = spectrum_from_csv(text);
    REQUIRE(back.grid == s.grid);
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        CHECK((back.values[k] - s.values[k]).norm() == 0.0);
    }
    // Serializing again yields the identical text.
    CHECK(spectrum_to_csv(back) == text);

    CHECK_THROWS_AS(spectrum_from_csv("omega\n1,2\n"), Error);
    CHECK_THROWS_AS(spectrum_from_csv("h\n1,2,3,4,x,6,7,8,9\n"), Error);
}

TEST_CASE("transient record CSV and sidecar") {
    TransientRecord rec;
    rec.dt = 2e-4;
    rec.experiment_id = 2;
    rec.inputs = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d::Zero()};
    rec.outputs = {Eigen::Vector2d(0.3, -0.1), Eigen::Vector2d(0.2, -0.05)};

    const std::string csv = transient_record_to_csv(rec);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,id,iq,vd,vq");
    std::getline(in, line);
    CHECK(line == "0,1,0,0.29999999999999999,-0.10000000000000001");

    const auto j = nlohmann::json::parse(transient_record_sidecar_json(rec));
    CHECK(j.at("dt").get<double>() == 2e-4);
    CHECK(j.at("experiment_id").get<int>() == 2);
    CHECK(j.at("samples").get<int>() == 2);
}

TEST_CASE("cloud CSV labels sample, boundary and worst-case rows") {
    ArdCloud cloud;
    cloud.mode.lambda0 = Complex(-2, 50);
    cloud.samples.push_back(ArdSample{ParameterVector{}, Complex(0, 0), Complex(-2, 50), true});
    cloud.boundary.push_back(ArdSample{ParameterVector{}, Complex(1, 0), Complex(-1, 50), true});
    const std::string csv = ard_cloud_to_csv(cloud, &cloud.boundary.front());
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "re_lambda,im_lambda,stealth_ok,source");
    std::getline(in, line);
    CHECK(line == "-2,50,1,sample");
    std::getline(in, line);
    CHECK(line == "-1,50,1,boundary");
    std::getline(in, line);
    CHECK(line == "-1,50,1,worst_case");
}

TEST_CASE("ranking CSV sorts by descending index with id tiebreak") {
    std::vector<RankingRow> rows = {{"B5", 0.4, "margin_erosion", 3.0, 40.0},
                                    {"B3", 1.2, "reachable_instability", 5.0, 9.0},
                                    {"B7", 0.4, "margin_erosion", 2.0, 35.0}};
    const std::string csv = ranking_to_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "bus,api,branch,scr_proxy,dominant_mode_hz");
    std::getline(in, line);
    CHECK(line.rfind("B3,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("B5,", 0) == 0);  // tie with B7 broken by bus id
    std::getline(in, line);
    CHECK(line.rfind("B7,", 0) == 0);
}

TEST_CASE("report JSON carries the penetration-index fields") {
    ApiResult api;
    api.value = 1.25;
    api.branch = ApiBranch::ReachableInstability;
    api.max_re_drift = 3.5;
    api.unstable_fraction = 0.25;
    const auto j = nlohmann::json::parse(api_result_to_json(api));
    CHECK(j.at("value").get<double>() == 1.25);
    CHECK(j.at("branch").get<std::string>() == "reachable_instability");
    CHECK(j.at("unstable_fraction").get<double>() == 0.25);
    CHECK(j.at("worst_case").contains("v_atk"));

    Mode mode;
    mode.lambda0 = Complex(-3, 2 * M_PI * 12);
    mode.frequency_hz = 12.0;
    mode.participation.P = DqMatrix::Identity();
    BusApiReport report = bus_report("B3", {{mode, api}});
    const auto jr = nlohmann::json::parse(bus_report_to_json(report, 4.2));
    CHECK(jr.at("bus").get<std::string>() == "B3");
    CHECK(jr.at("bus_api").get<double>() == 1.25);
    CHECK(jr.at("scr_proxy").get<double>() == 4.2);
    REQUIRE(jr.at("modes").size() == 1);
    CHECK(jr.at("modes")[0].at("frequency_hz").get<double>() == 12.0);
}

TEST_CASE("dataset persistence round-trips") {
    const RunConfig cfg = demo_four_bus_config();
    const IbrUnit& unit = cfg.system.ibr_at("B3");
    const VsgPlant plant{unit.filter, cfg.system.omega0};
    const CoordinateBounds box = cfg.attack_set_for("B3").box;
    const FrequencyGrid grid = FrequencyGrid::linear_spaced(2 * M_PI, 2 * M_PI * 200, 12);
    TrainingDataset d = generate_dataset(plant, lhs_sample(box, 6, 3), grid, box);
    d.sampling_seed = 3;

    TempDir dir("dataset");
    save_dataset(d, dir.path);
    CHECK(std::filesystem::exists(dir.path / "manifest.json"));
    CHECK(std::filesystem::exists(dir.path / "spectrum_0005.csv"));

    const TrainingDataset back = load_dataset(dir.path);
    REQUIRE(back.params.size() == d.params.size());
    CHECK(back.grid == d.grid);
    CHECK(back.sampling_seed == 3);
    for (std::size_t i = 0; i < d.params.size(); ++i) {
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            CHECK(back.params[i].coordinate(c) == d.params[i].coordinate(c));
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            CHECK((back.spectra[i].values[k] - d.spectra[i].values[k]).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(load_dataset(dir.path / "missing"), Error);
}

TEST_CASE("run configuration JSON round-trips for every demo") {
    for (const RunConfig& cfg :
         {demo_two_bus_config(), demo_four_bus_config(), demo_multibus_config()}) {
        const std::string text = cfg.to_json_string();
        const RunConfig back = RunConfig::from_json_string(text);
        CHECK(back.to_json_string() == text);
        CHECK(back.targets == cfg.targets);
        CHECK(back.grid.size() == cfg.grid.size());
        CHECK(back.grid.low() == doctest::Approx(cfg.grid.low()).epsilon(1e-15));
        CHECK(back.grid.high() == doctest::Approx(cfg.grid.high()).epsilon(1e-15));
        CHECK(back.assess.seed == cfg.assess.seed);
        CHECK(back.assess.ard_seed == cfg.assess.ard_seed);
        CHECK(back.stealth.eps1 == cfg.stealth.eps1);
    }
}

TEST_CASE("config validation failures are explicit") {
    const std::string text = demo_two_bus_config().to_json_string();

    // Seeds are mandatory: no entropy defaults.
    {
        auto j = nlohmann::json::parse(text);
        j["surrogate"].erase("seed");
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), ConfigError);
    }
    {
        auto j = nlohmann::json::parse(text);
        j["ard"].erase("seed");
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), ConfigError);
    }
    {
        auto j = nlohmann::json::parse(text);
        j["grid"]["spacing"] = "quadratic";
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), Error);
    }
    {
        auto j = nlohmann::json::parse(text);
        j["targets"] = {"B1"};  // slack, not an IBR bus
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), Error);
    }
    {
        auto j = nlohmann::json::parse(text);
        j["attack"]["attackable"].push_back("Kz");  // unknown coordinate
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), ConfigError);
    }
    {
        auto j = nlohmann::json::parse(text);
        j["ard"]["n_samples"] = 10;
        CHECK_THROWS_AS(RunConfig::from_json_string(j.dump()), Error);
    }
    CHECK_THROWS_AS(RunConfig::from_json_string("not json"), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), ConfigError);
}
