#include "ardcore/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ardcore/demo.hpp"
#include "ardcore/network.hpp"

#include "json.hpp"

namespace ard {

void write_effective_config(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    write_text_file(out_dir / "effective_config.json", cfg.to_json_string());
}

std::filesystem::path run_identify(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    const std::string& bus = cfg.targets.front();
    const IbrUnit& unit = cfg.system.ibr_at(bus);
    const VsgPlant plant{unit.filter, cfg.system.omega0};
    const FeasibleAttackSet omega = cfg.attack_set_for(bus);

    DatasetOptions opts = cfg.assess.dataset;
    opts.mode = DatasetMode::ViaEra;

    const auto params = lhs_sample(omega.box, cfg.assess.dataset_size, cfg.assess.seed);
    TrainingDataset dataset = generate_dataset(plant, params, cfg.grid, omega.box, opts);
    dataset.sampling_seed = cfg.assess.seed;

    const std::filesystem::path dataset_dir = out_dir / "dataset";
    save_dataset(dataset, dataset_dir);

    // Transient fixtures for the first sample (audit trail of the
    // identification path).
    std::vector<TransientRecord> records;
    identify_spectrum_via_era(plant, dataset.params.front(), cfg.grid, opts, &records);
    for (const TransientRecord& rec : records) {
        const std::string stem = "transient_exp" + std::to_string(rec.experiment_id);
        write_text_file(out_dir / (stem + ".csv"), transient_record_to_csv(rec));
        write_text_file(out_dir / (stem + ".json"), transient_record_sidecar_json(rec));
    }
    write_effective_config(cfg, out_dir);
    return dataset_dir;
}

std::filesystem::path run_fit(const RunConfig& cfg, const std::filesystem::path& dataset_dir,
                              const std::filesystem::path& out_dir) {
    cfg.validate();
    const TrainingDataset dataset = load_dataset(dataset_dir);
    SurrogateFitOptions fit = cfg.assess.fit;
    fit.seed = cfg.assess.seed;
    const RationalSurrogate surrogate = fit_surrogate(dataset, fit);
    const std::filesystem::path path = out_dir / "surrogate.json";
    write_text_file(path, surrogate.to_json_string() + "\n");
    write_effective_config(cfg, out_dir);
    return path;
}

void run_ard(const RunConfig& cfg, const std::string& bus_id, int mode_index,
             const std::filesystem::path& out_dir) {
    cfg.validate();
    require(std::find(cfg.targets.begin(), cfg.targets.end(), bus_id) != cfg.targets.end(),
            ErrorCode::Config, "bus '" + bus_id + "' is not a configured target");

    const FeasibleAttackSet omega = cfg.attack_set_for(bus_id);
    const BusAssessment a = assess_bus(cfg.system, bus_id, omega, cfg.stealth, cfg.assess);
    require(mode_index < static_cast<int>(a.clouds.size()), ErrorCode::Config,
            "mode index out of range");

    for (int k = 0; k < static_cast<int>(a.clouds.size()); ++k) {
        if (mode_index >= 0 && k != mode_index) continue;
        const ArdCloud& cloud = a.clouds[static_cast<std::size_t>(k)];
        const ApiResult& api = a.report.per_mode[static_cast<std::size_t>(k)].second;
        const std::string stem = "ard_" + bus_id + "_mode" + std::to_string(k);
        write_text_file(out_dir / (stem + ".csv"),
                        ard_cloud_to_csv(cloud, &api.worst_case));
        write_text_file(out_dir / (stem + "_meta.json"),
                        ard_cloud_metadata_json(cloud, omega));
        write_text_file(out_dir / (stem + "_worst.json"), api_result_to_json(api));
    }
    write_text_file(out_dir / ("report_" + bus_id + ".json"),
                    bus_report_to_json(a.report, a.scr));
    write_effective_config(cfg, out_dir);
}

namespace {

// Ranks with average tie handling, largest value = rank 1.
std::vector<double> descending_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::vector<double> ra = descending_ranks(a);
    const std::vector<double> rb = descending_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da <= 0.0 || db <= 0.0) return 1.0;
    return num / std::sqrt(da * db);
}

}  // namespace

RankingReport run_rank(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();

    RankingReport report;
    std::vector<double> api_values, vulnerability_by_weakness;
    for (const std::string& bus : cfg.targets) {
        const FeasibleAttackSet omega = cfg.attack_set_for(bus);
        const BusAssessment a = assess_bus(cfg.system, bus, omega, cfg.stealth, cfg.assess);
        write_text_file(out_dir / ("report_" + bus + ".json"),
                        bus_report_to_json(a.report, a.scr));

        const auto& [mode, api] =
            a.report.per_mode[static_cast<std::size_t>(a.report.bus_api_mode_index)];
        RankingRow row;
        row.bus = bus;
        row.api = a.report.bus_api;
        row.branch = api.branch == ApiBranch::MarginErosion ? "margin_erosion"
                                                            : "reachable_instability";
        row.scr = a.scr;
        row.dominant_mode_hz = mode.frequency_hz;
        report.rows.push_back(row);

        api_values.push_back(row.api);
        // weaker grid = lower SCR; a strength-monotone API would rank
        // exactly by 1/SCR
        vulnerability_by_weakness.push_back(1.0 / row.scr);
    }

    report.spearman_vs_scr = spearman(api_values, vulnerability_by_weakness);

    // Most discordant pair: i more vulnerable than j although i sits on the
    // stronger grid.
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        for (std::size_t j = 0; j < report.rows.size(); ++j) {
            const auto& a = report.rows[i];
            const auto& b = report.rows[j];
            if (a.api > b.api && a.scr > b.scr) {
                const double gap = (a.api - b.api) * (a.scr - b.scr);
                if (gap > worst_gap) {
                    worst_gap = gap;
                    report.discordant = {a.bus, b.bus};
                }
            }
        }
    }

    write_text_file(out_dir / "ranking.csv", ranking_to_csv(report.rows));
    nlohmann::ordered_json j;
    j["spearman_vs_scr"] = report.spearman_vs_scr;
    j["discordant_buses"] = report.discordant;
    write_text_file(out_dir / "ranking_report.json", j.dump(2) + "\n");
    write_effective_config(cfg, out_dir);

    std::sort(report.rows.begin(), report.rows.end(),
              [](const RankingRow& a, const RankingRow& b) {
                  if (a.api != b.api) return a.api > b.api;
                  return a.bus < b.bus;
              });
    return report;
}

void run_demo(const std::filesystem::path& out_dir) {
    RunConfig four_bus = demo_four_bus_config();
    RunConfig multibus = demo_multibus_config();

    write_text_file(out_dir / "four_bus_config.json", four_bus.to_json_string());
    write_text_file(out_dir / "multibus_config.json", multibus.to_json_string());

    const std::filesystem::path four_dir = out_dir / "four_bus";
    const std::filesystem::path dataset_dir = run_identify(four_bus, four_dir);
    run_fit(four_bus, dataset_dir, four_dir);
    run_ard(four_bus, four_bus.targets.front(), -1, four_dir);

    run_rank(multibus, out_dir / "multibus");
}

}  // namespace ard
