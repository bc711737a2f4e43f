// ardscan: impedance-based attack-reachable-domain scanner for
// inverter-based resources. Subcommands cover the full pipeline: transient
// identification, surrogate fitting, reachable-domain scans, bus ranking
// and the self-contained demo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ardcore/config.hpp"
#include "ardcore/demo.hpp"
#include "ardcore/io.hpp"
#include "ardcore/pipeline.hpp"

namespace {

int exit_code_for(const ard::Error& e) {
    switch (e.code()) {
        case ard::ErrorCode::Config:
            return 2;
        case ard::ErrorCode::OverConstrainedOmega:
            return 4;
        default:
            return 3;
    }
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

ard::RunConfig load_config(const CommonArgs& args) {
    ard::RunConfig cfg = ard::RunConfig::load(args.config_path);
    if (args.seed_set) {
        cfg.assess.seed = args.seed;
        cfg.assess.ard_seed = args.seed;
        cfg.assess.fit.seed = args.seed;
        cfg.assess.dataset.noise_seed = args.seed;
    }
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    if (needs_config) {
        cmd->add_option("--config", args.config_path, "Run configuration JSON")->required();
    }
    cmd->add_option("--out", args.out_dir, "Output directory (default: config output_dir)");
    cmd->add_option("--seed", args.seed, "Override every seed in the config")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impedance-based attack reachable domain scanner"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string bus_id;
    int mode_index = -1;
    std::string dataset_dir;
    std::string format = "csv";

    CLI::App* identify =
        app.add_subcommand("identify", "Synthesize transients and identify spectra");
    add_common(identify, args);

    CLI::App* fit = app.add_subcommand("fit", "Fit the rational impedance surrogate");
    add_common(fit, args);
    fit->add_option("--dataset", dataset_dir, "Dataset directory from 'identify'")->required();

    CLI::App* ard_cmd = app.add_subcommand("ard", "Scan the attack reachable domain of a bus");
    add_common(ard_cmd, args);
    ard_cmd->add_option("--bus", bus_id, "Target IBR bus")->required();
    ard_cmd->add_option("--mode-index", mode_index, "Restrict to one retained mode");

    CLI::App* rank = app.add_subcommand("rank", "Assess and rank every target bus");
    add_common(rank, args);
    rank->add_option("--format", format, "Stdout format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* demo = app.add_subcommand("demo", "Write demo configs and run the full pipeline");
    add_common(demo, args, /*needs_config=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (identify->parsed()) {
            const ard::RunConfig cfg = load_config(args);
            const auto dir = ard::run_identify(cfg, cfg.output_dir);
            std::cout << "dataset written to " << dir.string() << "\n";
        } else if (fit->parsed()) {
            const ard::RunConfig cfg = load_config(args);
            const auto path = ard::run_fit(cfg, dataset_dir, cfg.output_dir);
            std::cout << "surrogate written to " << path.string() << "\n";
        } else if (ard_cmd->parsed()) {
            const ard::RunConfig cfg = load_config(args);
            ard::run_ard(cfg, bus_id, mode_index, cfg.output_dir);
            std::cout << "reachable-domain artifacts written to " << cfg.output_dir << "\n";
        } else if (rank->parsed()) {
            const ard::RunConfig cfg = load_config(args);
            const ard::RankingReport report = ard::run_rank(cfg, cfg.output_dir);
            if (format == "json") {
                std::cout << "{\"spearman_vs_scr\": "
                          << ard::format_double(report.spearman_vs_scr) << "}\n";
            } else {
                std::cout << ard::ranking_to_csv(report.rows);
            }
        } else if (demo->parsed()) {
            const std::string out = args.out_dir.empty() ? "out/demo" : args.out_dir;
            ard::run_demo(out);
            std::cout << "demo artifacts written to " << out << "\n";
        }
    } catch (const ard::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
