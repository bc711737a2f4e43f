#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ardcore/config.hpp"
#include "ardcore/io.hpp"

namespace ard {

/// Gray-box identification stage: seeded dataset of identified impedance
/// spectra for the first target bus, persisted with a manifest plus the
/// transient fixtures of the first sample. Returns the dataset directory.
std::filesystem::path run_identify(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Fits the rational surrogate to a persisted dataset; writes
/// surrogate.json. Returns its path.
std::filesystem::path run_fit(const RunConfig& cfg, const std::filesystem::path& dataset_dir,
                              const std::filesystem::path& out_dir);

/// Reachable-domain scan of one bus: cloud CSV, metadata JSON and
/// worst-case JSON per retained mode (or only mode_index when >= 0).
void run_ard(const RunConfig& cfg, const std::string& bus_id, int mode_index,
             const std::filesystem::path& out_dir);

struct RankingReport {
    std::vector<RankingRow> rows;        // sorted as in the CSV
    double spearman_vs_scr = 1.0;        // API ranking vs SCR ranking
    std::vector<std::string> discordant; // most discordant bus pair
};

/// Per-bus assessment of every target, ranking CSV and per-bus reports.
RankingReport run_rank(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Writes the shipped demo configs and runs the full pipeline on them:
/// identify+fit+ard on the four-bus demo, rank on the multi-bus demo.
void run_demo(const std::filesystem::path& out_dir);

/// Writes the resolved configuration next to the artifacts (defaults made
/// explicit) so every run is self-describing.
void write_effective_config(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ard
