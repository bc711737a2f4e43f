#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ardcore/ard_engine.hpp"
#include "ardcore/identification.hpp"
#include "ardcore/network.hpp"
#include "ardcore/surrogate.hpp"
#include "ardcore/types.hpp"

namespace ard {

/// Shortest round-trippable decimal form ("%.17g"); all emitted artifacts
/// use it so reruns are byte-identical.
std::string format_double(double x);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// CSV `omega,re_dd,im_dd,re_dq,im_dq,re_qd,im_qd,re_qq,im_qq`.
std::string spectrum_to_csv(const ImpedanceSpectrum& s);
ImpedanceSpectrum spectrum_from_csv(const std::string& text);

/// CSV `t,id,iq,vd,vq`; dt and experiment id travel in a JSON sidecar.
std::string transient_record_to_csv(const TransientRecord& rec);
std::string transient_record_sidecar_json(const TransientRecord& rec);

/// CSV `re_lambda,im_lambda,stealth_ok,source` with
/// source in {sample, boundary, worst_case}.
std::string ard_cloud_to_csv(const ArdCloud& cloud, const ArdSample* worst_case = nullptr);
std::string ard_cloud_metadata_json(const ArdCloud& cloud, const FeasibleAttackSet& omega);

std::string api_result_to_json(const ApiResult& api);
std::string bus_report_to_json(const BusApiReport& report, double scr);

struct RankingRow {
    std::string bus;
    double api = 0.0;
    std::string branch;
    double scr = 0.0;
    double dominant_mode_hz = 0.0;
};

/// CSV `bus,api,branch,scr_proxy,dominant_mode_hz`, sorted by descending
/// API with ties broken by bus id.
std::string ranking_to_csv(std::vector<RankingRow> rows);

/// Dataset persistence: a manifest JSON plus one spectrum CSV per sample in
/// the given directory.
void save_dataset(const TrainingDataset& d, const std::filesystem::path& dir);
TrainingDataset load_dataset(const std::filesystem::path& dir);

}  // namespace ard
