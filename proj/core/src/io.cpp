#include "ardcore/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ard {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Input, "cannot open '" + path.string() + "' for writing");
    out << content;
    require(out.good(), ErrorCode::Input, "write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Input, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        require(pos == s.size(), ErrorCode::Input, std::string("trailing junk in ") + context);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::Input,
                    std::string("cannot parse number '") + s + "' in " + context);
    }
}

}  // namespace

std::string spectrum_to_csv(const ImpedanceSpectrum& s) {
    std::ostringstream out;
    out << "omega,re_dd,im_dd,re_dq,im_dq,re_qd,im_qd,re_qq,im_qq\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const DqMatrix& z = s.values[i];
        out << format_double(s.grid[i]);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                out << ',' << format_double(z(r, c).real()) << ','
                    << format_double(z(r, c).imag());
            }
        }
        out << '\n';
    }
    return out.str();
}

ImpedanceSpectrum spectrum_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Input, "empty spectrum CSV");
    std::vector<double> omegas;
    std::vector<DqMatrix> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        require(cells.size() == 9, ErrorCode::Input, "spectrum CSV row needs 9 columns");
        omegas.push_back(parse_double(cells[0], "spectrum CSV"));
        DqMatrix z;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                const std::size_t base = 1 + 2 * static_cast<std::size_t>(2 * r + c);
                z(r, c) = Complex(parse_double(cells[base], "spectrum CSV"),
                                  parse_double(cells[base + 1], "spectrum CSV"));
            }
        }
        values.push_back(z);
    }
    return ImpedanceSpectrum(FrequencyGrid(std::move(omegas)), std::move(values));
}

std::string transient_record_to_csv(const TransientRecord& rec) {
    std::ostringstream out;
    out << "t,id,iq,vd,vq\n";
    for (std::size_t k = 0; k < rec.outputs.size(); ++k) {
        out << format_double(static_cast<double>(k) * rec.dt) << ','
            << format_double(rec.inputs[k](0)) << ',' << format_double(rec.inputs[k](1)) << ','
            << format_double(rec.outputs[k](0)) << ',' << format_double(rec.outputs[k](1))
            << '\n';
    }
    return out.str();
}

std::string transient_record_sidecar_json(const TransientRecord& rec) {
    nlohmann::ordered_json j;
    j["dt"] = rec.dt;
    j["experiment_id"] = rec.experiment_id;
    j["samples"] = rec.outputs.size();
    return j.dump(2) + "\n";
}

namespace {

void append_cloud_row(std::ostringstream& out, const ArdSample& s, const char* source) {
    out << format_double(s.lambda.real()) << ',' << format_double(s.lambda.imag()) << ','
        << (s.stealth_ok ? 1 : 0) << ',' << source << '\n';
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string ard_cloud_to_csv(const ArdCloud& cloud, const ArdSample* worst_case) {
    std::ostringstream out;
    out << "re_lambda,im_lambda,stealth_ok,source\n";
    for (const auto& s : cloud.samples) append_cloud_row(out, s, "sample");
    for (const auto& s : cloud.boundary) append_cloud_row(out, s, "boundary");
    if (worst_case) append_cloud_row(out, *worst_case, "worst_case");
    return out.str();
}

std::string ard_cloud_metadata_json(const ArdCloud& cloud, const FeasibleAttackSet& omega) {
    std::ostringstream digest_src;
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        digest_src << format_double(omega.box.lo(c)) << '|' << format_double(omega.box.hi(c))
                   << '|' << omega.attackable[static_cast<std::size_t>(c)] << ';';
    }
    nlohmann::ordered_json j;
    j["mode"]["lambda0_re"] = cloud.mode.lambda0.real();
    j["mode"]["lambda0_im"] = cloud.mode.lambda0.imag();
    j["mode"]["frequency_hz"] = cloud.mode.frequency_hz;
    j["mode"]["damping_ratio"] = cloud.mode.damping_ratio;
    j["seed"] = cloud.seed;
    j["n_requested"] = cloud.n_requested;
    j["n_rejected"] = cloud.n_rejected;
    j["n_samples"] = cloud.samples.size();
    j["n_boundary"] = cloud.boundary.size();
    j["omega_digest"] = fnv1a(digest_src.str());
    return j.dump(2) + "\n";
}

namespace {

const char* branch_name(ApiBranch b) {
    return b == ApiBranch::MarginErosion ? "margin_erosion" : "reachable_instability";
}

nlohmann::ordered_json api_json(const ApiResult& api) {
    nlohmann::ordered_json j;
    j["value"] = api.value;
    j["branch"] = branch_name(api.branch);
    j["max_re_drift"] = api.max_re_drift;
    j["unstable_fraction"] = api.unstable_fraction;
    j["worst_case"]["delta_lambda_re"] = api.worst_case.delta_lambda.real();
    j["worst_case"]["delta_lambda_im"] = api.worst_case.delta_lambda.imag();
    j["worst_case"]["lambda_re"] = api.worst_case.lambda.real();
    j["worst_case"]["lambda_im"] = api.worst_case.lambda.imag();
    std::vector<double> v(ParameterVector::kDim);
    for (int c = 0; c < ParameterVector::kDim; ++c) {
        v[static_cast<std::size_t>(c)] = api.worst_case.v_atk.coordinate(c);
    }
    j["worst_case"]["v_atk"] = v;
    return j;
}

}  // namespace

std::string api_result_to_json(const ApiResult& api) { return api_json(api).dump(2) + "\n"; }

std::string bus_report_to_json(const BusApiReport& report, double scr) {
    nlohmann::ordered_json j;
    j["bus"] = report.bus_id;
    j["bus_api"] = report.bus_api;
    j["bus_api_mode_index"] = report.bus_api_mode_index;
    j["dominant_mode_set"] = report.dominant_mode_set;
    j["scr_proxy"] = scr;
    nlohmann::ordered_json modes = nlohmann::ordered_json::array();
    for (const auto& [mode, api] : report.per_mode) {
        nlohmann::ordered_json m;
        m["lambda0_re"] = mode.lambda0.real();
        m["lambda0_im"] = mode.lambda0.imag();
        m["frequency_hz"] = mode.frequency_hz;
        m["damping_ratio"] = mode.damping_ratio;
        m["participation_fro"] = mode.participation.P.norm();
        m["api"] = api_json(api);
        modes.push_back(m);
    }
    j["modes"] = modes;
    return j.dump(2) + "\n";
}

std::string ranking_to_csv(std::vector<RankingRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (a.api != b.api) return a.api > b.api;
        return a.bus < b.bus;
    });
    std::ostringstream out;
    out << "bus,api,branch,scr_proxy,dominant_mode_hz\n";
    for (const auto& r : rows) {
        out << r.bus << ',' << format_double(r.api) << ',' << r.branch << ','
            << format_double(r.scr) << ',' << format_double(r.dominant_mode_hz) << '\n';
    }
    return out.str();
}

void save_dataset(const TrainingDataset& d, const std::filesystem::path& dir) {
    d.validate();
    std::filesystem::create_directories(dir);

    nlohmann::ordered_json manifest;
    manifest["format"] = "ardscan-dataset";
    manifest["version"] = 1;
    manifest["grid"] = d.grid.points();
    manifest["bounds"]["lo"] = std::vector<double>(d.bounds.lo.data(), d.bounds.lo.data() + 9);
    manifest["bounds"]["hi"] = std::vector<double>(d.bounds.hi.data(), d.bounds.hi.data() + 9);
    manifest["sampling_seed"] = d.sampling_seed;
    manifest["skipped"] = d.skipped;
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < d.params.size(); ++i) {
        std::vector<double> v(ParameterVector::kDim);
        for (int c = 0; c < ParameterVector::kDim; ++c) {
            v[static_cast<std::size_t>(c)] = d.params[i].coordinate(c);
        }
        params.push_back(v);
        char name[32];
        std::snprintf(name, sizeof(name), "spectrum_%04zu.csv", i);
        files.push_back(std::string(name));
        write_text_file(dir / name, spectrum_to_csv(d.spectra[i]));
    }
    manifest["params"] = params;
    manifest["spectra"] = files;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

TrainingDataset load_dataset(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Dataset,
                    std::string("dataset manifest parse error: ") + e.what());
    }
    require(manifest.value("format", "") == "ardscan-dataset" &&
                manifest.value("version", 0) == 1,
            ErrorCode::Dataset, "unrecognized dataset manifest");

    TrainingDataset d{{},
                      {},
                      FrequencyGrid(manifest.at("grid").get<std::vector<double>>()),
                      CoordinateBounds{},
                      manifest.value("sampling_seed", std::uint64_t{0}),
                      manifest.value("skipped", std::vector<std::string>{})};
    const auto lo = manifest.at("bounds").at("lo").get<std::vector<double>>();
    const auto hi = manifest.at("bounds").at("hi").get<std::vector<double>>();
    require(lo.size() == 9 && hi.size() == 9, ErrorCode::Dataset, "bad bounds in manifest");
    for (int c = 0; c < 9; ++c) {
        d.bounds.lo(c) = lo[static_cast<std::size_t>(c)];
        d.bounds.hi(c) = hi[static_cast<std::size_t>(c)];
    }
    const auto params = manifest.at("params");
    const auto files = manifest.at("spectra");
    require(params.size() == files.size(), ErrorCode::Dataset,
            "manifest params/spectra length mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto v = params[i].get<std::vector<double>>();
        require(v.size() == 9, ErrorCode::Dataset, "bad parameter row in manifest");
        Eigen::Matrix<double, ParameterVector::kDim, 1> vec;
        for (int c = 0; c < 9; ++c) vec(c) = v[static_cast<std::size_t>(c)];
        d.params.push_back(ParameterVector::from_vector(vec));
        d.spectra.push_back(
            spectrum_from_csv(read_text_file(dir / files[i].get<std::string>())));
    }
    d.validate();
    return d;
}

}  // namespace ard
