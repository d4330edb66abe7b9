#include "icc/csvio.hpp"

#include <json.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icc {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

void append_point(std::ostringstream& out, const RocPoint& p) {
    out << format_double(p.target_pfa) << ',' << format_double(p.threshold) << ','
        << format_double(p.empirical_pfa) << ',' << format_double(p.empirical_pd) << ','
        << p.trials_h0 << ',' << p.trials_h1 << '\n';
}

constexpr const char* kRocHeader =
    "target_pfa,threshold,empirical_pfa,empirical_pd,trials_h0,trials_h1";

} // namespace

std::string roc_csv(const RocCurve& curve) {
    std::ostringstream out;
    out << kRocHeader << '\n';
    for (const auto& p : curve.points) append_point(out, p);
    return out.str();
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    for (const auto& name : result.axis_names) out << name << ',';
    out << kRocHeader << '\n';
    for (const auto& row : result.rows) {
        for (double v : row.axis) out << format_double(v) << ',';
        append_point(out, row.point);
    }
    return out.str();
}

std::string constellation_csv(const std::vector<ConstellationRow>& rows) {
    std::ostringstream out;
    out << "slot,sensor,symbol_index,re,im,label\n";
    for (const auto& r : rows)
        out << r.slot << ',' << r.sensor << ',' << r.symbol_index << ','
            << format_double(r.re) << ',' << format_double(r.im) << ',' << r.label << '\n';
    return out.str();
}

std::string loss_csv(const std::vector<double>& epoch_loss) {
    std::ostringstream out;
    out << "epoch,mean_loss\n";
    for (size_t e = 0; e < epoch_loss.size(); ++e)
        out << e << ',' << format_double(epoch_loss[e]) << '\n';
    return out.str();
}

std::string metadata_json(const ScenarioConfig& cfg, uint64_t seed) {
    nlohmann::json j;
    j["scenario"] = nlohmann::json::parse(cfg.to_json_string());
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

std::string RunManifest::to_json_string() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["version"] = version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j.dump(2) + "\n";
}

std::string timestamp_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

} // namespace icc
