#pragma once

#include "icc/evaluate.hpp"
#include "icc/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace icc {

// Shortest round-trippable decimal for CSV cells (printf %.12g).
std::string format_double(double v);

std::string roc_csv(const RocCurve& curve);
std::string sweep_csv(const SweepResult& result);
std::string constellation_csv(const std::vector<ConstellationRow>& rows);
std::string loss_csv(const std::vector<double>& epoch_loss);

// Sidecar written next to every CSV: the exact scenario plus the seed.
std::string metadata_json(const ScenarioConfig& cfg, uint64_t seed);

struct RunManifest {
    std::string command;
    std::string config_path;
    uint64_t seed = 0;
    std::string out_dir;
    std::string version;
    std::string started_at;
    std::string finished_at;

    std::string to_json_string() const;
};

std::string timestamp_utc_now();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace icc
