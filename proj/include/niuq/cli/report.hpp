#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "niuq/errors.hpp"

namespace niuq::cli {

// One table row: an inference mode or a baseline, with ordered named metrics.
struct ReportRow {
    std::string label;
    std::vector<std::pair<std::string, double>> metrics;

    const double* find(const std::string& key) const {
        for (const auto& [k, v] : metrics)
            if (k == key) return &v;
        return nullptr;
    }
};

struct RunReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string canonical_config;  // full config document for reproduction
    std::vector<std::string> notes;
    std::vector<ReportRow> rows;
    std::vector<std::string> artifacts;
    double wall_time_seconds = 0.0;  // report.txt only; never serialized to JSON
};

// Aligned-column table over the union of metric keys (first-seen order).
std::string render_report_table(const RunReport& report);

// Writes <dir>/report.txt (header, table, wall time) and the machine-readable
// twin <dir>/report.json (no wall time, so repeated runs are byte-identical).
void emit_report(const RunReport& report, const std::string& dir);

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
RunReport load_report(const std::string& json_path);

}  // namespace niuq::cli
