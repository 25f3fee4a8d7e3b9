#include "niuq/cli/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "niuq/nn/checkpoint.hpp"

namespace niuq::cli {

namespace {

std::string fmt_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string render_report_table(const RunReport& report) {
    // union of metric keys in first-seen order
    std::vector<std::string> keys;
    for (const auto& row : report.rows)
        for (const auto& [k, v] : row.metrics)
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"run"};
    header.insert(header.end(), keys.begin(), keys.end());
    cells.push_back(header);
    for (const auto& row : report.rows) {
        std::vector<std::string> line{row.label};
        for (const auto& k : keys) {
            const double* v = row.find(k);
            line.push_back(v ? fmt_metric(*v) : "-");
        }
        cells.push_back(line);
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::ostringstream out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            if (c) out << "  ";
            out << cells[r][c];
            for (std::size_t p = cells[r][c].size(); p < width[c]; ++p) out << ' ';
        }
        out << "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
            out << std::string(total, '-') << "\n";
        }
    }
    return out.str();
}

std::string report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["format"] = "niuq-report-v1";
    j["experiment"] = r.experiment;
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["config"] = r.canonical_config;
    j["notes"] = r.notes;
    j["artifacts"] = r.artifacts;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json jr;
        jr["label"] = row.label;
        jr["metrics"] = nlohmann::json::array();
        for (const auto& [k, v] : row.metrics)
            jr["metrics"].push_back({{"name", k}, {"value", v}, {"value_hex", nn::double_to_hex(v)}});
        j["rows"].push_back(jr);
    }
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "niuq-report-v1") throw IoError("unknown report format");
    RunReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.canonical_config = j.at("config").get<std::string>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
        ReportRow row;
        row.label = jr.at("label").get<std::string>();
        for (const auto& jm : jr.at("metrics"))
            row.metrics.emplace_back(jm.at("name").get<std::string>(),
                                     nn::hex_to_double(jm.at("value_hex").get<std::string>()));
        r.rows.push_back(std::move(row));
    }
    return r;
}

RunReport load_report(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot read report: " + json_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void emit_report(const RunReport& r, const std::string& dir) {
    {
        std::ofstream txt(dir + "/report.txt", std::ios::binary);
        if (!txt) throw IoError("cannot write report.txt in " + dir);
        txt << "experiment:  " << r.experiment << "\n";
        txt << "seed:        " << r.seed << "\n";
        txt << "config hash: " << r.config_hash << "\n";
        for (const auto& n : r.notes) txt << "note: " << n << "\n";
        txt << "\n" << render_report_table(r) << "\n";
        for (const auto& a : r.artifacts) txt << "artifact: " << a << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "wall time: %.2f s\n", r.wall_time_seconds);
        txt << buf;
    }
    std::ofstream js(dir + "/report.json", std::ios::binary);
    if (!js) throw IoError("cannot write report.json in " + dir);
    js << report_to_json(r);
}

}  // namespace niuq::cli
