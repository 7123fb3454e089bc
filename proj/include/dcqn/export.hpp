#pragma once

#include "dcqn/metrics.hpp"
#include "dcqn/scengen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcqn {

// Version tag written as `"schema": 1` into every JSON export.
inline constexpr int kExportSchema = 1;

// What `generate` writes for one issue date: <date>.csv holds the M x T
// scenarios, <date>.json the provenance block, point forecast and the
// quantile curves at evaluation_levels().
struct ScenarioRecord {
    ScenarioSet set;
    std::string correlation;  // "dcn" or "static"
    Vector point;
    Matrix quantile_curves;
};

std::string scenario_csv(const Matrix& scenarios);
Matrix parse_scenario_csv(const std::string& text);
std::string scenario_json(const ScenarioRecord& record, const std::string& csv_name);

void write_scenario_record(const std::filesystem::path& dir, const ScenarioRecord& record);
// Every record in a directory written by write_scenario_record, by date.
std::vector<ScenarioRecord> read_scenario_dir(const std::filesystem::path& dir);

std::string metrics_json(const std::vector<MetricsReport>& reports, const MetricOptions& options);
// Aligned text table, one row per model.
std::string metrics_table(const std::vector<MetricsReport>& reports);

std::string fan_json(Date date, const std::vector<double>& levels, const Matrix& curves, const Vector& measured);
std::string scenario_plot_json(Date date, const Matrix& scenarios, const Vector& measured);
// `date` is omitted for the static model, whose matrix does not vary.
std::string covariance_json(const std::string& model, std::optional<Date> date, const Matrix& correlation);

}  // namespace dcqn
