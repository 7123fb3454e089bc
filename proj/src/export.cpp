#include "dcqn/export.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/io.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dcqn {
namespace {

using nlohmann::ordered_json;

ordered_json row_json(const Vector& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

ordered_json matrix_json(const Matrix& m) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(row_json(m.row(r).transpose()));
    return out;
}

Matrix matrix_from(const ordered_json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw FormatError("ragged matrix in JSON export");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

ordered_json header(const char* kind) {
    ordered_json j;
    j["schema"] = kExportSchema;
    j["kind"] = kind;
    return j;
}

}  // namespace

std::string scenario_csv(const Matrix& s) {
    std::string out;
    for (Eigen::Index t = 0; t < s.cols(); ++t) out += (t ? ",t" : "t") + std::to_string(t + 1);
    out += '\n';
    for (Eigen::Index m = 0; m < s.rows(); ++m) {
        for (Eigen::Index t = 0; t < s.cols(); ++t) {
            if (t) out += ',';
            out += format_real(s(m, t));
        }
        out += '\n';
    }
    return out;
}

Matrix parse_scenario_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("scenario CSV is empty");
    const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t start = 0;
        Eigen::Index n = 0;
        while (start <= line.size()) {
            const auto end = std::min(line.find(',', start), line.size());
            double v = 0.0;
            const auto res = std::from_chars(line.data() + start, line.data() + end, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + end) throw RowError(line_no, "bad scenario value");
            values.push_back(v);
            ++n;
            start = end + 1;
        }
        if (n != cols) throw RowError(line_no, "expected " + std::to_string(cols) + " scenario values");
    }
    const auto rows = static_cast<Eigen::Index>(values.size()) / cols;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

std::string scenario_json(const ScenarioRecord& rec, const std::string& csv_name) {
    ordered_json j = header("scenarios");
    const auto& p = rec.set.provenance;
    j["provenance"] = {{"model_id", p.model_id},
                       {"seed", p.seed},
                       {"count", p.count},
                       {"issue_date", format_date(p.issue_date)},
                       {"correlation", rec.correlation}};
    j["horizon"] = rec.set.scenarios.cols();
    j["scenarios_csv"] = csv_name;
    j["point_forecast"] = row_json(rec.point);
    j["quantile_levels"] = evaluation_levels();
    j["quantile_curves"] = matrix_json(rec.quantile_curves);
    return j.dump(2) + "\n";
}

void write_scenario_record(const std::filesystem::path& dir, const ScenarioRecord& rec) {
    const std::string stem = format_date(rec.set.provenance.issue_date);
    write_file_atomic(dir / (stem + ".csv"), scenario_csv(rec.set.scenarios));
    write_file_atomic(dir / (stem + ".json"), scenario_json(rec, stem + ".csv"));
}

std::vector<ScenarioRecord> read_scenario_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("scenario directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ScenarioRecord> out;
    for (const auto& path : files) {
        try {
            const ordered_json j = ordered_json::parse(read_file(path));
            if (!j.contains("kind") || j["kind"] != "scenarios") continue;
            if (j.at("schema") != kExportSchema) throw FormatError("unsupported export schema");
            ScenarioRecord rec;
            const auto& p = j.at("provenance");
            rec.set.provenance.model_id = p.at("model_id");
            rec.set.provenance.seed = p.at("seed");
            rec.set.provenance.count = p.at("count");
            rec.set.provenance.issue_date = parse_date(p.at("issue_date"));
            rec.correlation = p.at("correlation");
            rec.set.scenarios = parse_scenario_csv(read_file(dir / j.at("scenarios_csv").get<std::string>()));
            const Matrix point = matrix_from(ordered_json::array({j.at("point_forecast")}));
            rec.point = point.row(0).transpose();
            rec.quantile_curves = matrix_from(j.at("quantile_curves"));
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    return out;
}

std::string metrics_json(const std::vector<MetricsReport>& reports, const MetricOptions& options) {
    ordered_json j = header("metrics");
    j["variogram_order"] = options.variogram_order;
    j["models"] = ordered_json::array();
    for (const auto& r : reports) {
        j["models"].push_back({{"model_id", r.model_id},
                               {"n_samples", r.n_samples},
                               {"mae", r.mae},
                               {"rmse", r.rmse},
                               {"ps", r.ps},
                               {"crps", r.crps},
                               {"es", r.es},
                               {"vs", r.vs}});
    }
    return j.dump(2) + "\n";
}

std::string metrics_table(const std::vector<MetricsReport>& reports) {
    std::size_t width = 5;
    for (const auto& r : reports) width = std::max(width, r.model_id.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "Model" << std::right;
    for (const char* h : {"MAE", "RMSE", "PS", "CRPS", "ES", "VS"}) out << std::setw(10) << h;
    out << std::setw(8) << "N" << '\n';
    for (const auto& r : reports) {
        out << std::left << std::setw(static_cast<int>(width)) << r.model_id << std::right << std::fixed
            << std::setprecision(4);
        for (double v : {r.mae, r.rmse, r.ps, r.crps, r.es, r.vs}) out << std::setw(10) << v;
        out << std::setw(8) << r.n_samples << '\n';
    }
    return out.str();
}

std::string fan_json(Date date, const std::vector<double>& levels, const Matrix& curves, const Vector& measured) {
    ordered_json j = header("fans");
    j["date"] = format_date(date);
    j["levels"] = levels;
    j["quantiles"] = matrix_json(curves);
    j["measured"] = row_json(measured);
    return j.dump(2) + "\n";
}

std::string scenario_plot_json(Date date, const Matrix& scenarios, const Vector& measured) {
    ordered_json j = header("scenarios_plot");
    j["date"] = format_date(date);
    j["scenarios"] = matrix_json(scenarios);
    j["measured"] = row_json(measured);
    return j.dump(2) + "\n";
}

std::string covariance_json(const std::string& model, std::optional<Date> date, const Matrix& r) {
    ordered_json j = header("covariance");
    j["model"] = model;
    if (date) j["date"] = format_date(*date);
    j["horizon"] = r.rows();
    const Eigen::Map<const Vector> flat(r.data(), r.size());
    j["matrix"] = row_json(flat);  // row-major T x T
    return j.dump(2) + "\n";
}

}  // namespace dcqn
