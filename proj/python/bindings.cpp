#include "dcqn/checkpoint.hpp"
#include "dcqn/config.hpp"
#include "dcqn/dcn.hpp"
#include "dcqn/errors.hpp"
#include "dcqn/export.hpp"
#include "dcqn/gaussian.hpp"
#include "dcqn/iqn.hpp"
#include "dcqn/manifest.hpp"
#include "dcqn/metrics.hpp"
#include "dcqn/scengen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace dcqn;

namespace {

RunConfig config_from(const std::optional<std::string>& text) { return text ? parse_run_config(*text) : RunConfig{}; }

const ForecastSample& find_sample(const PreparedData& data, const std::string& date) {
    const Date d = parse_date(date);
    for (const auto* part : {&data.split.train, &data.split.validation, &data.split.test}) {
        for (const auto& s : *part) {
            if (s.issue_date() == d) return s;
        }
    }
    throw LookupError("date " + date + " is not in the data set");
}

std::vector<Vector> rows_of(const Matrix& m) {
    std::vector<Vector> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).transpose());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dynamic-copula quantile network scenario generation";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", error.ptr());
    py::register_exception<FormatError>(m, "FormatError", error.ptr());
    py::register_exception<LookupError>(m, "NotFoundError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", error.ptr());

    // Scoring rules. Scenario and curve matrices are rows x horizon.
    m.def("mae", &mae, py::arg("y"), py::arg("forecast"));
    m.def("rmse", &rmse, py::arg("y"), py::arg("forecast"));
    m.def("pinball_score", py::overload_cast<const Vector&, const Matrix&>(&pinball_score), py::arg("y"),
          py::arg("curves"), "Mean pinball loss over the 19 levels 0.05..0.95.");
    m.def("crps", &crps_sample, py::arg("y"), py::arg("scenarios"));
    m.def("energy_score", &energy_score, py::arg("y"), py::arg("scenarios"));
    m.def("variogram_score", &variogram_score, py::arg("y"), py::arg("scenarios"), py::arg("order") = 2.0);
    m.def("evaluation_levels", &evaluation_levels);
    m.def("fan_levels", &fan_levels);

    m.def("std_normal_cdf", py::vectorize(&std_normal_cdf));
    m.def("std_normal_quantile", py::vectorize(&std_normal_quantile));
    m.def(
        "fit_static_copula",
        [](const Matrix& cdf_values) { return fit_static_copula(rows_of(cdf_values)).correlation; },
        py::arg("cdf_values"), "Correlation of the Gaussianized rows of an N x T matrix of CDF values.");

    py::class_<ForecastSample>(m, "Sample")
        .def_property_readonly("date", [](const ForecastSample& s) { return format_date(s.issue_date()); })
        .def_property_readonly("x", [](const ForecastSample& s) { return Matrix(s.x()); })
        .def_property_readonly("y", [](const ForecastSample& s) { return Vector(s.y()); });

    py::class_<PreparedData>(m, "Dataset")
        .def_static("ingest", [](const std::filesystem::path& data, const std::string& schema) {
            return prepare_data(data, CsvSchema::parse(schema));
        }, py::arg("data"), py::arg("schema"))
        .def_static("from_manifest", &load_manifest_data, py::arg("path"))
        .def("manifest_json", [](const PreparedData& d) { return manifest_to_json(d.manifest); })
        .def_property_readonly("train", [](const PreparedData& d) { return d.split.train; })
        .def_property_readonly("validation", [](const PreparedData& d) { return d.split.validation; })
        .def_property_readonly("test", [](const PreparedData& d) { return d.split.test; })
        .def("sample", &find_sample, py::arg("date"), py::return_value_policy::copy);

    py::class_<QuantileModel>(m, "QuantileModel")
        .def_static("load", &load_iqn_checkpoint, py::arg("path"))
        .def("save", [](const QuantileModel& q, const std::filesystem::path& p) { save_checkpoint(p, q); })
        .def_readonly("features", &QuantileModel::features)
        .def_readonly("horizon", &QuantileModel::horizon)
        .def("forward", [](const QuantileModel& q, const Matrix& x, const Vector& u) { return iqn_forward(x, u, q); },
             py::arg("x"), py::arg("u"))
        .def("point_forecast", [](const QuantileModel& q, const Matrix& x) { return point_forecast(x, q); },
             py::arg("x"))
        .def("quantile_curves",
             [](const QuantileModel& q, const Matrix& x, const std::vector<double>& levels) {
                 return marginal_quantile_curves(x, q, levels);
             },
             py::arg("x"), py::arg("levels"))
        .def("cdf", [](const QuantileModel& q, const Matrix& x, const Vector& y) {
            return invert_marginals(x, y, q, q.config.inversion_grid);
        }, py::arg("x"), py::arg("y"));

    py::class_<CorrelationModel>(m, "CorrelationModel")
        .def_static("load", &load_dcn_checkpoint, py::arg("path"))
        .def("save", [](const CorrelationModel& c, const std::filesystem::path& p) { save_checkpoint(p, c); })
        .def("cholesky", [](const CorrelationModel& c, const Matrix& x) { return build_cholesky(x, c).matrix(); },
             py::arg("x"))
        .def("correlation", [](const CorrelationModel& c, const Matrix& x) { return build_cholesky(x, c).covariance(); },
             py::arg("x"));

    m.def(
        "train_iqn",
        [](const PreparedData& data, const std::optional<std::string>& config) {
            const RunConfig cfg = config_from(config);
            py::gil_scoped_release release;
            return train_iqn(data.split, cfg.iqn, cfg.train).model;
        },
        py::arg("data"), py::arg("config") = py::none(), "Train the IQN; `config` is run-config text.");
    m.def(
        "train_dcn",
        [](const PreparedData& data, const QuantileModel& iqn, const std::optional<std::string>& config) {
            const RunConfig cfg = config_from(config);
            py::gil_scoped_release release;
            return train_dcn(data.split, iqn, cfg.dcn, cfg.train).model;
        },
        py::arg("data"), py::arg("iqn"), py::arg("config") = py::none());

    m.def(
        "generate",
        [](const Matrix& x, std::size_t count, const QuantileModel& iqn, const Matrix& lower, std::uint64_t seed) {
            return generate(x, count, iqn, CholeskyFactor(lower), seed).scenarios;
        },
        py::arg("x"), py::arg("count"), py::arg("iqn"), py::arg("cholesky"), py::arg("seed") = 0,
        "count x horizon scenarios for covariates x under the given lower Cholesky factor.");
    m.def(
        "covariance_json",
        [](const std::string& model, std::optional<std::string> date, const Matrix& r) {
            return covariance_json(model, date ? std::optional<Date>(parse_date(*date)) : std::nullopt, r);
        },
        py::arg("model"), py::arg("date"), py::arg("correlation"));
}
