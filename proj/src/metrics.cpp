#include "dcqn/metrics.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/optim.hpp"
#include "dcqn/scengen.hpp"

#include <cmath>

namespace dcqn {
namespace {

void check_lengths(const Vector& y, const Vector& f) {
    if (y.size() != f.size()) throw DimensionError("measurement and forecast lengths differ");
    if (y.size() == 0) throw DimensionError("empty horizon");
}

void check_scenarios(const Vector& y, const Matrix& s) {
    if (s.rows() < 1) throw DimensionError("at least one scenario is required");
    if (s.cols() != y.size()) throw DimensionError("scenario width does not match the measurement");
}

double pinball_term(double y, double q, double u) {
    const double diff = y - q;
    return diff >= 0.0 ? u * diff : (u - 1.0) * diff;
}

}  // namespace

double mae(const Vector& y, const Vector& forecast) {
    check_lengths(y, forecast);
    return (y - forecast).cwiseAbs().mean();
}

double rmse(const Vector& y, const Vector& forecast) {
    check_lengths(y, forecast);
    return std::sqrt((y - forecast).squaredNorm() / static_cast<double>(y.size()));
}

double pinball_score(const Vector& y, const Matrix& curves) {
    const std::vector<double> levels = evaluation_levels();
    return pinball_score(y, curves, levels);
}

double pinball_score(const Vector& y, const Matrix& curves, std::span<const double> levels) {
    if (static_cast<std::size_t>(curves.rows()) != levels.size()) {
        throw DimensionError("expected " + std::to_string(levels.size()) + " quantile curves, got " +
                             std::to_string(curves.rows()));
    }
    if (curves.cols() != y.size()) throw DimensionError("quantile curve width does not match the measurement");
    double total = 0.0;
    for (Eigen::Index i = 0; i < curves.rows(); ++i) {
        for (Eigen::Index t = 0; t < y.size(); ++t) total += pinball_term(y[t], curves(i, t), levels[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(curves.rows() * y.size());
}

double crps_sample(const Vector& y, const Matrix& scenarios) {
    check_scenarios(y, scenarios);
    const Eigen::Index m_count = scenarios.rows();
    const double m = static_cast<double>(m_count);
    double total = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        const auto col = scenarios.col(t);
        const double accuracy = (col.array() - y[t]).abs().sum() / m;
        double spread = 0.0;
        for (Eigen::Index a = 0; a < m_count; ++a) {
            for (Eigen::Index b = 0; b < m_count; ++b) spread += std::abs(col[a] - col[b]);
        }
        total += accuracy - spread / (2.0 * m * m);
    }
    return total / static_cast<double>(y.size());
}

double energy_score(const Vector& y, const Matrix& scenarios) {
    check_scenarios(y, scenarios);
    const Eigen::Index m_count = scenarios.rows();
    const double m = static_cast<double>(m_count);
    double accuracy = 0.0;
    for (Eigen::Index a = 0; a < m_count; ++a) accuracy += (scenarios.row(a).transpose() - y).norm();
    double spread = 0.0;
    for (Eigen::Index a = 0; a < m_count; ++a) {
        for (Eigen::Index b = a + 1; b < m_count; ++b) spread += 2.0 * (scenarios.row(a) - scenarios.row(b)).norm();
    }
    return accuracy / m - spread / (2.0 * m * m);
}

double variogram_score(const Vector& y, const Matrix& scenarios, double order) {
    check_scenarios(y, scenarios);
    const Eigen::Index horizon = y.size();
    const double m = static_cast<double>(scenarios.rows());
    double total = 0.0;
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (Eigen::Index u = 0; u < horizon; ++u) {
            const double observed = std::pow(std::abs(y[t] - y[u]), order);
            const double expected =
                (scenarios.col(t) - scenarios.col(u)).array().abs().pow(order).sum() / m;
            const double d = observed - expected;
            total += d * d;
        }
    }
    return total;
}

SampleMetrics score_sample(const Vector& y, const ModelOutput& output, const MetricOptions& options) {
    return {mae(y, output.point),
            rmse(y, output.point),
            pinball_score(y, output.quantile_curves),
            crps_sample(y, output.scenarios),
            energy_score(y, output.scenarios),
            variogram_score(y, output.scenarios, options.variogram_order)};
}

MetricsReport evaluate(std::span<const ForecastSample> test, const std::map<Date, ModelOutput>& outputs,
                       const std::string& model_id, const MetricOptions& options) {
    if (test.empty()) throw InsufficientDataError("evaluation needs at least one test sample");
    std::string missing;
    std::vector<const ModelOutput*> matched;
    for (const auto& s : test) {
        auto it = outputs.find(s.issue_date());
        if (it == outputs.end()) {
            missing += (missing.empty() ? "" : ", ") + format_date(s.issue_date());
            matched.push_back(nullptr);
        } else {
            matched.push_back(&it->second);
        }
    }
    if (!missing.empty()) throw LookupError("model '" + model_id + "' has no output for: " + missing);

    std::vector<SampleMetrics> per(test.size());
    std::vector<std::exception_ptr> errors(test.size());
    const auto n = static_cast<std::ptrdiff_t>(test.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            per[k] = score_sample(test[k].y(), *matched[k], options);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);

    MetricsReport r;
    r.model_id = model_id;
    r.n_samples = test.size();
    for (const auto& p : per) {
        r.mae += p.mae;
        r.rmse += p.rmse;
        r.ps += p.ps;
        r.crps += p.crps;
        r.es += p.es;
        r.vs += p.vs;
    }
    const double inv = 1.0 / static_cast<double>(per.size());
    r.mae *= inv;
    r.rmse *= inv;
    r.ps *= inv;
    r.crps *= inv;
    r.es *= inv;
    r.vs *= inv;
    return r;
}

}  // namespace dcqn
