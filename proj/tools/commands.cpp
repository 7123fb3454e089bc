#include "commands.hpp"

#include "dcqn/checkpoint.hpp"
#include "dcqn/config.hpp"
#include "dcqn/errors.hpp"
#include "dcqn/export.hpp"
#include "dcqn/io.hpp"
#include "dcqn/manifest.hpp"
#include "dcqn/metrics.hpp"
#include "dcqn/scengen.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace dcqn::cli {
namespace {

namespace fs = std::filesystem;

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

void check_features(std::size_t model_features, std::size_t horizon, const PreparedData& data, const char* what) {
    const auto& probe = data.raw.front();
    if (model_features != static_cast<std::size_t>(probe.features()) ||
        horizon != static_cast<std::size_t>(probe.horizon())) {
        throw Error(std::string(what) + " checkpoint does not match the dataset's covariates");
    }
}

Matrix normalized(const Matrix& raw, const FeatureStats& stats) {
    Matrix x = raw;
    stats.apply(x);
    return x;
}

// Training samples in the normalization a given model was fitted with.
std::vector<ForecastSample> renormalized(std::span<const ForecastSample> raw, const FeatureStats& stats) {
    std::vector<ForecastSample> out;
    out.reserve(raw.size());
    for (const auto& s : raw) out.emplace_back(s.issue_date(), normalized(s.x(), stats), s.y());
    return out;
}

std::span<const ForecastSample> raw_train(const PreparedData& d) {
    return std::span(d.raw).first(d.split.train.size());
}

std::span<const ForecastSample> raw_test(const PreparedData& d) {
    return std::span(d.raw).last(d.split.test.size());
}

const ForecastSample& find_sample(std::span<const ForecastSample> samples, const std::string& date,
                                  const char* where) {
    const Date d = parse_date(date);
    for (const auto& s : samples) {
        if (s.issue_date() == d) return s;
    }
    throw LookupError("date " + date + " is not in the " + where);
}

struct Correlation {
    std::optional<CorrelationModel> dcn;
    std::optional<StaticCopula> copula;

    CholeskyFactor factor_for(const Matrix& raw_x) const {
        if (dcn) return build_cholesky(normalized(raw_x, dcn->feature_stats), *dcn);
        return copula->factor;
    }
    std::string name() const { return dcn ? "dcn" : "static"; }
};

Correlation load_correlation(const std::string& dcn_path, bool static_copula, const QuantileModel& iqn,
                             const PreparedData& data) {
    if (dcn_path.empty() == !static_copula) throw UsageError("pass exactly one of --dcn and --static-copula");
    Correlation c;
    if (!dcn_path.empty()) {
        c.dcn = load_dcn_checkpoint(dcn_path);
        check_features(c.dcn->features, c.dcn->horizon, data, "DCN");
    } else {
        c.copula = fit_static_copula(renormalized(raw_train(data), iqn.feature_stats), iqn);
    }
    return c;
}

class LossLog {
public:
    explicit LossLog(const fs::path& path) : out_(path, std::ios::trunc) {
        if (!out_) throw Error("cannot write loss log '" + path.string() + "'");
        out_ << "epoch,train_loss,validation_loss,best_validation\n" << std::flush;
    }
    void operator()(const EpochRecord& r) {
        out_ << r.epoch << ',' << format_real(r.train_loss) << ',' << format_real(r.validation_loss) << ','
             << format_real(r.best_validation) << '\n'
             << std::flush;
    }

private:
    std::ofstream out_;
};

}  // namespace

void ingest(const IngestOptions& o) {
    const PreparedData data = prepare_data(o.data, CsvSchema::parse(o.schema));
    write_file_atomic(o.out, manifest_to_json(data.manifest));
    const auto& m = data.manifest;
    std::cout << m.records << " records, " << m.samples << " samples (" << m.dropped_days << " incomplete days dropped, "
              << m.clamped << " power values clamped)\n"
              << "train " << m.train.count << " / validation " << m.validation.count << " / test " << m.test.count
              << '\n';
}

void train(const TrainOptions& o) {
    if (o.model != "iqn" && o.model != "dcn") throw UsageError("--model must be iqn or dcn");
    if (o.model == "dcn" && o.iqn.empty()) {
        throw UsageError("DCN training needs a trained IQN first; pass --iqn <checkpoint>");
    }
    RunConfig config = config_or_default(o.config);
    if (o.seed) config.seed = config.train.seed = *o.seed;
    const PreparedData data = load_manifest_data(o.manifest);
    const fs::path log_path = o.log.empty() ? fs::path(o.out + ".loss.csv") : fs::path(o.log);
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    LossLog log(log_path);
    EpochCallback on_epoch = [&log](const EpochRecord& r) { log(r); };

    TrainResult result;
    if (o.model == "iqn") {
        std::optional<QuantileModel> resume;
        if (!o.resume.empty()) resume = load_iqn_checkpoint(o.resume);
        IqnTrainResult r = train_iqn(data.split, config.iqn, config.train, on_epoch, resume ? &resume->params : nullptr);
        save_checkpoint(o.out, r.model);
        result = std::move(r.training);
    } else {
        const QuantileModel iqn = load_iqn_checkpoint(o.iqn);
        check_features(iqn.features, iqn.horizon, data, "IQN");
        if (iqn.feature_stats != data.split.feature_stats) {
            throw Error("IQN checkpoint was trained on a different dataset split");
        }
        std::optional<CorrelationModel> resume;
        if (!o.resume.empty()) resume = load_dcn_checkpoint(o.resume);
        DcnTrainResult r = train_dcn(data.split, iqn, config.dcn, config.train, on_epoch, resume ? &resume->params : nullptr);
        save_checkpoint(o.out, r.model);
        result = std::move(r.training);
    }
    const double best = result.log.empty() ? result.initial_validation : result.log.back().best_validation;
    std::cout << o.model << ": " << result.log.size() << " epochs, best validation loss " << format_real(best)
              << " (epoch " << result.best_epoch << ")\n";
}

void generate(const GenerateOptions& o) {
    if (o.all_test == !o.dates.empty()) throw UsageError("pass either --date or --all-test");
    const RunConfig config = config_or_default(o.config);
    const std::size_t count = o.count.value_or(config.scenarios);
    if (count == 0) throw UsageError("-M must be at least 1");
    const PreparedData data = load_manifest_data(o.manifest);
    const QuantileModel iqn = load_iqn_checkpoint(o.iqn);
    check_features(iqn.features, iqn.horizon, data, "IQN");
    const Correlation corr = load_correlation(o.dcn, o.static_copula, iqn, data);
    const std::string model_id = !o.model_id.empty() ? o.model_id : corr.dcn ? "dcqn" : "static-copula";

    std::vector<const ForecastSample*> targets;
    const auto test = raw_test(data);
    if (o.all_test) {
        for (const auto& s : test) targets.push_back(&s);
    } else {
        for (const auto& d : o.dates) targets.push_back(&find_sample(test, d, "test split"));
    }
    const auto levels = evaluation_levels();
    for (const ForecastSample* s : targets) {
        const Matrix x = normalized(s->x(), iqn.feature_stats);
        ScenarioRecord rec;
        rec.set = generate(x, count, iqn, corr.factor_for(s->x()), o.seed, {model_id, 0, 0, s->issue_date()});
        rec.correlation = corr.name();
        rec.point = point_forecast(x, iqn);
        rec.quantile_curves = marginal_quantile_curves(x, iqn, levels);
        write_scenario_record(o.out, rec);
    }
    std::cout << "wrote " << targets.size() << " scenario sets of " << count << " to " << o.out << '\n';
}

void evaluate(const EvaluateOptions& o) {
    const RunConfig config = config_or_default(o.config);
    const PreparedData data = load_manifest_data(o.manifest);
    std::vector<MetricsReport> reports;
    for (const auto& dir : o.scenario_dirs) {
        const auto records = read_scenario_dir(dir);
        if (records.empty()) throw Error("no scenario files in '" + dir + "'");
        const std::string id = records.front().set.provenance.model_id;
        std::map<Date, ModelOutput> outputs;
        for (const auto& r : records) {
            if (r.set.provenance.model_id != id) throw Error("'" + dir + "' mixes scenarios of several models");
            outputs[r.set.provenance.issue_date] = {r.point, r.quantile_curves, r.set.scenarios};
        }
        reports.push_back(evaluate(data.split.test, outputs, id, config.metrics));
    }
    const fs::path out = o.out;
    write_file_atomic(out / "metrics.json", metrics_json(reports, config.metrics));
    const std::string table = metrics_table(reports);
    write_file_atomic(out / "metrics.txt", table);
    std::cout << table;
}

void export_plots(const ExportOptions& o) {
    if (o.what != "fans" && o.what != "scenarios" && o.what != "covariance") {
        throw UsageError("--what must be fans, scenarios or covariance");
    }
    const PreparedData data = load_manifest_data(o.manifest);
    const QuantileModel iqn = load_iqn_checkpoint(o.iqn);
    check_features(iqn.features, iqn.horizon, data, "IQN");
    std::vector<const ForecastSample*> targets;
    if (o.dates.empty()) {
        for (const auto& s : raw_test(data)) targets.push_back(&s);
    } else {
        for (const auto& d : o.dates) targets.push_back(&find_sample(data.raw, d, "dataset"));
    }
    const fs::path out = o.out;
    if (o.what == "fans") {
        const auto levels = fan_levels();
        for (const ForecastSample* s : targets) {
            const Matrix curves = marginal_quantile_curves(normalized(s->x(), iqn.feature_stats), iqn, levels);
            write_file_atomic(out / ("fan_" + format_date(s->issue_date()) + ".json"),
                              fan_json(s->issue_date(), levels, curves, s->y()));
        }
    } else if (o.what == "scenarios") {
        const Correlation corr = load_correlation(o.dcn, o.static_copula, iqn, data);
        for (const ForecastSample* s : targets) {
            const ScenarioSet set =
                generate(normalized(s->x(), iqn.feature_stats), o.count, iqn, corr.factor_for(s->x()), o.seed);
            write_file_atomic(out / ("scenarios_" + format_date(s->issue_date()) + ".json"),
                              scenario_plot_json(s->issue_date(), set.scenarios, s->y()));
        }
    } else {
        if (o.dcn.empty()) throw UsageError("--what covariance needs --dcn");
        const Correlation dynamic = load_correlation(o.dcn, false, iqn, data);
        const Correlation fixed = load_correlation("", true, iqn, data);
        const std::string static_json = covariance_json("static", std::nullopt, fixed.copula->correlation);
        for (const ForecastSample* s : targets) {
            const std::string date = format_date(s->issue_date());
            write_file_atomic(out / ("covariance_dcn_" + date + ".json"),
                              covariance_json("dcn", s->issue_date(), dynamic.factor_for(s->x()).covariance()));
            write_file_atomic(out / ("covariance_static_" + date + ".json"), static_json);
        }
    }
    std::cout << "wrote " << targets.size() << " " << o.what << " exports to " << o.out << '\n';
}

}  // namespace dcqn::cli
