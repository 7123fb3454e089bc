#include "dcqn/manifest.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/io.hpp"

#include <json.hpp>

namespace dcqn {
namespace {

using nlohmann::ordered_json;

SplitRange range_of(const std::vector<ForecastSample>& part) {
    SplitRange r;
    r.count = part.size();
    if (!part.empty()) {
        r.first = format_date(part.front().issue_date());
        r.last = format_date(part.back().issue_date());
    }
    return r;
}

ordered_json range_json(const SplitRange& r) { return {{"count", r.count}, {"first", r.first}, {"last", r.last}}; }

SplitRange range_from(const ordered_json& j) { return {j.at("count"), j.at("first"), j.at("last")}; }

bool same(const SplitRange& a, const SplitRange& b) {
    return a.count == b.count && a.first == b.first && a.last == b.last;
}

}  // namespace

PreparedData prepare_data(const std::filesystem::path& data, const CsvSchema& schema) {
    const LoadResult loaded = load_csv(data, schema);
    SampleBuild built = build_samples(loaded.records);
    PreparedData out;
    out.raw = built.samples;
    out.split = split_and_normalize(std::move(built.samples));
    Manifest& m = out.manifest;
    m.data_path = data.string();
    m.schema = schema;
    m.covariates = loaded.covariate_names;
    m.records = loaded.records.size();
    m.clamped = loaded.clamped;
    m.dropped_days = built.dropped_days;
    m.samples = out.raw.size();
    m.train = range_of(out.split.train);
    m.validation = range_of(out.split.validation);
    m.test = range_of(out.split.test);
    m.feature_stats = out.split.feature_stats;
    return out;
}

std::string manifest_to_json(const Manifest& m) {
    ordered_json j;
    j["schema"] = 1;
    j["kind"] = "manifest";
    j["data"] = m.data_path;
    j["columns"] = m.schema.to_string();
    j["covariates"] = m.covariates;
    j["records"] = m.records;
    j["clamped"] = m.clamped;
    j["dropped_days"] = m.dropped_days;
    j["samples"] = m.samples;
    j["splits"] = {{"train", range_json(m.train)},
                   {"validation", range_json(m.validation)},
                   {"test", range_json(m.test)}};
    j["feature_stats"] = {{"mean", m.feature_stats.mean}, {"stddev", m.feature_stats.stddev}};
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        if (j.at("schema") != 1 || j.at("kind") != "manifest") throw FormatError("not a schema-1 dataset manifest");
        Manifest m;
        m.data_path = j.at("data");
        m.schema = CsvSchema::parse(j.at("columns"));
        m.covariates = j.at("covariates").get<std::vector<std::string>>();
        m.records = j.at("records");
        m.clamped = j.at("clamped");
        m.dropped_days = j.at("dropped_days");
        m.samples = j.at("samples");
        m.train = range_from(j.at("splits").at("train"));
        m.validation = range_from(j.at("splits").at("validation"));
        m.test = range_from(j.at("splits").at("test"));
        m.feature_stats.mean = j.at("feature_stats").at("mean").get<std::vector<double>>();
        m.feature_stats.stddev = j.at("feature_stats").at("stddev").get<std::vector<double>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
}

PreparedData load_manifest_data(const std::filesystem::path& manifest_path) {
    const Manifest expected = manifest_from_json(read_file(manifest_path));
    std::filesystem::path data = expected.data_path;
    if (data.is_relative() && !std::filesystem::exists(data)) data = manifest_path.parent_path() / data;
    PreparedData out = prepare_data(data, expected.schema);
    const Manifest& got = out.manifest;
    if (got.samples != expected.samples || !same(got.train, expected.train) ||
        !same(got.validation, expected.validation) || !same(got.test, expected.test) ||
        got.covariates != expected.covariates) {
        throw FormatError("data file '" + data.string() + "' no longer matches manifest '" + manifest_path.string() +
                          "'; rerun ingest");
    }
    out.manifest.data_path = expected.data_path;
    return out;
}

}  // namespace dcqn
