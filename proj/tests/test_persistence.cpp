#include <doctest.h>

#include "dcqn/checkpoint.hpp"
#include "dcqn/config.hpp"
#include "dcqn/errors.hpp"
#include "dcqn/export.hpp"
#include "dcqn/io.hpp"
#include "dcqn/manifest.hpp"
#include "support.hpp"

#include <json.hpp>
#include <unistd.h>
#include <filesystem>
#include <fstream>

using namespace dcqn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("dcqn_persist_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

QuantileModel trained_looking_iqn() {
    IqnConfig cfg;
    cfg.backbone = TcnConfig::with_layers(2, 4, 3);
    cfg.downscale_channels = 3;
    cfg.embed_terms = 5;
    cfg.embed_channels = 2;
    cfg.inversion_grid = 256;
    QuantileModel m = init_iqn(cfg, 2, 6, 11);
    m.feature_stats = {{0.25, -1.0 / 3.0}, {2.0, 1e-300}};
    return m;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("iqn checkpoint round trip is bit exact") {
    const QuantileModel m = trained_looking_iqn();
    const std::string bytes = encode_checkpoint(m);
    CHECK(checkpoint_kind(bytes) == ModelKind::Iqn);
    const QuantileModel back = decode_iqn_checkpoint(bytes);
    CHECK(back.params == m.params);
    CHECK(back.feature_stats == m.feature_stats);
    CHECK(back.features == 2);
    CHECK(back.horizon == 6);
    CHECK(back.config.embed_terms == 5);
    CHECK(back.config.inversion_grid == 256);
    CHECK(back.config.backbone.dilations == m.config.backbone.dilations);
    CHECK(encode_checkpoint(back) == bytes);
}

TEST_CASE("dcn checkpoint round trip through a file") {
    DcnConfig cfg;
    cfg.backbone = TcnConfig::with_layers(3, 5, 2);
    cfg.projection_channels = 7;
    const CorrelationModel m = init_dcn(cfg, 3, 4, 12);
    const TempDir dir;
    const fs::path p = dir.path / "nested" / "dcn.ckpt";
    save_checkpoint(p, m);
    const CorrelationModel back = load_dcn_checkpoint(p);
    CHECK(back.params == m.params);
    CHECK(back.config.projection_channels == 7);
    CHECK_THROWS_AS(load_iqn_checkpoint(p), FormatError);
    CHECK_THROWS_AS(load_dcn_checkpoint(dir.path / "missing.ckpt"), Error);
}

TEST_CASE("checkpoint corruption is rejected") {
    const std::string bytes = encode_checkpoint(trained_looking_iqn());
    std::string version = bytes;
    version[4] = 2;
    try {
        decode_iqn_checkpoint(version);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("version 2") != std::string::npos);
    }
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_iqn_checkpoint(magic), FormatError);
    CHECK_THROWS_AS(decode_iqn_checkpoint(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(decode_iqn_checkpoint(bytes.substr(0, 10)), FormatError);
    CHECK_THROWS_AS(decode_iqn_checkpoint(bytes + "x"), FormatError);
    CHECK_THROWS_AS(decode_dcn_checkpoint(bytes), FormatError);
    CHECK_THROWS_AS(decode_iqn_checkpoint(""), FormatError);
}

TEST_CASE("run config parsing") {
    const RunConfig c = parse_run_config(
        "# comment\n"
        "[backbone]\nlayers = 3\nchannels = 12\nkernel_size = 2\n"
        "[iqn]\nquantile_draws = 4 ; inline\n"
        "[dcn]\nprojection_channels = 9\n"
        "[train]\nlearning_rate = 0.005\nbatch_size = 8\n"
        "[generate]\nscenarios = 50\n"
        "[metrics]\nvariogram_order = 0.5\n"
        "[run]\nseed = 42\n");
    CHECK(c.iqn.backbone.layers == 3);
    CHECK(c.dcn.backbone.channels == 12);
    CHECK(c.iqn.backbone.dilations == std::vector<std::size_t>{1, 2, 4});
    CHECK(c.iqn.quantile_draws == 4);
    CHECK(c.dcn.projection_channels == 9);
    CHECK(c.train.adam.learning_rate == 0.005);
    CHECK(c.train.batch_size == 8);
    CHECK(c.scenarios == 50);
    CHECK(c.metrics.variogram_order == 0.5);
    CHECK(c.seed == 42);
    CHECK(c.train.seed == 42);
    const RunConfig again = parse_run_config(to_string(c));
    CHECK(to_string(again) == to_string(c));

    const RunConfig explicit_dilations = parse_run_config("[backbone]\ndilations = 1,3\nlayers = 2\n");
    CHECK(explicit_dilations.iqn.backbone.dilations == std::vector<std::size_t>{1, 3});
}

TEST_CASE("run config errors") {
    try {
        parse_run_config("[train]\nmax_epochs = 3\nmomentum = 0.9\n");
        FAIL("expected a usage error");
    } catch (const UsageError& e) {
        const std::string what = e.what();
        CHECK(what.find("momentum") != std::string::npos);
        CHECK(what.find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config("[optimizer]\n"), UsageError);
    CHECK_THROWS_AS(parse_run_config("[train]\nbatch_size = many\n"), UsageError);
    CHECK_THROWS_AS(parse_run_config("[train]\nbatch_size = 0\n"), UsageError);
    CHECK_THROWS_AS(parse_run_config("layers = 2\n"), UsageError);
    CHECK_THROWS_AS(parse_run_config("[backbone]\nlayers = 2\ndilations = 1\n"), UsageError);
}

TEST_CASE("scenario files round trip") {
    SeededRng rng(60, 1);
    ScenarioRecord rec;
    rec.set.scenarios = test::random_matrix(rng, 7, 4).array().abs().matrix();
    rec.set.scenarios(0, 0) = 1.0 / 3.0;
    rec.set.provenance = {"dcqn", 123456789012345ULL, 7, test::day(5)};
    rec.correlation = "dcn";
    rec.point = test::random_vector(rng, 4, 0.0, 1.0);
    rec.quantile_curves = test::random_matrix(rng, 19, 4);
    CHECK(parse_scenario_csv(scenario_csv(rec.set.scenarios)) == rec.set.scenarios);
    CHECK_THROWS_AS(parse_scenario_csv("t1,t2\n0.1\n"), RowError);

    const TempDir dir;
    write_scenario_record(dir.path, rec);
    ScenarioRecord second = rec;
    second.set.provenance.issue_date = test::day(2);
    write_scenario_record(dir.path, second);
    write_text(dir.path / "notes.json", R"({"kind": "other"})");
    const auto back = read_scenario_dir(dir.path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].set.provenance.issue_date == test::day(2));
    CHECK(back[1].set.scenarios == rec.set.scenarios);
    CHECK(back[1].set.provenance.seed == rec.set.provenance.seed);
    CHECK(back[1].set.provenance.model_id == "dcqn");
    CHECK(back[1].point == rec.point);
    CHECK(back[1].quantile_curves == rec.quantile_curves);
    CHECK(back[1].correlation == "dcn");
    CHECK_THROWS_AS(read_scenario_dir(dir.path / "absent"), Error);
}

TEST_CASE("json exports") {
    MetricsReport r;
    r.model_id = "dcqn";
    r.mae = 0.125;
    r.n_samples = 3;
    const auto metrics = nlohmann::json::parse(metrics_json({r}, MetricOptions{}));
    CHECK(metrics["schema"] == kExportSchema);
    CHECK(metrics["kind"] == "metrics");
    CHECK(metrics["models"][0]["model_id"] == "dcqn");
    CHECK(metrics["models"][0]["mae"] == 0.125);
    CHECK(metrics_table({r}).find("0.1250") != std::string::npos);

    Matrix corr = Matrix::Identity(3, 3);
    corr(1, 0) = corr(0, 1) = 0.5;
    const auto cov = nlohmann::json::parse(covariance_json("dcn", test::day(1), corr));
    CHECK(cov["kind"] == "covariance");
    CHECK(cov["horizon"] == 3);
    CHECK(cov["matrix"].size() == 9);
    CHECK(cov["matrix"][1] == 0.5);
    CHECK(cov.contains("date"));
    CHECK_FALSE(nlohmann::json::parse(covariance_json("static", std::nullopt, corr)).contains("date"));

    const auto fan = nlohmann::json::parse(fan_json(test::day(0), fan_levels(), Matrix::Zero(9, 3), Vector::Zero(3)));
    CHECK(fan["kind"] == "fans");
    CHECK(fan["levels"].size() == 9);
    const auto plot = nlohmann::json::parse(scenario_plot_json(test::day(0), Matrix::Zero(2, 3), Vector::Zero(3)));
    CHECK(plot["kind"] == "scenarios_plot");
}

TEST_CASE("manifest round trip and staleness") {
    const TempDir dir;
    std::ostringstream csv;
    csv << "TIMESTAMP,TARGETVAR,U10\n";
    for (int d = 0; d < 12; ++d) {
        for (int h = 0; h < 24; ++h) {
            csv << format_date(test::day(d)) << ' ' << (h < 10 ? "0" : "") << h << ":00," << 0.01 * (h + d) << ','
                << h - d << '\n';
        }
    }
    const fs::path data = dir.path / "data.csv";
    write_text(data, csv.str());
    const CsvSchema schema = CsvSchema::parse("timestamp=TIMESTAMP;power=TARGETVAR;covariates=U10");
    const PreparedData prepared = prepare_data(data, schema);
    const Manifest& m = prepared.manifest;
    CHECK(m.records == 288);
    CHECK(m.train.count + m.validation.count + m.test.count == m.samples);
    CHECK(prepared.raw.size() == m.samples);

    const std::string text = manifest_to_json(m);
    const Manifest back = manifest_from_json(text);
    CHECK(manifest_to_json(back) == text);
    CHECK(back.feature_stats == m.feature_stats);
    CHECK(nlohmann::json::parse(text)["kind"] == "manifest");

    const fs::path mpath = dir.path / "manifest.json";
    write_text(mpath, text);
    const PreparedData reloaded = load_manifest_data(mpath);
    CHECK(reloaded.split.feature_stats == prepared.split.feature_stats);
    CHECK(reloaded.split.test.size() == m.test.count);

    write_text(data, csv.str() + format_date(test::day(12)) + " 00:00,0.5,1\n");
    CHECK_THROWS_AS(load_manifest_data(mpath), FormatError);
    CHECK_THROWS_AS(manifest_from_json("{}"), FormatError);
}
