#include "commands.hpp"

#include "dcqn/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace dcqn::cli;
    CLI::App app{"Day-ahead renewable scenario generation with dynamic copulas and implicit quantile networks"};
    app.require_subcommand(1);

    IngestOptions ingest_opts;
    auto* ingest_cmd = app.add_subcommand("ingest", "Load a CSV file and write a dataset manifest");
    ingest_cmd->add_option("--data", ingest_opts.data, "CSV file")->required();
    ingest_cmd->add_option("--schema", ingest_opts.schema,
                           "Column mapping, e.g. timestamp=TIMESTAMP;power=TARGETVAR;covariates=U10,V10")
        ->required();
    ingest_cmd->add_option("--out", ingest_opts.out, "Manifest JSON to write")->required();

    TrainOptions train_opts;
    std::uint64_t train_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "Train the IQN or, given an IQN, the DCN");
    train_cmd->add_option("--model", train_opts.model, "iqn or dcn")->required()->check(CLI::IsMember({"iqn", "dcn"}));
    train_cmd->add_option("--manifest", train_opts.manifest, "Dataset manifest from ingest")->required();
    train_cmd->add_option("--out", train_opts.out, "Checkpoint to write")->required();
    train_cmd->add_option("--config", train_opts.config, "Run configuration file");
    train_cmd->add_option("--iqn", train_opts.iqn, "Trained IQN checkpoint (required for --model dcn)");
    train_cmd->add_option("--resume", train_opts.resume, "Checkpoint whose parameters initialize training");
    train_cmd->add_option("--log", train_opts.log, "Epoch loss CSV (default: <out>.loss.csv)");
    auto* seed_opt = train_cmd->add_option("--seed", train_seed, "Overrides [run] seed");

    GenerateOptions gen_opts;
    std::size_t gen_count = 0;
    auto* gen_cmd = app.add_subcommand("generate", "Generate scenarios for test-split dates");
    gen_cmd->add_option("--iqn", gen_opts.iqn, "IQN checkpoint")->required();
    auto* dcn_opt = gen_cmd->add_option("--dcn", gen_opts.dcn, "DCN checkpoint");
    auto* static_opt = gen_cmd->add_flag("--static-copula", gen_opts.static_copula,
                                         "Use a static Gaussian copula fitted on the train split");
    dcn_opt->excludes(static_opt);
    gen_cmd->add_option("--manifest", gen_opts.manifest, "Dataset manifest")->required();
    auto* date_opt = gen_cmd->add_option("--date", gen_opts.dates, "Issue date YYYY-MM-DD (repeatable)");
    auto* all_opt = gen_cmd->add_flag("--all-test", gen_opts.all_test, "Every test-split date");
    date_opt->excludes(all_opt);
    auto* count_opt = gen_cmd->add_option("-M,--scenarios", gen_count, "Scenarios per date (default 100)");
    gen_cmd->add_option("--seed", gen_opts.seed, "Scenario seed");
    gen_cmd->add_option("--out", gen_opts.out, "Output directory")->required();
    gen_cmd->add_option("--model-id", gen_opts.model_id, "Model name recorded in provenance");
    gen_cmd->add_option("--config", gen_opts.config, "Run configuration file");

    EvaluateOptions eval_opts;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score scenario directories on the test split");
    eval_cmd->add_option("--scenarios-dir", eval_opts.scenario_dirs, "Output of generate (repeatable)")->required();
    eval_cmd->add_option("--manifest", eval_opts.manifest, "Dataset manifest")->required();
    eval_cmd->add_option("--out", eval_opts.out, "Directory for metrics.json and metrics.txt")->required();
    eval_cmd->add_option("--config", eval_opts.config, "Run configuration file");

    ExportOptions exp_opts;
    std::string exp_dates;
    auto* exp_cmd = app.add_subcommand("export-plots", "Write JSON plot data");
    exp_cmd->add_option("--what", exp_opts.what, "fans, scenarios or covariance")
        ->required()
        ->check(CLI::IsMember({"fans", "scenarios", "covariance"}));
    exp_cmd->add_option("--dates", exp_dates, "Comma-separated dates (default: every test date)");
    exp_cmd->add_option("--out", exp_opts.out, "Output directory")->required();
    exp_cmd->add_option("--manifest", exp_opts.manifest, "Dataset manifest")->required();
    exp_cmd->add_option("--iqn", exp_opts.iqn, "IQN checkpoint")->required();
    auto* exp_dcn = exp_cmd->add_option("--dcn", exp_opts.dcn, "DCN checkpoint");
    auto* exp_static = exp_cmd->add_flag("--static-copula", exp_opts.static_copula, "Static copula scenarios");
    exp_dcn->excludes(exp_static);
    exp_cmd->add_option("-M,--scenarios", exp_opts.count, "Scenarios per date for --what scenarios");
    exp_cmd->add_option("--seed", exp_opts.seed, "Scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest_cmd) {
            ingest(ingest_opts);
        } else if (*train_cmd) {
            if (*seed_opt) train_opts.seed = train_seed;
            train(train_opts);
        } else if (*gen_cmd) {
            if (*count_opt) gen_opts.count = gen_count;
            generate(gen_opts);
        } else if (*eval_cmd) {
            evaluate(eval_opts);
        } else if (*exp_cmd) {
            std::stringstream in(exp_dates);
            std::string d;
            while (std::getline(in, d, ',')) {
                if (!d.empty()) exp_opts.dates.push_back(d);
            }
            export_plots(exp_opts);
        }
    } catch (const dcqn::UsageError& e) {
        std::cerr << "dcqn: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "dcqn: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
