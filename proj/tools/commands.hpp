#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcqn::cli {

struct IngestOptions {
    std::string data;
    std::string schema;
    std::string out;
};

struct TrainOptions {
    std::string model;  // iqn | dcn
    std::string manifest;
    std::string out;
    std::string config;
    std::string iqn;
    std::string resume;
    std::string log;
    std::optional<std::uint64_t> seed;
};

struct GenerateOptions {
    std::string iqn;
    std::string dcn;
    bool static_copula = false;
    std::string manifest;
    std::vector<std::string> dates;
    bool all_test = false;
    std::optional<std::size_t> count;
    std::uint64_t seed = 0;
    std::string out;
    std::string model_id;
    std::string config;
};

struct EvaluateOptions {
    std::vector<std::string> scenario_dirs;
    std::string manifest;
    std::string out;
    std::string config;
};

struct ExportOptions {
    std::string what;  // fans | scenarios | covariance
    std::vector<std::string> dates;
    std::string out;
    std::string manifest;
    std::string iqn;
    std::string dcn;
    bool static_copula = false;
    std::size_t count = 100;
    std::uint64_t seed = 0;
};

void ingest(const IngestOptions& options);
void train(const TrainOptions& options);
void generate(const GenerateOptions& options);
void evaluate(const EvaluateOptions& options);
void export_plots(const ExportOptions& options);

}  // namespace dcqn::cli
