#pragma once

#include "dcqn/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dcqn {

struct SplitRange {
    std::size_t count = 0;
    std::string first;  // YYYY-MM-DD, empty when count == 0
    std::string last;
};

// Everything `ingest` learns about a data file; later commands reload the
// data through it and verify that nothing changed.
struct Manifest {
    std::string data_path;
    CsvSchema schema;
    std::vector<std::string> covariates;
    std::size_t records = 0;
    std::size_t clamped = 0;
    std::size_t dropped_days = 0;
    std::size_t samples = 0;
    SplitRange train, validation, test;
    FeatureStats feature_stats;
};

struct PreparedData {
    Manifest manifest;
    DatasetSplit split;  // covariates z-scored with the train statistics
    // Same samples with raw covariates, in chronological order.
    std::vector<ForecastSample> raw;
};

PreparedData prepare_data(const std::filesystem::path& data, const CsvSchema& schema);

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);

// Reloads the data named by the manifest; throws FormatError when the
// counts or date ranges no longer match.
PreparedData load_manifest_data(const std::filesystem::path& manifest_path);

}  // namespace dcqn
