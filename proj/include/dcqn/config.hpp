#pragma once

#include "dcqn/dcn.hpp"
#include "dcqn/iqn.hpp"
#include "dcqn/metrics.hpp"
#include "dcqn/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace dcqn {

// Line-oriented `key = value` text grouped in [sections]; `#` and `;` start
// comments. Unknown sections and keys are UsageErrors, as are malformed
// values.
//
//   [backbone]  layers channels kernel_size dilations
//   [iqn]       downscale_channels embed_terms embed_channels quantile_draws inversion_grid
//   [dcn]       projection_channels
//   [train]     learning_rate beta1 beta2 epsilon batch_size patience max_epochs
//   [generate]  scenarios
//   [metrics]   variogram_order
//   [run]       seed
struct RunConfig {
    IqnConfig iqn;
    DcnConfig dcn;
    TrainConfig train;
    std::size_t scenarios = 100;
    MetricOptions metrics;
    std::uint64_t seed = 0;

    // Throws UsageError naming the offending field.
    void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_string(const RunConfig& config);

}  // namespace dcqn
