#pragma once

#include "dcqn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <vector>

namespace dcqn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool operator==(const AdamConfig&) const = default;
};

class Adam {
public:
    Adam(const ParameterSet& like, AdamConfig config);
    void step(ParameterSet& params, const ParameterSet& grads);

private:
    AdamConfig config_;
    ParameterSet first_;
    ParameterSet second_;
    std::uint64_t steps_ = 0;
};

struct TrainConfig {
    AdamConfig adam;
    std::size_t batch_size = 32;
    std::size_t patience = 20;
    std::size_t max_epochs = 500;
    std::uint64_t seed = 0;
    bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double validation_loss = 0.0;
    double best_validation = 0.0;
};

struct TrainResult {
    ParameterSet best;
    std::vector<EpochRecord> log;
    double initial_validation = 0.0;
    std::size_t best_epoch = 0;  // 0 when the initialization was never beaten
};

// Mean loss over `indices` with the mean gradient written to `grads`
// (zero on entry).
using BatchObjective = std::function<double(std::span<const std::size_t> indices, const ParameterSet& params,
                                            ParameterSet& grads, std::size_t epoch, std::size_t batch)>;
using ValidationObjective = std::function<double(const ParameterSet& params)>;
using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam with per-epoch shuffling (seeded Shuffle stream) and early
// stopping on validation loss. The initialization counts as a candidate, so
// the returned parameters never validate worse than the starting point.
// Throws TrainingError on a non-finite loss.
TrainResult fit(ParameterSet init, std::size_t train_count, const BatchObjective& objective,
                const ValidationObjective& validation, const TrainConfig& config,
                const EpochCallback& on_epoch = {});

// Per-sample losses and gradients evaluated in parallel, then reduced in
// index order so results do not depend on the thread count. Returns the mean
// loss; `grads` receives the mean gradient.
double parallel_mean_gradient(std::size_t count,
                              const std::function<double(std::size_t i, ParameterSet& grads)>& per_sample,
                              ParameterSet& grads);

// Rethrows the lowest-index captured exception, if any. Used to carry
// errors out of parallel loops deterministically.
void rethrow_first(const std::vector<std::exception_ptr>& errors);

// Mean of per-sample values, evaluated in parallel, summed in index order.
double parallel_mean(std::size_t count, const std::function<double(std::size_t i)>& per_sample);

}  // namespace dcqn
