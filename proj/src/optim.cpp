#include "dcqn/optim.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/rng.hpp"

#include <cmath>
#include <exception>
#include <numeric>

namespace dcqn {

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Adam::Adam(const ParameterSet& like, AdamConfig config)
    : config_(config), first_(like.zeros_like()), second_(like.zeros_like()) {}

void Adam::step(ParameterSet& params, const ParameterSet& grads) {
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    auto p = params.begin();
    auto g = grads.begin();
    auto m = first_.begin();
    auto v = second_.begin();
    for (; p != params.end(); ++p, ++g, ++m, ++v) {
        auto& pv = p->second.values;
        const auto& gv = g->second.values;
        auto& mv = m->second.values;
        auto& vv = v->second.values;
        for (std::size_t j = 0; j < pv.size(); ++j) {
            mv[j] = config_.beta1 * mv[j] + (1.0 - config_.beta1) * gv[j];
            vv[j] = config_.beta2 * vv[j] + (1.0 - config_.beta2) * gv[j] * gv[j];
            pv[j] -= config_.learning_rate * (mv[j] / c1) / (std::sqrt(vv[j] / c2) + config_.epsilon);
        }
    }
}

TrainResult fit(ParameterSet init, std::size_t train_count, const BatchObjective& objective,
                const ValidationObjective& validation, const TrainConfig& config, const EpochCallback& on_epoch) {
    if (train_count == 0) throw InsufficientDataError("training split is empty");
    if (config.batch_size == 0) throw ParameterError("batch size must be positive");

    TrainResult result;
    ParameterSet params = std::move(init);
    result.initial_validation = validation(params);
    if (!std::isfinite(result.initial_validation)) throw TrainingError(0, "validation loss is not finite");
    result.best = params;
    double best = result.initial_validation;
    std::size_t since_best = 0;

    Adam adam(params, config.adam);
    SeededRng shuffle(config.seed, stream_id(Stream::Shuffle));
    std::vector<std::size_t> order(train_count);
    ParameterSet grads = params.zeros_like();

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = train_count - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

        double loss_sum = 0.0;
        std::size_t batch = 0;
        for (std::size_t start = 0; start < train_count; start += config.batch_size, ++batch) {
            const std::size_t len = std::min(config.batch_size, train_count - start);
            grads.set_zero();
            const double loss = objective(std::span<const std::size_t>(order).subspan(start, len), params, grads,
                                          epoch, batch);
            if (!std::isfinite(loss) || !grads.all_finite()) throw TrainingError(epoch, "training loss diverged");
            loss_sum += loss * static_cast<double>(len);
            adam.step(params, grads);
        }
        const double val = validation(params);
        if (!std::isfinite(val)) throw TrainingError(epoch, "validation loss diverged");
        if (val < best) {
            best = val;
            result.best = params;
            result.best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(train_count), val, best};
        result.log.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (since_best >= config.patience) break;
    }
    return result;
}

double parallel_mean_gradient(std::size_t count,
                              const std::function<double(std::size_t i, ParameterSet& grads)>& per_sample,
                              ParameterSet& grads) {
    if (count == 0) throw InsufficientDataError("empty batch");
    std::vector<ParameterSet> slots(count, grads.zeros_like());
    std::vector<double> losses(count, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(count);
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            losses[k] = per_sample(k, slots[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    const double scale = 1.0 / static_cast<double>(count);
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        total += losses[k];
        grads.add_scaled(slots[k], scale);
    }
    return total * scale;
}

double parallel_mean(std::size_t count, const std::function<double(std::size_t i)>& per_sample) {
    if (count == 0) throw InsufficientDataError("empty evaluation set");
    std::vector<double> values(count, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(count);
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            values[k] = per_sample(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    rethrow_first(errors);
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(count);
}

}  // namespace dcqn
