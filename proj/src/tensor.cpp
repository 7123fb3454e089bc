#include "dcqn/tensor.hpp"

#include "dcqn/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace dcqn {

std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), values(element_count(shape), 0.0) {}

Tensor& ParameterSet::add(const std::string& name, std::vector<std::size_t> dims) {
    return add(name, Tensor(std::move(dims)));
}

Tensor& ParameterSet::add(const std::string& name, Tensor tensor) {
    if (index_.count(name) != 0) {
        throw ParameterError("duplicate parameter tensor '" + name + "'");
    }
    if (tensor.values.size() != element_count(tensor.shape)) {
        throw DimensionError("tensor '" + name + "' value count does not match its shape");
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(tensor));
    return entries_.back().second;
}

bool ParameterSet::contains(const std::string& name) const { return index_.count(name) != 0; }

Tensor& ParameterSet::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ParameterError("missing parameter tensor '" + name + "'");
    }
    return entries_[it->second].second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw ParameterError("missing parameter tensor '" + name + "'");
    }
    return entries_[it->second].second;
}

std::size_t ParameterSet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.size();
    return n;
}

ParameterSet ParameterSet::zeros_like() const {
    ParameterSet out;
    for (const auto& [name, t] : entries_) out.add(name, t.shape);
    return out;
}

void ParameterSet::set_zero() {
    for (auto& [name, t] : entries_) std::fill(t.values.begin(), t.values.end(), 0.0);
}

void ParameterSet::add_scaled(const ParameterSet& other, double scale) {
    if (other.entries_.size() != entries_.size()) {
        throw ParameterError("parameter sets differ in tensor count");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& dst = entries_[i].second;
        const auto& src = other.entries_[i].second;
        if (dst.shape != src.shape) {
            throw DimensionError("shape mismatch for tensor '" + entries_[i].first + "'");
        }
        for (std::size_t j = 0; j < dst.values.size(); ++j) dst.values[j] += scale * src.values[j];
    }
}

bool ParameterSet::all_finite() const {
    for (const auto& [name, t] : entries_) {
        for (double v : t.values) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

}  // namespace dcqn
