#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dcqn {

// Row-major: element (c, t) of a C x T feature map sits at c * T + t.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims);

    std::size_t rank() const noexcept { return shape.size(); }
    std::size_t size() const noexcept { return values.size(); }
    std::span<double> span() noexcept { return values; }
    std::span<const double> span() const noexcept { return values; }

    bool operator==(const Tensor&) const = default;
};

std::size_t element_count(const std::vector<std::size_t>& dims);

// Views of rank-2 / any-rank tensors as Eigen objects. No shape checks.
inline Eigen::Map<const Matrix> as_matrix(const Tensor& t) {
    return {t.values.data(), static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1])};
}
inline Eigen::Map<Matrix> as_matrix(Tensor& t) {
    return {t.values.data(), static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1])};
}
inline Eigen::Map<const Vector> as_vector(const Tensor& t) {
    return {t.values.data(), static_cast<Eigen::Index>(t.size())};
}
inline Eigen::Map<Vector> as_vector(Tensor& t) { return {t.values.data(), static_cast<Eigen::Index>(t.size())}; }

// Ordered collection of named tensors. Insertion order is the canonical order
// used for serialization, gradient reduction and optimizer state.
class ParameterSet {
public:
    Tensor& add(const std::string& name, std::vector<std::size_t> dims);
    Tensor& add(const std::string& name, Tensor tensor);

    bool contains(const std::string& name) const;
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t parameter_count() const noexcept;

    auto begin() noexcept { return entries_.begin(); }
    auto end() noexcept { return entries_.end(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    // Same names and shapes, all values zero.
    ParameterSet zeros_like() const;
    void set_zero();
    // this += scale * other; shapes must match entry by entry.
    void add_scaled(const ParameterSet& other, double scale);
    bool all_finite() const;

    bool operator==(const ParameterSet& other) const { return entries_ == other.entries_; }

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dcqn
