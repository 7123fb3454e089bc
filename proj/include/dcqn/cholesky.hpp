#pragma once

#include "dcqn/tensor.hpp"

namespace dcqn {

// Lower-triangular factor L of a correlation matrix R = L * L^T.
// Construction validates: upper triangle exactly zero, finite entries,
// positive diagonal, unit-L2 rows (within 1e-6).
class CholeskyFactor {
public:
    explicit CholeskyFactor(Matrix lower);

    static CholeskyFactor identity(Eigen::Index horizon);

    const Matrix& matrix() const noexcept { return lower_; }
    Eigen::Index horizon() const noexcept { return lower_.rows(); }
    Matrix covariance() const;
    // z' = L z
    Vector apply(const Vector& z) const;

private:
    Matrix lower_;
};

inline constexpr double kRowNormTolerance = 1e-6;

}  // namespace dcqn
