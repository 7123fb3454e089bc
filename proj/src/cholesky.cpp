#include "dcqn/cholesky.hpp"

#include "dcqn/errors.hpp"

#include <cmath>
#include <string>

namespace dcqn {

CholeskyFactor::CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {
    if (lower_.rows() != lower_.cols() || lower_.rows() == 0) {
        throw DimensionError("Cholesky factor must be a non-empty square matrix");
    }
    const Eigen::Index n = lower_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (lower_(i, j) != 0.0) {
                throw DomainError("Cholesky factor has a non-zero upper-triangular entry");
            }
        }
        if (!lower_.row(i).allFinite()) throw NumericError("Cholesky factor has non-finite entries");
        if (!(lower_(i, i) > 0.0)) {
            throw DomainError("Cholesky factor diagonal entry " + std::to_string(i) + " is not positive");
        }
        if (std::abs(lower_.row(i).norm() - 1.0) > kRowNormTolerance) {
            throw DomainError("Cholesky factor row " + std::to_string(i) + " is not unit norm");
        }
    }
}

CholeskyFactor CholeskyFactor::identity(Eigen::Index horizon) {
    return CholeskyFactor(Matrix::Identity(horizon, horizon));
}

Matrix CholeskyFactor::covariance() const { return lower_ * lower_.transpose(); }

Vector CholeskyFactor::apply(const Vector& z) const {
    if (z.size() != lower_.rows()) throw DimensionError("prior sample length does not match horizon");
    return lower_.triangularView<Eigen::Lower>() * z;
}

}  // namespace dcqn
