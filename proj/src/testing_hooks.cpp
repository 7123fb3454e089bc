#include "dcqn/testing_hooks.hpp"

#include "dcqn/errors.hpp"

namespace dcqn::testing {

ScenarioSet generate_with_zero_prior(const Matrix& x, std::size_t count, const QuantileModel& iqn,
                                     const CholeskyFactor& factor) {
    if (count < 1) throw DomainError("scenario count must be at least 1");
    const Matrix priors = Matrix::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(iqn.horizon));
    ScenarioSet set{detail::compose_scenarios(x, priors, iqn, factor), {}};
    set.provenance.count = count;
    return set;
}

}  // namespace dcqn::testing
