#pragma once

#ifndef DCQN_TEST_HOOKS
#error "testing_hooks.hpp is only available to test builds"
#endif

#include "dcqn/scengen.hpp"

namespace dcqn::testing {

// generate() with every prior draw forced to zero, so u = 0.5 everywhere
// and each scenario equals the median curve.
ScenarioSet generate_with_zero_prior(const Matrix& x, std::size_t count, const QuantileModel& iqn,
                                     const CholeskyFactor& factor);

}  // namespace dcqn::testing
