#pragma once

#include <stdexcept>

#include "qpc/qemu.hpp"

namespace qpc {

/// Raised when a chi-squared comparison has too few usable bins to test.
/// Callers treat this as a forced full update (conservative).
class DegenerateTestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Regularized upper incomplete gamma function Q(s, x), s > 0, x >= 0.
/// Series expansion for x < s + 1, continued fraction otherwise;
/// absolute accuracy better than 1e-10 over the tested domain.
double regularized_gamma_q(double s, double x);

struct ChiSquaredResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
    int pooled_bins = 0;  // original bins that were folded into aggregates
};

/// Pearson goodness-of-fit test of an observed histogram against expected
/// probabilities. Bins with expected count n*p_i < 5 are pooled, smallest
/// expected count first, into aggregate bins that each reach an expected
/// count of at least 5; an undersized leftover aggregate is kept. Aggregates
/// are appended after the retained bins. dof = retained_bins - 1 and
/// p_value = Q(dof/2, statistic/2).
///
/// Throws DegenerateTestError when fewer than 2 bins survive.
ChiSquaredResult chi_squared_test(const Histogram& observed,
                                  const ReadoutDistribution& expected);

}  // namespace qpc
