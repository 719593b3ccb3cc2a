#include "qpc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qpc {

namespace {

constexpr int kMaxTerms = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// P(s, x) by power series around x = 0.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double a = s;
    for (int n = 0; n < kMaxTerms; ++n) {
        a += 1.0;
        term *= x / a;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Q(s, x) by modified Lentz continued fraction; accurate for x >= s + 1.
double gamma_q_cf(double s, double x) {
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxTerms; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

}  // namespace

double regularized_gamma_q(double s, double x) {
    if (!(s > 0.0)) throw ValidationError("regularized_gamma_q: need s > 0");
    if (!(x >= 0.0)) throw ValidationError("regularized_gamma_q: need x >= 0");
    if (x == 0.0) return 1.0;
    const double q = (x < s + 1.0) ? 1.0 - gamma_p_series(s, x) : gamma_q_cf(s, x);
    return std::clamp(q, 0.0, 1.0);
}

ChiSquaredResult chi_squared_test(const Histogram& observed,
                                  const ReadoutDistribution& expected) {
    const std::size_t nbins = expected.probabilities.size();
    if (observed.counts.size() != nbins)
        throw ValidationError("chi_squared_test: dimension mismatch");
    if (observed.total < 1)
        throw ValidationError("chi_squared_test: empty histogram");
    if (expected.is_zero())
        throw DegenerateTestError("chi_squared_test: zero expected distribution");

    const double n = static_cast<double>(observed.total);
    constexpr double kMinExpected = 5.0;

    struct Cell {
        double e;
        double o;
    };
    std::vector<Cell> retained;
    std::vector<std::size_t> pooled;  // indices with e_i < 5, to be grouped
    retained.reserve(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        const double e = n * expected.probabilities[i];
        if (e >= kMinExpected) {
            retained.push_back({e, static_cast<double>(observed.counts[i])});
        } else {
            pooled.push_back(i);
        }
    }

    int pooled_count = static_cast<int>(pooled.size());

    // Group the small bins, smallest expected count first, so each aggregate
    // reaches the minimum expected count; a final undersized group is kept.
    std::sort(pooled.begin(), pooled.end(), [&](std::size_t a, std::size_t b) {
        const double ea = expected.probabilities[a];
        const double eb = expected.probabilities[b];
        if (ea != eb) return ea < eb;
        return a < b;
    });
    Cell group{0.0, 0.0};
    bool open = false;
    for (std::size_t i : pooled) {
        group.e += n * expected.probabilities[i];
        group.o += static_cast<double>(observed.counts[i]);
        open = true;
        if (group.e >= kMinExpected) {
            retained.push_back(group);
            group = {0.0, 0.0};
            open = false;
        }
    }
    if (open) {
        if (group.e > 0.0 || group.o > 0.0) {
            retained.push_back(group);
        }
        // an all-zero leftover (no expectation, no observations) is dropped
    }

    if (retained.size() < 2)
        throw DegenerateTestError("chi_squared_test: fewer than 2 usable bins");

    ChiSquaredResult res;
    res.pooled_bins = pooled_count;
    res.dof = static_cast<int>(retained.size()) - 1;
    for (const Cell& c : retained) {
        if (c.e <= 0.0) {
            // observations where the expected mass is exactly zero are
            // incompatible with the null hypothesis
            res.statistic = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
            return res;
        }
        const double d = c.o - c.e;
        res.statistic += d * d / c.e;
    }
    res.p_value = std::isinf(res.statistic)
                      ? 0.0
                      : regularized_gamma_q(0.5 * res.dof, 0.5 * res.statistic);
    return res;
}

}  // namespace qpc
