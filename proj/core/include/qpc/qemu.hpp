#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qpc/linsys.hpp"
#include "qpc/rng.hpp"

namespace qpc {

/// Squared-amplitude probabilities of a solution vector, i.e. the measurement
/// statistics an HHL run over that state would produce. A zero solution has
/// no defined distribution and is carried as an explicit sentinel
/// (norm == 0) rather than NaN probabilities; quiescent flows produce it
/// legitimately.
struct ReadoutDistribution {
    std::vector<double> probabilities;  // p_i = x_i^2 / ||x||^2
    double norm = 0.0;                  // ||x||_2
    int source_dim = 0;

    bool is_zero() const { return norm == 0.0; }
};

/// Counted measurement outcomes from repeated emulated HHL runs.
struct Histogram {
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
    std::uint64_t seed = 0;
};

/// Swap-test statistics between two states; p0 = 1/2 + 1/2 |<x|y>|.
struct SwapTestResult {
    double true_overlap = 0.0;  // |x . y| / (||x|| ||y||)
    double p0 = 0.0;
    double estimate_p0 = -1.0;  // < 0 until sample_ancilla fills it
    std::int64_t samples = 0;
};

/// Inputs and result of the margin-of-error sample-size formula
/// n = ceil(z^2 p (1-p) / e^2).
struct SampleSizeSpec {
    double z = 0.0;
    double p = 0.0;
    double e = 0.0;
    std::int64_t n = 0;
};

/// Split an LSP into two systems whose right-hand sides carry only the
/// negative respectively positive components of b, so each sub-solution has
/// single-signed amplitudes. b1 + b2 == b; the matrix is shared.
std::pair<Lsp, Lsp> sign_split(const Lsp& lsp);

/// Normalized squared-amplitude distribution of x. Zero vector yields the
/// zero-solution sentinel; non-finite input throws ValidationError.
ReadoutDistribution distribution_from_solution(std::span<const double> x);

/// n categorical draws from the distribution; deterministic per seed.
/// Throws ValidationError on the zero sentinel or n < 1.
Histogram sample_readout(const ReadoutDistribution& dist, std::int64_t n,
                         std::uint64_t seed);

/// Exact swap-test ancilla-zero probability between two nonzero states.
SwapTestResult swap_test_probability(std::span<const double> x,
                                     std::span<const double> y);

/// Estimate p0 from n Bernoulli(p0) ancilla measurements.
SwapTestResult sample_ancilla(SwapTestResult result, std::int64_t n,
                              std::uint64_t seed);

/// ceil(z^2 p (1-p) / e^2); throws ValidationError unless e > 0, 0 <= p <= 1.
std::int64_t required_samples(double z, double p, double e);

SampleSizeSpec make_sample_size_spec(double z, double p, double e);

}  // namespace qpc
