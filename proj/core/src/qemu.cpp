#include "qpc/qemu.hpp"

#include <cmath>

namespace qpc {

namespace {

// Denormal guard: squared norms below this are indistinguishable from the
// quiescent zero state once divided through.
constexpr double kZeroNormSq = 1e-280;

/// Walker/Vose alias table for O(1) categorical draws.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& p) {
        const int n = static_cast<int>(p.size());
        prob_.resize(n);
        alias_.resize(n);
        std::vector<double> scaled(n);
        std::vector<int> small, large;
        small.reserve(n);
        large.reserve(n);
        for (int i = 0; i < n; ++i) {
            scaled[i] = p[i] * n;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const int s = small.back();
            const int l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (int s : small) { prob_[s] = 1.0; alias_[s] = s; }
        for (int l : large) { prob_[l] = 1.0; alias_[l] = l; }
    }

    int draw(Rng& rng) const {
        const auto k = static_cast<int>(rng.uniform_below(prob_.size()));
        return rng.uniform01() < prob_[k] ? k : alias_[k];
    }

private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

}  // namespace

std::pair<Lsp, Lsp> sign_split(const Lsp& lsp) {
    Lsp neg = lsp;
    Lsp pos = lsp;
    neg.reference_solution.reset();
    pos.reference_solution.reset();
    for (std::size_t i = 0; i < lsp.rhs.size(); ++i) {
        if (lsp.rhs[i] < 0.0) {
            pos.rhs[i] = 0.0;
        } else {
            neg.rhs[i] = 0.0;
        }
    }
    return {std::move(neg), std::move(pos)};
}

ReadoutDistribution distribution_from_solution(std::span<const double> x) {
    ReadoutDistribution dist;
    dist.source_dim = static_cast<int>(x.size());
    double norm_sq = 0.0;
    for (double v : x) {
        if (!std::isfinite(v))
            throw ValidationError("distribution_from_solution: non-finite component");
        norm_sq += v * v;
    }
    if (norm_sq < kZeroNormSq) {
        dist.probabilities.assign(x.size(), 0.0);
        dist.norm = 0.0;  // zero-solution sentinel
        return dist;
    }
    dist.norm = std::sqrt(norm_sq);
    dist.probabilities.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        dist.probabilities[i] = x[i] * x[i] / norm_sq;
    return dist;
}

Histogram sample_readout(const ReadoutDistribution& dist, std::int64_t n,
                         std::uint64_t seed) {
    if (dist.is_zero())
        throw ValidationError("sample_readout: zero-solution sentinel has no distribution");
    if (n < 1) throw ValidationError("sample_readout: need n >= 1");

    Histogram h;
    h.seed = seed;
    h.total = n;
    h.counts.assign(dist.probabilities.size(), 0);
    const AliasTable table(dist.probabilities);
    Rng rng(seed, 0x48495354u);  // dedicated histogram stream
    for (std::int64_t s = 0; s < n; ++s) ++h.counts[table.draw(rng)];
    return h;
}

SwapTestResult swap_test_probability(std::span<const double> x,
                                     std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError("swap_test_probability: length mismatch");
    const double nx = norm2(x);
    const double ny = norm2(y);
    if (nx == 0.0 || ny == 0.0)
        throw ValidationError("swap_test_probability: zero state");
    SwapTestResult r;
    r.true_overlap = std::min(std::abs(dot(x, y)) / (nx * ny), 1.0);
    r.p0 = 0.5 + 0.5 * r.true_overlap;
    return r;
}

SwapTestResult sample_ancilla(SwapTestResult result, std::int64_t n,
                              std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample_ancilla: need n >= 1");
    Rng rng(seed, 0x414E43u);  // ancilla stream
    std::int64_t zeros = 0;
    for (std::int64_t s = 0; s < n; ++s)
        if (rng.uniform01() < result.p0) ++zeros;
    result.estimate_p0 = static_cast<double>(zeros) / static_cast<double>(n);
    result.samples = n;
    return result;
}

std::int64_t required_samples(double z, double p, double e) {
    if (!(e > 0.0)) throw ValidationError("required_samples: margin must be positive");
    if (p < 0.0 || p > 1.0) throw ValidationError("required_samples: p outside [0,1]");
    return static_cast<std::int64_t>(std::ceil(z * z * p * (1.0 - p) / (e * e)));
}

SampleSizeSpec make_sample_size_spec(double z, double p, double e) {
    SampleSizeSpec s;
    s.z = z;
    s.p = p;
    s.e = e;
    s.n = required_samples(z, p, e);
    return s;
}

}  // namespace qpc
