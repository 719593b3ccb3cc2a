#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpc/linsys.hpp"
#include "qpc/qemu.hpp"
#include "qpc/rng.hpp"
#include "qpc/stats.hpp"

namespace qpc {

enum class PcMode { Fcs, Hpc, Qpc, RandomSkip, PeriodicSkip };

const char* to_string(PcMode mode);
std::optional<PcMode> pc_mode_from_string(const std::string& name);

/// Policy parameters. Only the fields relevant to the selected mode are
/// consulted: sample_count + p_value_threshold for H-PC, sample_count +
/// overlap_threshold for Q-PC, skip_rate for the skip baselines.
struct PcConfig {
    PcMode mode = PcMode::Fcs;
    bool async_staged = false;
    std::int64_t sample_count = 385;
    double p_value_threshold = 0.05;
    double overlap_threshold = 0.98;
    double skip_rate = 0.0;
    std::uint64_t seed = 0;
    double solve_tol = 1e-8;

    void validate() const;  // throws ValidationError on out-of-range fields
};

enum class PcAction { Skip, Update };

struct PcDecision {
    PcAction action = PcAction::Update;
    std::optional<double> p_value;      // H-PC decisions
    std::optional<double> p0_estimate;  // Q-PC decisions
    std::int64_t samples_spent = 0;
    std::int64_t step_index = 0;
};

/// Ordered per-step decision record for one simulation instance.
struct SkipLedger {
    std::vector<PcDecision> decisions;
    std::int64_t last_update_step = -1;
    std::int64_t skips = 0;
    std::int64_t updates = 0;
    std::int64_t samples_total = 0;
    std::vector<int> solve_iterations;  // classical CG iterations, 0 on skips

    void record(const PcDecision& d, int solve_iters);
    std::int64_t total_steps() const { return skips + updates; }
    double skip_fraction() const;
};

/// Lengths of the skip runs preceding each update after the first; a
/// trailing run of skips (no closing update) is reported separately.
std::vector<std::int64_t> ledger_run_lengths(const SkipLedger& ledger,
                                             std::int64_t* trailing_skips = nullptr);

/// True when the vector is numerically the zero state (see the
/// zero-solution sentinel in the readout emulation).
bool is_zero_state(std::span<const double> x);

/// Hybrid decider: sample the candidate's readout distribution (hidden
/// oracle solve) and chi-squared test it against the distribution of the
/// last known solution. Skip iff p_value >= threshold (null upheld).
/// Zero-state rule: both states zero -> skip, exactly one zero -> update.
PcDecision hpc_decide(std::span<const double> last_known, Lsp& candidate,
                      const PcConfig& cfg, Rng& rng, std::int64_t step = 0);

/// Quantum decider: swap test between the last known solution and the
/// candidate's (hidden oracle) solution, estimated from sample_count
/// single-ancilla shots. Skip iff estimate_p0 >= 1/2 + 1/2 * overlap_threshold.
PcDecision qpc_decide(std::span<const double> last_known, Lsp& candidate,
                      const PcConfig& cfg, Rng& rng, std::int64_t step = 0);

/// fcs: always update. random_skip: skip with probability skip_rate.
/// periodic_skip: deterministic pattern with exactly ceil((1-skip_rate)*T)
/// updates over any window [0, T).
PcDecision baseline_decide(const PcConfig& cfg, std::int64_t step, Rng& rng);

struct PolicyOutcome {
    PcDecision decision;
    /// Full candidate solution; non-null only when action == Update.
    const std::vector<double>* solution = nullptr;
    int solve_iterations = 0;
    bool solver_failed = false;
    std::string failure_reason;
};

/// Stateful per-instance policy driver. Wraps the mode-specific deciders,
/// owns the decision RNG stream, and implements the asynchronous staging
/// queue: when async_staged is set, the decision emitted at step n is the
/// one computed from the step n-1 candidate against the last known
/// solution, and step 0 is always a forced update.
class PcPolicy {
public:
    explicit PcPolicy(const PcConfig& cfg);

    PolicyOutcome decide(std::span<const double> last_known, Lsp& candidate,
                         std::int64_t step);

    const PcConfig& config() const { return cfg_; }
    std::int64_t inner_calls() const { return inner_calls_; }

private:
    PcConfig cfg_;
    Rng rng_;
    std::optional<Lsp> pending_;  // staged candidate from the previous step
    std::int64_t inner_calls_ = 0;

    PcDecision dispatch(std::span<const double> last_known, Lsp& candidate,
                        std::int64_t step);
};

}  // namespace qpc
