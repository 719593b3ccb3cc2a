#include "qpc/pcore.hpp"

#include <cmath>

namespace qpc {

const char* to_string(PcMode mode) {
    switch (mode) {
        case PcMode::Fcs: return "fcs";
        case PcMode::Hpc: return "hpc";
        case PcMode::Qpc: return "qpc";
        case PcMode::RandomSkip: return "random_skip";
        case PcMode::PeriodicSkip: return "periodic_skip";
    }
    return "?";
}

std::optional<PcMode> pc_mode_from_string(const std::string& name) {
    if (name == "fcs") return PcMode::Fcs;
    if (name == "hpc") return PcMode::Hpc;
    if (name == "qpc") return PcMode::Qpc;
    if (name == "random_skip") return PcMode::RandomSkip;
    if (name == "periodic_skip") return PcMode::PeriodicSkip;
    return std::nullopt;
}

void PcConfig::validate() const {
    if (mode == PcMode::Hpc || mode == PcMode::Qpc) {
        if (sample_count < 1) throw ValidationError("PcConfig: sample_count must be >= 1");
    }
    if (mode == PcMode::Hpc) {
        if (!(p_value_threshold > 0.0 && p_value_threshold < 1.0))
            throw ValidationError("PcConfig: p_value_threshold outside (0,1)");
    }
    if (mode == PcMode::Qpc) {
        if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0))
            throw ValidationError("PcConfig: overlap_threshold outside (0,1]");
    }
    if (mode == PcMode::RandomSkip || mode == PcMode::PeriodicSkip) {
        if (skip_rate < 0.0 || skip_rate > 1.0)
            throw ValidationError("PcConfig: skip_rate outside [0,1]");
    }
    if (!(solve_tol > 0.0)) throw ValidationError("PcConfig: solve_tol must be positive");
}

void SkipLedger::record(const PcDecision& d, int solve_iters) {
    decisions.push_back(d);
    solve_iterations.push_back(solve_iters);
    samples_total += d.samples_spent;
    if (d.action == PcAction::Update) {
        ++updates;
        last_update_step = d.step_index;
    } else {
        ++skips;
    }
}

double SkipLedger::skip_fraction() const {
    const std::int64_t t = total_steps();
    return t == 0 ? 0.0 : static_cast<double>(skips) / static_cast<double>(t);
}

std::vector<std::int64_t> ledger_run_lengths(const SkipLedger& ledger,
                                             std::int64_t* trailing_skips) {
    std::vector<std::int64_t> runs;
    std::int64_t current = 0;
    bool seen_update = false;
    for (const PcDecision& d : ledger.decisions) {
        if (d.action == PcAction::Skip) {
            ++current;
        } else {
            if (seen_update) runs.push_back(current);
            seen_update = true;
            current = 0;
        }
    }
    if (trailing_skips) *trailing_skips = current;
    return runs;
}

bool is_zero_state(std::span<const double> x) {
    double norm_sq = 0.0;
    for (double v : x) norm_sq += v * v;
    return norm_sq < 1e-280;
}

PcDecision hpc_decide(std::span<const double> last_known, Lsp& candidate,
                      const PcConfig& cfg, Rng& rng, std::int64_t step) {
    PcDecision d;
    d.step_index = step;

    const std::vector<double>& solution = oracle_solve(candidate, cfg.solve_tol);
    const bool known_zero = is_zero_state(last_known);
    const bool cand_zero = is_zero_state(solution);
    if (known_zero || cand_zero) {
        d.action = (known_zero && cand_zero) ? PcAction::Skip : PcAction::Update;
        return d;
    }

    const ReadoutDistribution expected = distribution_from_solution(last_known);
    const ReadoutDistribution cand_dist = distribution_from_solution(solution);
    const Histogram hist = sample_readout(cand_dist, cfg.sample_count, rng.next_u64());
    d.samples_spent = cfg.sample_count;
    try {
        const ChiSquaredResult test = chi_squared_test(hist, expected);
        d.p_value = test.p_value;
        d.action = (test.p_value >= cfg.p_value_threshold) ? PcAction::Skip
                                                           : PcAction::Update;
    } catch (const DegenerateTestError&) {
        d.action = PcAction::Update;  // untestable state: be conservative
    }
    return d;
}

PcDecision qpc_decide(std::span<const double> last_known, Lsp& candidate,
                      const PcConfig& cfg, Rng& rng, std::int64_t step) {
    PcDecision d;
    d.step_index = step;

    const std::vector<double>& solution = oracle_solve(candidate, cfg.solve_tol);
    const bool known_zero = is_zero_state(last_known);
    const bool cand_zero = is_zero_state(solution);
    if (known_zero || cand_zero) {
        // two zero states overlap trivially and perfectly
        d.action = (known_zero && cand_zero) ? PcAction::Skip : PcAction::Update;
        return d;
    }

    SwapTestResult st = swap_test_probability(last_known, solution);
    st = sample_ancilla(st, cfg.sample_count, rng.next_u64());
    d.samples_spent = cfg.sample_count;
    d.p0_estimate = st.estimate_p0;
    const double cutoff = 0.5 + 0.5 * cfg.overlap_threshold;
    d.action = (st.estimate_p0 >= cutoff) ? PcAction::Skip : PcAction::Update;
    return d;
}

namespace {

// ceil with a small downward guard so exact rational targets (e.g. 16% of T)
// do not round up through floating noise
inline std::int64_t guarded_ceil(double x) {
    return static_cast<std::int64_t>(std::ceil(x - 1e-9));
}

}  // namespace

PcDecision baseline_decide(const PcConfig& cfg, std::int64_t step, Rng& rng) {
    PcDecision d;
    d.step_index = step;
    switch (cfg.mode) {
        case PcMode::Fcs:
            d.action = PcAction::Update;
            break;
        case PcMode::RandomSkip:
            d.action = (rng.uniform01() < cfg.skip_rate) ? PcAction::Skip
                                                         : PcAction::Update;
            break;
        case PcMode::PeriodicSkip: {
            // evenly spread updates: exactly ceil((1-rate)*T) over [0, T)
            const double u = 1.0 - cfg.skip_rate;
            const bool update = guarded_ceil(static_cast<double>(step + 1) * u) >
                                guarded_ceil(static_cast<double>(step) * u);
            d.action = update ? PcAction::Update : PcAction::Skip;
            break;
        }
        default:
            throw ValidationError("baseline_decide: not a baseline mode");
    }
    return d;
}

PcPolicy::PcPolicy(const PcConfig& cfg) : cfg_(cfg), rng_(cfg.seed, 0x5043u) {
    cfg_.validate();
}

PcDecision PcPolicy::dispatch(std::span<const double> last_known, Lsp& candidate,
                              std::int64_t step) {
    switch (cfg_.mode) {
        case PcMode::Hpc: return hpc_decide(last_known, candidate, cfg_, rng_, step);
        case PcMode::Qpc: return qpc_decide(last_known, candidate, cfg_, rng_, step);
        default: return baseline_decide(cfg_, step, rng_);
    }
}

PolicyOutcome PcPolicy::decide(std::span<const double> last_known, Lsp& candidate,
                               std::int64_t step) {
    PolicyOutcome out;
    try {
        if (!cfg_.async_staged) {
            out.decision = dispatch(last_known, candidate, step);
        } else if (!pending_) {
            // first step of a staged run: no queued decision yet
            out.decision.action = PcAction::Update;
            out.decision.step_index = step;
            pending_ = candidate;
        } else {
            Lsp previous = std::move(*pending_);
            pending_ = candidate;
            out.decision = dispatch(last_known, previous, step);
            out.decision.step_index = step;
            ++inner_calls_;
        }

        if (out.decision.action == PcAction::Update) {
            oracle_solve(candidate, cfg_.solve_tol);
            out.solution = &*candidate.reference_solution;
            out.solve_iterations = candidate.reference_iterations;
        }
    } catch (const SingularSystemError& e) {
        out.solver_failed = true;
        out.failure_reason = e.what();
    }
    return out;
}

}  // namespace qpc
