#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qpc/config.hpp"
#include "qpc/io.hpp"

namespace qpc {

using Series = std::vector<std::pair<double, double>>;

/// Everything one simulation instance produced, file contents included.
struct RunArtifacts {
    RunSummary summary;
    SkipLedger ledger;
    std::string series_header;
    std::vector<std::vector<double>> series_rows;

    /// (t, column) view of the recorded series; col 1 is the primary metric
    /// (u_max for tgv, leading edge for dambreak, U_K / U_E for two_stream).
    Series series_column(int col) const;
};

/// Execute one instance of the configured case. The instance seed feeds
/// every stochastic policy stream; when a reference series is supplied the
/// summary's error metric is rms_rel_error against it. write_files controls
/// artifact emission into cfg.out_dir.
RunArtifacts run_simulation(const ExperimentConfig& cfg, std::uint64_t instance_seed,
                            const Series& reference = {}, bool write_files = true);

/// All configured repetitions (instance seeds master_seed + k).
std::vector<RunArtifacts> run_all_repetitions(const ExperimentConfig& cfg,
                                              bool write_files = true);

/// FCS pressure states of a TGV run: solution vectors recorded after the
/// probe step and after probe + gap further steps (scaling experiment oracle
/// states).
std::pair<std::vector<double>, std::vector<double>> tgv_probe_solutions(
    const TgvSpec& spec, int probe_step, int gap_steps);

struct ScalingRow {
    int n_side = 0;
    int problem_size = 0;  // N = n_side^2
    double samples_dfs = 0.0;
    double samples_hpc = 0.0;
    double samples_qpc = 0.0;
    bool ok = true;  // false rows are omitted from the table and the fit
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    double slope_dfs = 0.0;
    double slope_hpc = 0.0;
    double slope_qpc = 0.0;
    std::string table_csv;
};

/// Sample-size scaling study over the configured TGV resolutions: DFS
/// (vector reconstruction to the 5% criterion), H-PC (detecting p < 0.05
/// between solutions gap_steps apart), Q-PC (constant 385), plus log-log
/// least-squares slopes.
ScalingResult scaling_experiment(const ExperimentConfig& cfg, bool write_files = true);

struct ParetoRow {
    std::int64_t sample_count = 0;
    double p_value_threshold = 0.0;
    double mean_skips = 0.0;
    double mean_error = 0.0;
    int failures = 0;
    int runs = 0;
    bool pareto_front = false;
};

struct ParetoResult {
    std::vector<ParetoRow> rows;
    ParetoRow fcs_sentinel;
    std::string grid_csv;
    int total_runs = 0;
    int total_failures = 0;
};

/// H-PC parameter sweep on the TGV: sample-count x p-value grid, mean skip
/// counts and errors versus the FCS reference, plus the non-dominated
/// (max skips, min error) front. Individual run failures are recorded, not
/// fatal. Runs execute on cfg.pareto.jobs worker threads; results are
/// aggregated in a fixed order so parallel and serial sweeps emit identical
/// bytes.
ParetoResult pareto_sweep(const ExperimentConfig& cfg, bool write_files = true);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace qpc
