#include "qpc/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

namespace qpc {

namespace {

constexpr std::int64_t kStepBudget = 1'000'000;

struct StepTrace {
    bool failed = false;
    std::int64_t failure_step = 0;
    std::string failure_reason;
};

void write_run_files(const ExperimentConfig& cfg, const RunArtifacts& art,
                     const std::vector<std::pair<std::int64_t, std::string>>& snapshots) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const std::string prefix =
        (fs::path(cfg.out_dir) / run_prefix(art.summary.case_name, art.summary.mode,
                                            art.summary.seed))
            .string();
    write_text_file(prefix + ".ledger.csv", ledger_csv(art.ledger));
    const std::string kind = cfg.case_name == "two_stream" ? ".energy.csv" : ".series.csv";
    write_text_file(prefix + kind, series_csv(art.series_header, art.series_rows));
    write_text_file(prefix + ".summary.csv", summary_csv(art.summary));
    write_text_file(prefix + ".summary.json",
                    summary_json(art.summary, cfg.to_flat_map()));
    for (const auto& [step, contents] : snapshots) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), ".snapshot-%06lld.csv",
                      static_cast<long long>(step));
        write_text_file(prefix + tag, contents);
    }
}

std::string fgrid_csv(const PhaseSpaceGrid& grid) {
    std::string s = "nx,nv,L,v_max\n";
    s += std::to_string(grid.nx) + ',' + std::to_string(grid.nv) + ',' +
         format_g17(grid.L) + ',' + format_g17(grid.v_max) + "\nf\n";
    for (double v : grid.f) {
        s += format_g17(v);
        s += '\n';
    }
    return s;
}

RunArtifacts run_isph_case(const ExperimentConfig& cfg, std::uint64_t instance_seed,
                           const Series& reference, bool write_files) {
    const bool is_tgv = cfg.case_name == "tgv";
    ParticleSystem sys =
        is_tgv ? tgv_init(cfg.tgv) : dambreak_init(cfg.dambreak);
    sys.validate();

    PcConfig pc = cfg.pc;
    pc.seed = instance_seed;
    PcPolicy policy(pc);

    RunArtifacts art;
    art.series_header = is_tgv ? "t,umax" : "t,edge";
    art.summary.case_name = cfg.case_name;
    art.summary.mode = to_string(pc.mode);
    art.summary.seed = instance_seed;

    StepTrace trace;
    std::vector<std::pair<std::int64_t, std::string>> snapshots;
    const double t_end = cfg.resolved_t_end();
    double t = 0.0;
    std::int64_t step = 0;
    art.series_rows.push_back({0.0, is_tgv ? sys.max_speed() : leading_edge(sys)});
    const auto wall_start = std::chrono::steady_clock::now();
    while (t < t_end && step < kStepBudget) {
        const StepResult r = isph_step(sys, policy, art.ledger, step);
        if (!r.ok) {
            trace.failed = true;
            trace.failure_step = step;
            trace.failure_reason = r.failure_reason;
            break;
        }
        t += r.dt_used;
        art.series_rows.push_back({t, is_tgv ? sys.max_speed() : leading_edge(sys)});
        if (cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0)
            snapshots.emplace_back(step, snapshot_csv(sys));
        ++step;
    }
    art.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();

    art.summary.total_steps = art.ledger.total_steps();
    art.summary.update_count = art.ledger.updates;
    art.summary.skip_fraction = art.ledger.skip_fraction();
    art.summary.samples_total = art.ledger.samples_total;
    if (trace.failed) {
        art.summary.failure_step = trace.failure_step;
        art.summary.failure_reason = trace.failure_reason;
    }
    if (!reference.empty() && !trace.failed)
        art.summary.error_metric = rms_rel_error(art.series_column(1), reference);
    if (write_files) write_run_files(cfg, art, snapshots);
    return art;
}

RunArtifacts run_two_stream_case(const ExperimentConfig& cfg,
                                 std::uint64_t instance_seed, const Series& reference,
                                 bool write_files) {
    PhaseSpaceGrid grid = init_two_stream(cfg.two_stream);
    FieldState field;
    update_field(grid, field, -1);

    PcConfig pc = cfg.pc;
    pc.seed = instance_seed;
    PcPolicy policy(pc);

    RunArtifacts art;
    art.series_header = "t,UK,UE";
    art.summary.case_name = cfg.case_name;
    art.summary.mode = to_string(pc.mode);
    art.summary.seed = instance_seed;

    StepTrace trace;
    std::vector<std::pair<std::int64_t, std::string>> snapshots;
    const double dt = cfg.two_stream.dt;
    const auto steps = static_cast<std::int64_t>(
        std::llround(cfg.resolved_t_end() / dt));
    {
        const auto [uk, ue] = energies(grid, field);
        art.series_rows.push_back({0.0, uk, ue});
    }
    const auto wall_start = std::chrono::steady_clock::now();
    for (std::int64_t step = 0; step < steps; ++step) {
        const VlasovStepResult r = vlasov_step(grid, field, policy, art.ledger, step, dt);
        if (!r.ok) {
            trace.failed = true;
            trace.failure_step = step;
            trace.failure_reason = r.failure_reason;
            break;
        }
        const auto [uk, ue] = energies(grid, field);
        art.series_rows.push_back({(step + 1) * dt, uk, ue});
        if (cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0)
            snapshots.emplace_back(step, fgrid_csv(grid));
    }
    art.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();

    art.summary.total_steps = art.ledger.total_steps();
    art.summary.update_count = art.ledger.updates;
    art.summary.skip_fraction = art.ledger.skip_fraction();
    art.summary.samples_total = art.ledger.samples_total;
    if (trace.failed) {
        art.summary.failure_step = trace.failure_step;
        art.summary.failure_reason = trace.failure_reason;
    }
    if (!reference.empty() && !trace.failed)
        art.summary.error_metric = rms_rel_error(art.series_column(2), reference);
    if (write_files) write_run_files(cfg, art, snapshots);
    return art;
}

}  // namespace

Series RunArtifacts::series_column(int col) const {
    Series s;
    s.reserve(series_rows.size());
    for (const auto& row : series_rows)
        s.emplace_back(row[0], row[static_cast<std::size_t>(col)]);
    return s;
}

RunArtifacts run_simulation(const ExperimentConfig& cfg, std::uint64_t instance_seed,
                            const Series& reference, bool write_files) {
    if (cfg.case_name == "two_stream")
        return run_two_stream_case(cfg, instance_seed, reference, write_files);
    return run_isph_case(cfg, instance_seed, reference, write_files);
}

std::vector<RunArtifacts> run_all_repetitions(const ExperimentConfig& cfg,
                                              bool write_files) {
    std::vector<RunArtifacts> out;
    out.reserve(cfg.repetitions);
    for (int k = 0; k < cfg.repetitions; ++k)
        out.push_back(run_simulation(cfg, cfg.master_seed + k, {}, write_files));
    return out;
}

std::pair<std::vector<double>, std::vector<double>> tgv_probe_solutions(
    const TgvSpec& spec, int probe_step, int gap_steps) {
    ParticleSystem sys = tgv_init(spec);
    PcConfig pc;
    pc.mode = PcMode::Fcs;
    PcPolicy policy(pc);
    SkipLedger ledger;
    std::vector<double> first, second;
    for (int step = 0; step <= probe_step + gap_steps; ++step) {
        const StepResult r = isph_step(sys, policy, ledger, step);
        if (!r.ok)
            throw SingularSystemError("tgv_probe_solutions: FCS run failed at step " +
                                      std::to_string(step) + ": " + r.failure_reason);
        if (step == probe_step) first = sys.pressures;
    }
    second = sys.pressures;
    return {std::move(first), std::move(second)};
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2)
        throw ValidationError("loglog_slope: need at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double lx = std::log(x);
        const double ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(points.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

/// Doubling then integer bisection for the smallest sample count satisfying
/// a (statistically monotone) success predicate. Every probe derives a fresh
/// deterministic seed from the provided stream.
struct SampleSearch {
    bool ok = false;
    std::int64_t m = 0;
};

SampleSearch search_min_samples(
    const std::function<bool(std::int64_t, std::uint64_t)>& success, Rng& rng,
    std::int64_t m_start, std::int64_t m_cap) {
    std::int64_t hi = m_start;
    while (!success(hi, rng.next_u64())) {
        hi *= 2;
        if (hi > m_cap) return {false, 0};
    }
    std::int64_t lo = hi / 2 < m_start ? 1 : hi / 2;
    while (hi - lo > 1 && hi > m_start) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (success(mid, rng.next_u64())) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {true, hi};
}

}  // namespace

ScalingResult scaling_experiment(const ExperimentConfig& cfg, bool write_files) {
    const ScalingSpec& sc = cfg.scaling;
    ScalingResult result;
    Rng master(cfg.master_seed, 0x5343414Cu);

    for (int n_side : sc.n_sides) {
        TgvSpec spec = cfg.tgv;
        spec.n_side = n_side;
        const auto [x_a, x_b] = tgv_probe_solutions(spec, sc.probe_step, sc.gap_steps);

        ScalingRow row;
        row.n_side = n_side;
        row.problem_size = n_side * n_side;
        row.samples_qpc = static_cast<double>(required_samples(1.96, 0.5, 0.05));

        const ReadoutDistribution dist_a = distribution_from_solution(x_a);
        const ReadoutDistribution dist_b = distribution_from_solution(x_b);

        // DFS: reconstruct the normalized magnitude vector from samples
        std::vector<double> target(x_a.size());
        for (std::size_t i = 0; i < x_a.size(); ++i)
            target[i] = std::abs(x_a[i]) / dist_a.norm;
        auto dfs_success = [&](std::int64_t m, std::uint64_t seed) {
            const Histogram h = sample_readout(dist_a, m, seed);
            double err_sq = 0.0;
            for (std::size_t i = 0; i < target.size(); ++i) {
                const double rec =
                    std::sqrt(static_cast<double>(h.counts[i]) / static_cast<double>(m));
                err_sq += (rec - target[i]) * (rec - target[i]);
            }
            return std::sqrt(err_sq) <= sc.dfs_error;  // target has unit norm
        };
        // H-PC: detect the gap_steps-apart divergence at the p threshold
        auto hpc_success = [&](std::int64_t m, std::uint64_t seed) {
            const Histogram h = sample_readout(dist_b, m, seed);
            try {
                return chi_squared_test(h, dist_a).p_value < sc.hpc_p_value;
            } catch (const DegenerateTestError&) {
                return false;  // too few samples to even form a test
            }
        };

        double dfs_sum = 0.0, hpc_sum = 0.0;
        int dfs_ok = 0, hpc_ok = 0;
        for (int s = 0; s < sc.seeds; ++s) {
            Rng trial = master.split((static_cast<std::uint64_t>(n_side) << 16) | s);
            const SampleSearch dfs = search_min_samples(dfs_success, trial, 16, 1 << 26);
            const SampleSearch hpc = search_min_samples(hpc_success, trial, 16, 1 << 26);
            if (dfs.ok) { dfs_sum += static_cast<double>(dfs.m); ++dfs_ok; }
            if (hpc.ok) { hpc_sum += static_cast<double>(hpc.m); ++hpc_ok; }
        }
        row.ok = dfs_ok > 0 && hpc_ok > 0;
        if (row.ok) {
            row.samples_dfs = dfs_sum / dfs_ok;
            row.samples_hpc = hpc_sum / hpc_ok;
        }
        result.rows.push_back(row);
    }

    std::vector<std::pair<double, double>> dfs_pts, hpc_pts, qpc_pts;
    std::string csv = "N,samples_dfs,samples_hpc,samples_qpc\n";
    for (const ScalingRow& row : result.rows) {
        if (!row.ok) continue;  // non-convergent search: row omitted
        dfs_pts.emplace_back(row.problem_size, row.samples_dfs);
        hpc_pts.emplace_back(row.problem_size, row.samples_hpc);
        qpc_pts.emplace_back(row.problem_size, row.samples_qpc);
        csv += std::to_string(row.problem_size) + ',' + format_g17(row.samples_dfs) +
               ',' + format_g17(row.samples_hpc) + ',' + format_g17(row.samples_qpc) +
               '\n';
    }
    result.slope_dfs = loglog_slope(dfs_pts);
    result.slope_hpc = loglog_slope(hpc_pts);
    result.slope_qpc = loglog_slope(qpc_pts);
    result.table_csv = csv;

    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string prefix =
            (std::filesystem::path(cfg.out_dir) /
             ("tgv_scaling_" + std::to_string(cfg.master_seed)))
                .string();
        write_text_file(prefix + ".table.csv", csv);
        std::string slopes = "series,slope\n";
        slopes += "dfs," + format_g17(result.slope_dfs) + '\n';
        slopes += "hpc," + format_g17(result.slope_hpc) + '\n';
        slopes += "qpc," + format_g17(result.slope_qpc) + '\n';
        write_text_file(prefix + ".slopes.csv", slopes);
    }
    return result;
}

ParetoResult pareto_sweep(const ExperimentConfig& cfg, bool write_files) {
    ParetoResult result;

    ExperimentConfig fcs_cfg = cfg;
    fcs_cfg.pc.mode = PcMode::Fcs;
    const RunArtifacts fcs = run_simulation(fcs_cfg, cfg.master_seed, {}, false);
    const Series reference = fcs.series_column(1);
    result.fcs_sentinel.sample_count = 0;
    result.fcs_sentinel.p_value_threshold = 0.0;
    result.fcs_sentinel.mean_skips = 0.0;
    result.fcs_sentinel.mean_error =
        rms_rel_error(fcs.series_column(1), reference);  // zero by construction
    result.fcs_sentinel.runs = 1;

    struct Job {
        std::size_t combo;
        int rep;
    };
    std::vector<Job> jobs;
    const auto& grid_n = cfg.pareto.sample_counts;
    const auto& grid_p = cfg.pareto.p_values;
    for (std::size_t c = 0; c < grid_n.size() * grid_p.size(); ++c)
        for (int r = 0; r < cfg.pareto.repetitions; ++r) jobs.push_back({c, r});

    struct Slot {
        bool failed = false;
        double skips = 0.0;
        double error = 0.0;
    };
    std::vector<Slot> slots(jobs.size());

    auto run_job = [&](std::size_t j) {
        const Job& job = jobs[j];
        ExperimentConfig rc = cfg;
        rc.pc.mode = PcMode::Hpc;
        rc.pc.sample_count = grid_n[job.combo / grid_p.size()];
        rc.pc.p_value_threshold = grid_p[job.combo % grid_p.size()];
        const std::uint64_t seed =
            Rng(cfg.master_seed, 0x50415245u).split(j).stream_tag();
        const RunArtifacts art = run_simulation(rc, seed, reference, false);
        Slot& slot = slots[j];
        if (art.summary.failure_step) {
            slot.failed = true;
        } else {
            slot.skips = static_cast<double>(art.ledger.skips);
            slot.error = art.summary.error_metric;
        }
    };

    const int workers = std::max(1, cfg.pareto.jobs);
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < jobs.size();
                     j = next.fetch_add(1))
                    run_job(j);
            });
        }
        for (std::thread& th : pool) th.join();
    }

    // fixed-order aggregation keeps parallel and serial output identical
    for (std::size_t c = 0; c < grid_n.size() * grid_p.size(); ++c) {
        ParetoRow row;
        row.sample_count = grid_n[c / grid_p.size()];
        row.p_value_threshold = grid_p[c % grid_p.size()];
        double skips = 0.0, error = 0.0;
        int ok = 0;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].combo != c) continue;
            ++row.runs;
            if (slots[j].failed) {
                ++row.failures;
            } else {
                skips += slots[j].skips;
                error += slots[j].error;
                ++ok;
            }
        }
        if (ok > 0) {
            row.mean_skips = skips / ok;
            row.mean_error = error / ok;
        }
        result.rows.push_back(row);
        result.total_runs += row.runs;
        result.total_failures += row.failures;
    }

    // non-dominated front: maximize skips, minimize error
    for (ParetoRow& row : result.rows) {
        if (row.runs == row.failures) continue;
        bool dominated = false;
        for (const ParetoRow& other : result.rows) {
            if (&other == &row || other.runs == other.failures) continue;
            const bool geq_skips = other.mean_skips >= row.mean_skips;
            const bool leq_error = other.mean_error <= row.mean_error;
            const bool strict = other.mean_skips > row.mean_skips ||
                                other.mean_error < row.mean_error;
            if (geq_skips && leq_error && strict) {
                dominated = true;
                break;
            }
        }
        row.pareto_front = !dominated;
    }

    std::string csv =
        "sample_size,p_value_threshold,mean_skips,mean_error,failures,runs,pareto\n";
    for (const ParetoRow& row : result.rows) {
        csv += std::to_string(row.sample_count) + ',' +
               format_g17(row.p_value_threshold) + ',' + format_g17(row.mean_skips) +
               ',' + format_g17(row.mean_error) + ',' + std::to_string(row.failures) +
               ',' + std::to_string(row.runs) + ',' + (row.pareto_front ? "1" : "0") +
               '\n';
    }
    result.grid_csv = csv;
    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string prefix =
            (std::filesystem::path(cfg.out_dir) /
             ("tgv_pareto_" + std::to_string(cfg.master_seed)))
                .string();
        write_text_file(prefix + ".grid.csv", csv);
    }
    return result;
}

}  // namespace qpc
