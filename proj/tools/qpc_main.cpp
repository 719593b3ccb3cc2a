// qpc: predictor-corrector simulation driver.
//
// Subcommands:
//   run       execute the configured case and emit per-run artifacts
//   scaling   sample-size scaling study over TGV resolutions
//   pareto    H-PC sample-count x p-value sweep with Pareto front
//   validate  parse and schema-check a config file, print the resolved keys
//
// Exit codes: 0 ok, 2 config error, 3 simulation divergence.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qpc/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string policy;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

qpc::ExperimentConfig resolve_config(const CliOptions& opts) {
    qpc::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = qpc::load_config_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed_set) cfg.master_seed = opts.seed;
    if (!opts.policy.empty()) {
        const auto mode = qpc::pc_mode_from_string(opts.policy);
        if (!mode) throw qpc::ConfigError("unknown policy '" + opts.policy + "'");
        cfg.pc.mode = *mode;
    }
    cfg.pc.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file path");
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--policy", opts.policy,
                    "policy override: fcs|hpc|qpc|random_skip|periodic_skip");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

int cmd_run(const CliOptions& opts) {
    const qpc::ExperimentConfig cfg = resolve_config(opts);
    const auto runs = qpc::run_all_repetitions(cfg);
    bool diverged = false;
    for (const qpc::RunArtifacts& art : runs) {
        if (!opts.quiet) {
            std::printf("%s seed=%llu steps=%lld updates=%lld skip_fraction=%.4f%s\n",
                        qpc::run_prefix(art.summary.case_name, art.summary.mode,
                                        art.summary.seed)
                            .c_str(),
                        static_cast<unsigned long long>(art.summary.seed),
                        static_cast<long long>(art.summary.total_steps),
                        static_cast<long long>(art.summary.update_count),
                        art.summary.skip_fraction,
                        art.summary.failure_step ? "  [DIVERGED]" : "");
        }
        if (art.summary.failure_step) diverged = true;
    }
    return diverged ? kExitDiverged : kExitOk;
}

int cmd_scaling(const CliOptions& opts) {
    const qpc::ExperimentConfig cfg = resolve_config(opts);
    const qpc::ScalingResult res = qpc::scaling_experiment(cfg);
    if (!opts.quiet) {
        std::printf("N,samples_dfs,samples_hpc,samples_qpc\n");
        for (const qpc::ScalingRow& row : res.rows) {
            if (!row.ok) {
                std::printf("%d,(search did not converge; omitted)\n", row.problem_size);
                continue;
            }
            std::printf("%d,%.1f,%.1f,%.0f\n", row.problem_size, row.samples_dfs,
                        row.samples_hpc, row.samples_qpc);
        }
        std::printf("slopes: dfs=%.3f hpc=%.3f qpc=%.3f\n", res.slope_dfs,
                    res.slope_hpc, res.slope_qpc);
    }
    return kExitOk;
}

int cmd_pareto(const CliOptions& opts) {
    const qpc::ExperimentConfig cfg = resolve_config(opts);
    const qpc::ParetoResult res = qpc::pareto_sweep(cfg);
    if (!opts.quiet) {
        std::printf("%d runs, %d failures\n", res.total_runs, res.total_failures);
        for (const qpc::ParetoRow& row : res.rows) {
            if (!row.pareto_front) continue;
            std::printf("front: n=%lld p=%g mean_skips=%.1f mean_error=%.5f\n",
                        static_cast<long long>(row.sample_count),
                        row.p_value_threshold, row.mean_skips, row.mean_error);
        }
    }
    return kExitOk;
}

int cmd_validate(const CliOptions& opts) {
    const qpc::ExperimentConfig cfg = resolve_config(opts);
    for (const auto& [key, value] : cfg.to_flat_map())
        std::printf("%s = %s\n", key.c_str(), value.c_str());
    std::printf("ok\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictor-corrector linear-solve skipping simulation suite"};
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* run = app.add_subcommand("run", "execute the configured case");
    CLI::App* scaling = app.add_subcommand("scaling", "sample-size scaling study");
    CLI::App* pareto = app.add_subcommand("pareto", "H-PC parameter sweep");
    CLI::App* validate = app.add_subcommand("validate", "check a config file");
    for (CLI::App* cmd : {run, scaling, pareto, validate}) add_common(cmd, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) return cmd_run(opts);
        if (app.got_subcommand(scaling)) return cmd_scaling(opts);
        if (app.got_subcommand(pareto)) return cmd_pareto(opts);
        return cmd_validate(opts);
    } catch (const qpc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDiverged;
    }
}
