#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qpc/cases.hpp"
#include "qpc/pcore.hpp"
#include "qpc/vlasov.hpp"

namespace qpc {

/// Raised for malformed or out-of-schema configuration input. The CLI maps
/// it to exit code 2 before any compute starts.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScalingSpec {
    std::vector<int> n_sides{8, 12, 16, 24, 32};
    int seeds = 10;
    int probe_step = 40;
    int gap_steps = 10;
    double dfs_error = 0.05;
    double hpc_p_value = 0.05;
};

struct ParetoSpec {
    std::vector<std::int64_t> sample_counts{96, 192, 385, 770, 1540, 3080};
    std::vector<double> p_values{0.001, 0.005, 0.01, 0.02, 0.05,
                                 0.1,   0.2,   0.3,  0.4,  0.5};
    int repetitions = 25;
    int jobs = 1;
};

/// Full experiment description: case selection, policy parameters, per-case
/// physics knobs and the sweep grids. Parsed from flat key = value text with
/// [section] headers; unknown keys are rejected.
struct ExperimentConfig {
    std::string case_name = "tgv";  // tgv | dambreak | two_stream
    std::string out_dir = "out";
    std::uint64_t master_seed = 1;
    int repetitions = 1;
    int snapshot_stride = 0;  // 0 disables particle/grid snapshots
    double t_end = -1.0;      // < 0 selects the per-case default

    PcConfig pc;
    TgvSpec tgv;
    DamBreakSpec dambreak;
    TwoStreamSpec two_stream;
    ScalingSpec scaling;
    ParetoSpec pareto;

    double resolved_t_end() const;

    /// Canonical flat key -> value rendering of every setting (config echo).
    std::map<std::string, std::string> to_flat_map() const;
};

/// Parse "key = value" lines with [section] headers; '#' and ';' start
/// comments. Returns flat "section.key" entries.
std::map<std::string, std::string> parse_config_text(const std::string& text);

ExperimentConfig config_from_flat_map(const std::map<std::string, std::string>& flat);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace qpc
