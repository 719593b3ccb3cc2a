#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpc/isph.hpp"
#include "qpc/pcore.hpp"
#include "qpc/qemu.hpp"

namespace qpc {

/// Raised when result files cannot be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "%.17g" rendering: shortest text that round-trips the exact double, so
/// identical runs produce byte-identical files.
std::string format_g17(double v);

/// "<case>_<mode>_<seed>" prefix of every artifact of one run.
std::string run_prefix(const std::string& case_name, const std::string& mode,
                       std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& contents);

/// Ledger CSV: step,action,p_value,p0_estimate,samples_spent.
std::string ledger_csv(const SkipLedger& ledger);

/// Histogram CSV: index,count.
std::string histogram_csv(const Histogram& hist);

/// Generic time-series CSV with the given header, e.g. "t,umax" or "t,UK,UE".
std::string series_csv(const std::string& header,
                       const std::vector<std::vector<double>>& rows);

/// Particle snapshot CSV: id,kind,x,y,u,v,p.
std::string snapshot_csv(const ParticleSystem& sys);

struct RunSummary {
    std::string case_name;
    std::string mode;
    std::uint64_t seed = 0;
    double skip_fraction = 0.0;
    std::int64_t update_count = 0;
    std::int64_t total_steps = 0;
    double error_metric = std::numeric_limits<double>::quiet_NaN();
    std::int64_t samples_total = 0;
    double wall_seconds = 0.0;  // excluded from the summary CSV
    std::optional<std::int64_t> failure_step;
    std::string failure_reason;
};

/// Deterministic one-row summary CSV (no wall time).
std::string summary_csv(const RunSummary& summary);

/// Summary JSON with a config echo that reparses through the config schema.
std::string summary_json(const RunSummary& summary,
                         const std::map<std::string, std::string>& config_echo);

}  // namespace qpc
