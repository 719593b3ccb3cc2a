#include "qpc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace qpc {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string run_prefix(const std::string& case_name, const std::string& mode,
                       std::uint64_t seed) {
    return case_name + "_" + mode + "_" + std::to_string(seed);
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("cannot open for writing: " + path);
    out << contents;
    if (!out) throw OutputError("write failed: " + path);
}

std::string ledger_csv(const SkipLedger& ledger) {
    std::string s = "step,action,p_value,p0_estimate,samples_spent\n";
    for (const PcDecision& d : ledger.decisions) {
        s += std::to_string(d.step_index);
        s += d.action == PcAction::Skip ? ",skip," : ",update,";
        if (d.p_value) s += format_g17(*d.p_value);
        s += ',';
        if (d.p0_estimate) s += format_g17(*d.p0_estimate);
        s += ',';
        s += std::to_string(d.samples_spent);
        s += '\n';
    }
    return s;
}

std::string histogram_csv(const Histogram& hist) {
    std::string s = "index,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        s += std::to_string(i);
        s += ',';
        s += std::to_string(hist.counts[i]);
        s += '\n';
    }
    return s;
}

std::string series_csv(const std::string& header,
                       const std::vector<std::vector<double>>& rows) {
    std::string s = header + "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += format_g17(row[i]);
        }
        s += '\n';
    }
    return s;
}

std::string snapshot_csv(const ParticleSystem& sys) {
    std::string s = "id,kind,x,y,u,v,p\n";
    for (std::size_t i = 0; i < sys.size(); ++i) {
        s += std::to_string(i);
        s += sys.kind[i] == ParticleKind::Fluid ? ",fluid," : ",boundary,";
        s += format_g17(sys.positions[i].x);
        s += ',';
        s += format_g17(sys.positions[i].y);
        s += ',';
        s += format_g17(sys.velocities[i].x);
        s += ',';
        s += format_g17(sys.velocities[i].y);
        s += ',';
        s += format_g17(sys.pressures[i]);
        s += '\n';
    }
    return s;
}

std::string summary_csv(const RunSummary& summary) {
    std::string s =
        "case,mode,seed,skip_fraction,update_count,total_steps,error_metric,"
        "samples_total,failure_step\n";
    s += summary.case_name + ',' + summary.mode + ',' + std::to_string(summary.seed) +
         ',';
    s += format_g17(summary.skip_fraction);
    s += ',' + std::to_string(summary.update_count);
    s += ',' + std::to_string(summary.total_steps);
    s += ',';
    if (!std::isnan(summary.error_metric)) s += format_g17(summary.error_metric);
    s += ',' + std::to_string(summary.samples_total);
    s += ',';
    if (summary.failure_step) s += std::to_string(*summary.failure_step);
    s += '\n';
    return s;
}

std::string summary_json(const RunSummary& summary,
                         const std::map<std::string, std::string>& config_echo) {
    nlohmann::json j;
    j["case"] = summary.case_name;
    j["mode"] = summary.mode;
    j["seed"] = summary.seed;
    j["skip_fraction"] = summary.skip_fraction;
    j["update_count"] = summary.update_count;
    j["total_steps"] = summary.total_steps;
    if (std::isnan(summary.error_metric)) {
        j["error_metric"] = nullptr;
    } else {
        j["error_metric"] = summary.error_metric;
    }
    j["samples_total"] = summary.samples_total;
    j["wall_seconds"] = summary.wall_seconds;
    if (summary.failure_step) {
        j["failure_step"] = *summary.failure_step;
        j["failure_reason"] = summary.failure_reason;
    } else {
        j["failure_step"] = nullptr;
    }
    j["config"] = config_echo;
    return j.dump(2) + "\n";
}

}  // namespace qpc
