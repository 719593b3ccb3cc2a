#include "qpc/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace qpc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::int64_t x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not an integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<T>(parse(key, item)));
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
    return out;
}

template <class T>
std::string format_list(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_floating_point_v<T>) {
            s += format_double(v[i]);
        } else {
            s += std::to_string(v[i]);
        }
    }
    return s;
}

/// Declarative schema: binds every flat key to a reader and a writer so
/// parsing, validation, and the config echo stay in one place.
struct Binding {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, Binding>& schema() {
    static const std::map<std::string, Binding> s = [] {
        std::map<std::string, Binding> m;
        auto str = [&](const std::string& key, std::string ExperimentConfig::* f) {
            m[key] = {[f](ExperimentConfig& c, const std::string&, const std::string& v) {
                          c.*f = v;
                      },
                      [f](const ExperimentConfig& c) { return c.*f; }};
        };
        auto setter = [&](const std::string& key, auto set, auto get) {
            m[key] = {set, get};
        };

        str("case", &ExperimentConfig::case_name);
        str("out_dir", &ExperimentConfig::out_dir);
        setter(
            "master_seed",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.master_seed = static_cast<std::uint64_t>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.master_seed); });
        setter(
            "repetitions",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.repetitions = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.repetitions); });
        setter(
            "snapshot_stride",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.snapshot_stride = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.snapshot_stride); });
        setter(
            "t_end",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.t_end = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.t_end); });

        setter(
            "pc.mode",
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
                const auto mode = pc_mode_from_string(v);
                if (!mode) throw ConfigError("config: unknown pc.mode '" + v + "'");
                c.pc.mode = *mode;
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.pc.mode)); });
        setter(
            "pc.async_staged",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pc.async_staged = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) {
                return std::string(c.pc.async_staged ? "true" : "false");
            });
        setter(
            "pc.sample_count",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pc.sample_count = parse_int(k, v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.pc.sample_count); });
        setter(
            "pc.p_value_threshold",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pc.p_value_threshold = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.pc.p_value_threshold); });
        setter(
            "pc.overlap_threshold",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pc.overlap_threshold = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.pc.overlap_threshold); });
        setter(
            "pc.skip_rate",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pc.skip_rate = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.pc.skip_rate); });

        setter(
            "tgv.n_side",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.tgv.n_side = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.tgv.n_side); });
        setter(
            "tgv.L",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.tgv.L = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.tgv.L); });
        setter(
            "tgv.U",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.tgv.U = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.tgv.U); });
        setter(
            "tgv.Re",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.tgv.Re = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.tgv.Re); });
        setter(
            "tgv.shifting",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.tgv.shifting = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) {
                return std::string(c.tgv.shifting ? "true" : "false");
            });

        setter(
            "dambreak.a",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.a = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.dambreak.a); });
        setter(
            "dambreak.nodes_per_a",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.nodes_per_a = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.dambreak.nodes_per_a); });
        setter(
            "dambreak.gravity",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.gravity = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.dambreak.gravity); });
        setter(
            "dambreak.nu",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.nu = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.dambreak.nu); });
        setter(
            "dambreak.hydrostatic_init",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.hydrostatic_init = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) {
                return std::string(c.dambreak.hydrostatic_init ? "true" : "false");
            });
        setter(
            "dambreak.shifting",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.dambreak.shifting = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) {
                return std::string(c.dambreak.shifting ? "true" : "false");
            });

        setter(
            "two_stream.nx",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.nx = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.two_stream.nx); });
        setter(
            "two_stream.nv",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.nv = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.two_stream.nv); });
        setter(
            "two_stream.k",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.k = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.k); });
        setter(
            "two_stream.v0",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.v0 = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.v0); });
        setter(
            "two_stream.vt",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.vt = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.vt); });
        setter(
            "two_stream.alpha",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.alpha = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.alpha); });
        setter(
            "two_stream.k_mode",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.k_mode = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.two_stream.k_mode); });
        setter(
            "two_stream.v_max",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.v_max = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.v_max); });
        setter(
            "two_stream.dt",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.two_stream.dt = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.two_stream.dt); });

        setter(
            "scaling.n_sides",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.n_sides = parse_list<int>(k, v, parse_int);
            },
            [](const ExperimentConfig& c) { return format_list(c.scaling.n_sides); });
        setter(
            "scaling.seeds",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.seeds = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.scaling.seeds); });
        setter(
            "scaling.probe_step",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.probe_step = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.scaling.probe_step); });
        setter(
            "scaling.gap_steps",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.gap_steps = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.scaling.gap_steps); });
        setter(
            "scaling.dfs_error",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.dfs_error = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.scaling.dfs_error); });
        setter(
            "scaling.hpc_p_value",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.scaling.hpc_p_value = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return format_double(c.scaling.hpc_p_value); });

        setter(
            "pareto.sample_counts",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pareto.sample_counts = parse_list<std::int64_t>(k, v, parse_int);
            },
            [](const ExperimentConfig& c) { return format_list(c.pareto.sample_counts); });
        setter(
            "pareto.p_values",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pareto.p_values = parse_list<double>(k, v, parse_double);
            },
            [](const ExperimentConfig& c) { return format_list(c.pareto.p_values); });
        setter(
            "pareto.repetitions",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pareto.repetitions = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.pareto.repetitions); });
        setter(
            "pareto.jobs",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.pareto.jobs = static_cast<int>(parse_int(k, v));
            },
            [](const ExperimentConfig& c) { return std::to_string(c.pareto.jobs); });
        return m;
    }();
    return s;
}

void check_semantics(const ExperimentConfig& c) {
    if (c.case_name != "tgv" && c.case_name != "dambreak" &&
        c.case_name != "two_stream")
        throw ConfigError("config: unknown case '" + c.case_name + "'");
    if (c.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    if (c.snapshot_stride < 0) throw ConfigError("config: snapshot_stride must be >= 0");
    try {
        c.pc.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace

double ExperimentConfig::resolved_t_end() const {
    if (t_end > 0.0) return t_end;
    if (case_name == "tgv") return 2.6;
    if (case_name == "dambreak") return 0.43;
    return 50.0;  // two_stream
}

std::map<std::string, std::string> ExperimentConfig::to_flat_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, binding] : schema()) out[key] = binding.get(*this);
    return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> flat;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.resize(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        const std::string flat_key = section.empty() ? key : section + "." + key;
        if (flat.count(flat_key))
            throw ConfigError("config: duplicate key '" + flat_key + "'");
        flat[flat_key] = value;
    }
    return flat;
}

ExperimentConfig config_from_flat_map(const std::map<std::string, std::string>& flat) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : flat) {
        const auto it = schema().find(key);
        if (it == schema().end()) throw ConfigError("config: unknown key '" + key + "'");
        it->second.set(cfg, key, value);
    }
    check_semantics(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_flat_map(parse_config_text(buf.str()));
}

}  // namespace qpc
