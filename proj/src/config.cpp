#include "bve/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bve {

namespace {

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;
using Getter = std::function<std::string(const ScenarioConfig&)>;

struct KeySpec {
    std::string section;
    std::string key;
    Setter set;
    Getter get;
};

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sig9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double to_double(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(key), "expected a finite number, got '" + s + "'");
}

long long to_int(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(key), "expected an integer, got '" + s + "'");
}

std::uint64_t to_u64(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    try {
        std::size_t pos = 0;
        if (!s.empty() && s.front() != '-') {
            const unsigned long long v = std::stoull(s, &pos);
            if (pos == s.size()) {
                return v;
            }
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + s + "'");
}

bool to_bool(std::string_view key, std::string_view text) {
    const std::string s = lower(trim(text));
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw ConfigError(std::string(key), "expected a boolean, got '" + s + "'");
}

template <typename Enum>
Enum to_enum(std::string_view key, std::string_view text,
             std::initializer_list<std::pair<const char*, Enum>> choices) {
    const std::string s = lower(trim(text));
    std::string names;
    for (const auto& [name, value] : choices) {
        if (s == name) {
            return value;
        }
        names += names.empty() ? name : std::string("|") + name;
    }
    throw ConfigError(std::string(key), "expected one of " + names + ", got '" + s + "'");
}

template <typename Access>
KeySpec real_key(const char* section, const char* key, Access access) {
    return {section, key,
            [key, access](ScenarioConfig& c, std::string_view v) { access(c) = to_double(key, v); },
            [access](const ScenarioConfig& c) { return exact(access(c)); }};
}

template <typename Access>
KeySpec int_key(const char* section, const char* key, Access access) {
    return {section, key,
            [key, access](ScenarioConfig& c, std::string_view v) {
                const long long n = to_int(key, v);
                if (n < 0 || n > 100000000) {
                    throw ConfigError(key, "out of range");
                }
                access(c) = static_cast<int>(n);
            },
            [access](const ScenarioConfig& c) { return std::to_string(access(c)); }};
}

void set_sigma(ScenarioConfig& c, int axis, double v) {
    Vec3 d = c.sigma_c.matrix().diagonal();
    d(axis) = v;
    c.sigma_c = Covariance3::diagonal(d.x(), d.y(), d.z());
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = [] {
        std::vector<KeySpec> t;
        t.push_back({"simulation", "experiment",
                     [](ScenarioConfig& c, std::string_view v) {
                         try {
                             c.experiment = parse_experiment(trim(v));
                         } catch (const UnknownExperiment& e) {
                             throw ConfigError("experiment", e.what());
                         }
                     },
                     [](const ScenarioConfig& c) { return to_string(c.experiment); }});
        t.push_back(int_key("simulation", "runs", [](auto& c) -> auto& { return c.runs; }));
        t.push_back(int_key("simulation", "iterations", [](auto& c) -> auto& { return c.iterations; }));
        t.push_back({"simulation", "seed", [](ScenarioConfig& c, std::string_view v) { c.seed = to_u64("seed", v); },
                     [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
        t.push_back({"simulation", "loss",
                     [](ScenarioConfig& c, std::string_view v) {
                         if (lower(trim(v)) == "default") {
                             c.loss_override.reset();
                             return;
                         }
                         c.loss_override = to_enum<LossFamily>("loss", v,
                                                               {{"dispersion", LossFamily::Dispersion},
                                                                {"max_eig", LossFamily::MaxEigenvalue},
                                                                {"approach", LossFamily::DispersionWithApproach}});
                     },
                     [](const ScenarioConfig& c) -> std::string {
                         if (!c.loss_override) {
                             return "default";
                         }
                         switch (*c.loss_override) {
                         case LossFamily::Dispersion:
                             return "dispersion";
                         case LossFamily::MaxEigenvalue:
                             return "max_eig";
                         case LossFamily::DispersionWithApproach:
                             return "approach";
                         }
                         return "default";
                     }});
        t.push_back({"simulation", "noise",
                     [](ScenarioConfig& c, std::string_view v) { c.measurement_noise = to_bool("noise", v); },
                     [](const ScenarioConfig& c) { return std::string(c.measurement_noise ? "true" : "false"); }});
        t.push_back(real_key("simulation", "init_bias", [](auto& c) -> auto& { return c.initial_bias; }));
        t.push_back({"simulation", "belief_source",
                     [](ScenarioConfig& c, std::string_view v) {
                         c.belief_source = to_enum<BeliefSource>(
                             "belief_source", v, {{"fused", BeliefSource::Fused}, {"ekf", BeliefSource::Ekf}});
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.belief_source == BeliefSource::Fused ? "fused" : "ekf");
                     }});

        for (int axis = 0; axis < 3; ++axis) {
            static const char* names[] = {"sigma_xx", "sigma_yy", "sigma_zz"};
            const char* key = names[axis];
            t.push_back({"belief", key,
                         [axis, key](ScenarioConfig& c, std::string_view v) { set_sigma(c, axis, to_double(key, v)); },
                         [axis](const ScenarioConfig& c) { return exact(c.sigma_c(axis, axis)); }});
        }

        t.push_back(real_key("objective", "sigmoid_a", [](auto& c) -> auto& { return c.sigmoid.a; }));
        t.push_back(real_key("objective", "sigmoid_b", [](auto& c) -> auto& { return c.sigmoid.b; }));

        t.push_back(real_key("constraints", "r_m",
                             [](auto& c) -> auto& { return c.constraints.workspace.radius; }));
        t.push_back(real_key("constraints", "m_x",
                             [](auto& c) -> auto& { return c.constraints.workspace.center.x(); }));
        t.push_back(real_key("constraints", "m_y",
                             [](auto& c) -> auto& { return c.constraints.workspace.center.y(); }));
        t.push_back(real_key("constraints", "m_z",
                             [](auto& c) -> auto& { return c.constraints.workspace.center.z(); }));
        t.push_back(real_key("constraints", "r_k",
                             [](auto& c) -> auto& { return c.constraints.fruit.radius; }));
        t.push_back(real_key("constraints", "hfov", [](auto& c) -> auto& { return c.constraints.fov.hfov; }));
        t.push_back(real_key("constraints", "wall_d",
                             [](auto& c) -> auto& { return c.constraints.wall.standoff; }));
        t.push_back(real_key("constraints", "r_d", [](auto& c) -> auto& { return c.constraints.step.radius; }));
        t.push_back(real_key("constraints", "l_dist",
                             [](auto& c) -> auto& { return c.constraints.shell.l_dist; }));
        t.push_back(real_key("constraints", "l_eps",
                             [](auto& c) -> auto& { return c.constraints.shell.epsilon; }));
        t.push_back(real_key("constraints", "r_inner",
                             [](auto& c) -> auto& { return c.constraints.reach.inner_radius; }));
        t.push_back({"constraints", "fov_sign",
                     [](ScenarioConfig& c, std::string_view v) {
                         c.constraints.fov_sign = to_enum<FovSign>(
                             "fov_sign", v, {{"corrected", FovSign::Corrected}, {"paper", FovSign::Paper}});
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.constraints.fov_sign == FovSign::Corrected ? "corrected" : "paper");
                     }});
        t.push_back({"constraints", "fov_perp_mode",
                     [](ScenarioConfig& c, std::string_view v) {
                         c.constraints.perp_mode = to_enum<PerpMode>(
                             "fov_perp_mode", v, {{"paper", PerpMode::Paper}, {"orthogonal", PerpMode::Orthogonal}});
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.constraints.perp_mode == PerpMode::Paper ? "paper" : "orthogonal");
                     }});

        t.push_back(real_key("ekf", "q", [](auto& c) -> auto& { return c.process_noise; }));
        t.push_back({"ekf", "ekf_update",
                     [](ScenarioConfig& c, std::string_view v) {
                         c.covariance_update = to_enum<CovarianceUpdate>(
                             "ekf_update", v, {{"simple", CovarianceUpdate::Simple}, {"joseph", CovarianceUpdate::Joseph}});
                     },
                     [](const ScenarioConfig& c) {
                         return std::string(c.covariance_update == CovarianceUpdate::Simple ? "simple" : "joseph");
                     }});

        t.push_back(int_key("optimizer", "max_iterations",
                            [](auto& c) -> auto& { return c.solver.max_iterations; }));
        t.push_back(real_key("optimizer", "constraint_tolerance",
                             [](auto& c) -> auto& { return c.solver.constraint_tolerance; }));
        t.push_back(real_key("optimizer", "step_tolerance",
                             [](auto& c) -> auto& { return c.solver.step_tolerance; }));
        t.push_back(real_key("optimizer", "loss_tolerance",
                             [](auto& c) -> auto& { return c.solver.loss_tolerance; }));
        t.push_back(int_key("optimizer", "multistart",
                            [](auto& c) -> auto& { return c.solver.multistart_count; }));

        t.push_back(real_key("sweep", "sweep_max", [](auto& c) -> auto& { return c.sweep.max_error; }));
        t.push_back(real_key("sweep", "sweep_step", [](auto& c) -> auto& { return c.sweep.step; }));
        t.push_back(int_key("sweep", "sweep_sims", [](auto& c) -> auto& { return c.sweep.sims_per_level; }));
        return t;
    }();
    return table;
}

const KeySpec& find_key(std::string_view key) {
    for (const auto& spec : key_table()) {
        if (spec.key == key) {
            return spec;
        }
    }
    throw ConfigError(std::string(key), "unknown key");
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return os;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& spec : key_table()) {
            k.push_back(spec.key);
        }
        return k;
    }();
    return keys;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
    find_key(key).set(config, value);
}

std::string get_setting(const ScenarioConfig& config, std::string_view key) {
    return find_key(key).get(config);
}

Overrides read_config_file(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!std::filesystem::exists(path)) {
            throw ConfigError("config", "file '" + path.string() + "' does not exist");
        }
        throw ConfigError("config", e.what());
    }
    Overrides out;
    const auto add = [&](const std::string& key, const std::string& value) {
        if (out.contains(key)) {
            throw ConfigError(key, "set more than once in '" + path.string() + "'");
        }
        out[key] = value;
    };
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            add(name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            add(key, leaf.data());
        }
    }
    return out;
}

Overrides read_environment() {
    Overrides out;
    for (const auto& key : config_keys()) {
        std::string var = "BVE_" + key;
        std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(var.c_str())) {
            out[key] = v;
        }
    }
    return out;
}

ScenarioConfig parse_config(const Overrides& file, const Overrides& environment, const Overrides& flags) {
    ScenarioConfig config;
    for (const Overrides* layer : {&file, &environment, &flags}) {
        for (const auto& [key, value] : *layer) {
            apply_setting(config, key, value);
        }
    }
    config.validate();
    return config;
}

std::string write_config(const ScenarioConfig& config) {
    std::ostringstream os;
    std::string section;
    for (const auto& spec : key_table()) {
        if (spec.section != section) {
            os << (section.empty() ? "" : "\n") << '[' << spec.section << "]\n";
            section = spec.section;
        }
        os << spec.key << " = " << spec.get(config) << '\n';
    }
    return os.str();
}

void write_runs_csv(std::ostream& os, std::span<const ExperimentResult> results) {
    os << "experiment,run,seed,iter,cx,cy,cz,kx,ky,kz,xhatx,xhaty,xhatz,pxx,pyy,pzz,loss,eucl_err_m,status\n";
    for (const auto& result : results) {
        for (const auto& rec : result.records) {
            for (const auto& row : rec.rows) {
                os << result.report.experiment << ',' << rec.run << ',' << rec.seed << ',' << row.i;
                for (const Vec3* v : {&row.c, &rec.k, &row.x_hat, &row.p_diag}) {
                    for (int j = 0; j < 3; ++j) {
                        os << ',' << sig9((*v)(j));
                    }
                }
                os << ',' << sig9(row.loss) << ',' << sig9(row.eucl_err) << ',' << to_string(row.status) << '\n';
            }
        }
    }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
    os << "level_m,sims,mae_mm,mse_mm2,rmse_mm,mape_pct,mean_eucl_mm\n";
    for (const auto& r : rows) {
        os << sig9(r.level_m) << ',' << r.sims << ',' << sig9(r.mae_mm) << ',' << sig9(r.mse_mm2) << ','
           << sig9(r.rmse_mm) << ',' << sig9(r.mape_pct) << ',' << sig9(r.mean_eucl_mm) << '\n';
    }
}

std::string metrics_to_json(std::span<const MetricsReport> reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({{"experiment", r.experiment},
                       {"runs", r.runs},
                       {"failed_runs", r.failed_runs},
                       {"infeasible_runs", r.infeasible_runs},
                       {"mape_pct", r.mape_pct},
                       {"mae_mm", r.mae_mm},
                       {"rmse_mm", r.rmse_mm},
                       {"mse_mm2", r.mse_mm2},
                       {"mean_eucl_mm", r.mean_eucl_mm},
                       {"mean_initial_eucl_mm", r.mean_initial_eucl_mm}});
    }
    return nlohmann::json{{"experiments", arr}}.dump(2) + "\n";
}

std::vector<MetricsReport> metrics_from_json(const std::string& text) {
    std::vector<MetricsReport> out;
    try {
        const auto doc = nlohmann::json::parse(text);
        for (const auto& j : doc.at("experiments")) {
            MetricsReport r;
            j.at("experiment").get_to(r.experiment);
            j.at("runs").get_to(r.runs);
            j.at("failed_runs").get_to(r.failed_runs);
            j.at("infeasible_runs").get_to(r.infeasible_runs);
            j.at("mape_pct").get_to(r.mape_pct);
            j.at("mae_mm").get_to(r.mae_mm);
            j.at("rmse_mm").get_to(r.rmse_mm);
            j.at("mse_mm2").get_to(r.mse_mm2);
            j.at("mean_eucl_mm").get_to(r.mean_eucl_mm);
            j.at("mean_initial_eucl_mm").get_to(r.mean_initial_eucl_mm);
            out.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed metrics document: ") + e.what());
    }
    return out;
}

void emit_results(std::span<const ExperimentResult> results, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    {
        auto os = open_output(out_dir / "runs.csv");
        write_runs_csv(os, results);
        if (!os) {
            throw IoError("write failed: runs.csv");
        }
    }
    std::vector<MetricsReport> reports;
    for (const auto& r : results) {
        reports.push_back(r.report);
    }
    auto os = open_output(out_dir / "metrics.json");
    os << metrics_to_json(reports);
    if (!os) {
        throw IoError("write failed: metrics.json");
    }
}

void emit_sweep(std::span<const SweepRow> rows, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    auto os = open_output(out_dir / "sweep.csv");
    write_sweep_csv(os, rows);
    if (!os) {
        throw IoError("write failed: sweep.csv");
    }
}

std::string format_metrics_table(std::span<const MetricsReport> reports) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-5s %10s %10s %10s %12s %12s %6s %6s\n", "", "MAPE(%)", "MAE(mm)",
                  "RMSE(mm)", "MSE(mm^2)", "Eucl(mm)", "runs", "fail");
    os << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-5s %10.2f %10.1f %10.1f %12.2f %12.1f %6d %6d\n", r.experiment.c_str(),
                      r.mape_pct, r.mae_mm, r.rmse_mm, r.mse_mm2, r.mean_eucl_mm, r.runs, r.failed_runs);
        os << line;
    }
    return os.str();
}

}  // namespace bve
