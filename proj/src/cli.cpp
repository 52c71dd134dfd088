#include "memsim/cli.hpp"

#include "cli_internal.hpp"
#include "memsim/error.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace memsim::cli {

namespace fs = std::filesystem;

// ---- artifact output -------------------------------------------------------

void RunContext::metric(const std::string& key, double v) { metrics.emplace_back(key, format_double(v)); }
void RunContext::metric(const std::string& key, const std::string& v) { metrics.emplace_back(key, v); }

namespace {

std::ofstream open_artifact(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

} // namespace

void RunContext::write_trace(const std::string& name, const Trace& tr) {
    auto os = open_artifact(out / name);
    tr.write_csv(os);
    artifacts.push_back(name);
}

void RunContext::write_table(const std::string& name, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
    auto os = open_artifact(out / name);
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << format_double(r[k]);
        os << '\n';
    }
    artifacts.push_back(name);
}

void RunContext::write_text(const std::string& name, const std::string& body) {
    auto os = open_artifact(out / name);
    os << body;
    artifacts.push_back(name);
}

// ---- typed field access ----------------------------------------------------

double num(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ValidationError("field '" + key + "' must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw ValidationError("field '" + key + "' must be finite");
    return v;
}

int integer(const json& j, const std::string& key) {
    const double v = num(j, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("field '" + key + "' must be an integer");
    return static_cast<int>(v);
}

std::uint64_t seed_of(const json& cfg) {
    const json& s = cfg.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        throw ValidationError("field 'seed' must be a non-negative integer");
    return s.get<std::uint64_t>();
}

HpParams hp_from(const json& j) {
    HpParams p;
    p.alpha = num(j, "alpha");
    p.beta = num(j, "beta");
    p.r_on = num(j, "r_on");
    p.r_off = num(j, "r_off");
    p.polarity = integer(j, "polarity");
    validate(p);
    return p;
}

json hp_to(const HpParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"r_on", p.r_on}, {"r_off", p.r_off}, {"polarity", p.polarity}};
}

DriveSignal signal_from(const json& j) {
    static const std::map<std::string, SignalKind> kinds{{"dc", SignalKind::dc},
                                                         {"sine", SignalKind::sine},
                                                         {"square", SignalKind::square},
                                                         {"pulse_train", SignalKind::pulse_train}};
    const auto it = kinds.find(j.at("kind").get<std::string>());
    if (it == kinds.end()) throw ValidationError("field 'kind' must be dc, sine, square or pulse_train");
    DriveSignal s;
    s.kind = it->second;
    s.amplitude = num(j, "amplitude");
    s.frequency = num(j, "frequency");
    s.phase = num(j, "phase");
    s.duty = num(j, "duty");
    s.offset = num(j, "offset");
    validate(s);
    return s;
}

json signal_to(const DriveSignal& s) {
    static const char* names[] = {"dc", "sine", "square", "pulse_train"};
    return {{"kind", names[static_cast<int>(s.kind)]}, {"amplitude", s.amplitude}, {"frequency", s.frequency},
            {"phase", s.phase}, {"duty", s.duty}, {"offset", s.offset}};
}

IntegratorSpec integrator_from(const json& j) {
    IntegratorSpec s;
    const std::string m = j.at("method").get<std::string>();
    if (m == "euler")
        s.method = Method::euler;
    else if (m == "rk4")
        s.method = Method::rk4;
    else
        throw ValidationError("field 'integrator.method' must be euler or rk4");
    s.dt = num(j, "dt");
    s.t_end = j.contains("t_end") ? num(j, "t_end") : 0.0;
    if (!(s.dt > 0.0)) throw ValidationError("field 'integrator.dt' must be > 0");
    if (!(s.t_end >= 0.0)) throw ValidationError("field 'integrator.t_end' must be >= 0");
    return s;
}

json integrator_to(const IntegratorSpec& s) {
    return {{"method", s.method == Method::euler ? "euler" : "rk4"}, {"dt", s.dt}, {"t_end", s.t_end}};
}

// ---- config assembly -------------------------------------------------------

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const char* type_name(const json& j) {
    if (j.is_number()) return "a number";
    if (j.is_string()) return "a string";
    if (j.is_boolean()) return "a boolean";
    if (j.is_array()) return "an array";
    return "an object";
}

void check_scalar(const json& schema, const json& v, const std::string& path) {
    const bool ok = (schema.is_number() && v.is_number()) || (schema.is_string() && v.is_string()) ||
                    (schema.is_boolean() && v.is_boolean());
    if (!ok) throw ValidationError("field '" + path + "' must be " + type_name(schema));
}

// Schema = the defaults: every user field must exist there with the same type.
// Array elements are checked against the first default element, which also fills missing fields.
void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ValidationError("field '" + (path.empty() ? "<root>" : path) + "' must be an object");
    for (const auto& [k, v] : user.items()) {
        const std::string p = join(path, k);
        if (!base.contains(k)) throw ValidationError("unknown field '" + p + "'");
        json& b = base[k];
        if (b.is_object()) {
            overlay(b, v, p);
        } else if (b.is_array()) {
            if (!v.is_array()) throw ValidationError("field '" + p + "' must be an array");
            const json tmpl = b.empty() ? json(0.0) : b.front();
            json out = json::array();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string pi = p + "[" + std::to_string(i) + "]";
                if (tmpl.is_object()) {
                    json e = tmpl;
                    overlay(e, v[i], pi);
                    out.push_back(std::move(e));
                } else {
                    check_scalar(tmpl, v[i], pi);
                    out.push_back(v[i]);
                }
            }
            b = std::move(out);
        } else {
            check_scalar(b, v, p);
            // Keep float fields float so that 1 and 1.0 hash the same.
            b = b.is_number_float() ? json(v.get<double>()) : v;
        }
    }
}

const Command& find_command(const std::string& name) {
    for (const auto& c : commands())
        if (c.name == name) return c;
    throw ValidationError("unknown subcommand '" + name + "'");
}

json load_config_file(const std::string& path, const std::string& subcommand) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config root must be an object");
    if (!j.contains("schema_version")) throw ValidationError("field 'schema_version' is required");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != 1)
        throw ValidationError("field 'schema_version' must be 1");
    j.erase("schema_version");
    if (j.contains("experiment")) {
        if (!j["experiment"].is_string() || j["experiment"].get<std::string>() != subcommand)
            throw ValidationError("field 'experiment' must be '" + subcommand + "'");
        j.erase("experiment");
    }
    return j;
}

fs::path output_dir(const Options& opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    const char* root = std::getenv("MEMNET_OUT");
    return fs::path(root && *root ? root : "memsim_out") / opt.subcommand;
}

} // namespace

std::vector<std::string> subcommands() {
    std::vector<std::string> out;
    for (const auto& c : commands()) out.push_back(c.name);
    return out;
}

std::vector<std::string> presets(const std::string& subcommand) {
    std::vector<std::string> out;
    for (const auto& [k, v] : find_command(subcommand).presets) out.push_back(k);
    return out;
}

json effective_config(const Options& opt) {
    const Command& cmd = find_command(opt.subcommand);
    json cfg = cmd.defaults;
    if (!opt.preset.empty()) {
        const auto it = cmd.presets.find(opt.preset);
        if (it == cmd.presets.end()) {
            std::string known;
            for (const auto& [k, v] : cmd.presets) known += (known.empty() ? "" : ", ") + k;
            throw ValidationError("unknown preset '" + opt.preset + "' for " + opt.subcommand + " (known: " + known + ")");
        }
        overlay(cfg, it->second, "");
    }
    if (!opt.config_path.empty()) overlay(cfg, load_config_file(opt.config_path, opt.subcommand), "");
    if (opt.seed) cfg["seed"] = *opt.seed;
    for (const auto& [flag, value, key] : {std::tuple{"--dt", opt.dt, "dt"}, std::tuple{"--t-end", opt.t_end, "t_end"}}) {
        if (!value) continue;
        if (!cfg.contains("integrator") || !cfg["integrator"].contains(key))
            throw ValidationError(std::string(flag) + " does not apply to " + opt.subcommand);
        cfg["integrator"][key] = *value;
    }
    if (!opt.maze.empty()) {
        if (!cfg.contains("maze_file")) throw ValidationError("--maze applies to the maze subcommand only");
        cfg["maze_file"] = opt.maze;
    }
    if (opt.literal) {
        if (!cfg.contains("literal")) throw ValidationError("--literal applies to crossbar-train only");
        cfg["literal"] = true;
    }
    seed_of(cfg);
    return cfg;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
    return os.str();
}

// Keys are sorted by the json object type, so equal configs hash equally.
std::string config_hash(const json& cfg) { return sha256_hex(cfg.dump()); }

int run(const Options& opt, std::ostream& out, std::ostream& err) {
    try {
        const json cfg = effective_config(opt);
        const fs::path dir = output_dir(opt);
        fs::create_directories(dir);
        RunContext ctx{cfg, dir, out, {}, {}, exit_ok};
        find_command(opt.subcommand).run(ctx);

        std::ostringstream metrics;
        for (const auto& [k, v] : ctx.metrics) metrics << k << '=' << v << '\n';
        ctx.write_text("metrics.txt", metrics.str());
        const json manifest{{"subcommand", opt.subcommand},
                            {"preset", opt.preset.empty() ? "default" : opt.preset},
                            {"version", MEMSIM_VERSION},
                            {"seed", seed_of(cfg)},
                            {"config_sha256", config_hash(cfg)},
                            {"config", cfg},
                            {"artifacts", ctx.artifacts}};
        ctx.write_text("manifest.json", manifest.dump(2) + "\n");
        out << metrics.str() << "artifacts in " << dir.string() << '\n';
        return ctx.exit_code;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return exit_validation;
    } catch (const json::exception& e) {
        err << "validation error: " << e.what() << '\n';
        return exit_validation;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int main(int argc, char** argv) {
    CLI::App app{"Memristor device, circuit and network experiments"};
    app.set_version_flag("--version", MEMSIM_VERSION);
    Options opt;
    std::uint64_t seed = 0;
    double dt = 0.0, t_end = 0.0;
    app.add_option("--preset", opt.preset, "Named configuration");
    app.add_option("--config", opt.config_path, "JSON config overlay");
    app.add_option("--out", opt.out_dir, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed");
    auto* dt_opt = app.add_option("--dt", dt, "Integrator step");
    auto* t_end_opt = app.add_option("--t-end", t_end, "Integration horizon");
    app.add_option("--maze", opt.maze, "Maze text file");
    app.add_flag("--literal", opt.literal, "Sanger rule in its literal square form");
    app.require_subcommand(1);
    static const std::map<std::string, std::string> blurb{
        {"hysteresis", "Pinched I-V loops of an HP cell under sine drive"},
        {"write-read", "SET/RESET and repeated reads on a storage crossbar"},
        {"mc-volatility", "Memristor-capacitor discharge against its Lambert-W form"},
        {"amoeba", "Adaptation circuit under a drive schedule"},
        {"plant", "Plant memristor with optional parasitic RC branch"},
        {"hh", "Gated potassium and sodium channel memristors"},
        {"network-soc", "Relaxation exponent and spectrum of a random network"},
        {"maze", "Maze solving by a memristive network"},
        {"crossbar-mvm", "Analog matrix-vector multiply and programming"},
        {"crossbar-train", "Adaline, Sanger or gradient updates on a crossbar"},
        {"stdp", "STDP kernel mapped onto write pulses"},
        {"rc-demo", "Reservoir computing delay task"},
        {"nef-demo", "NEF encode and decode with LIF neurons"},
        {"lca", "Sparse coding with the locally competitive algorithm"},
        {"energy", "Digital vs memristive energy estimates"},
    };
    for (const auto& name : subcommands()) {
        const auto it = blurb.find(name);
        app.add_subcommand(name, it == blurb.end() ? "" : it->second)->fallthrough();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    }
    opt.subcommand = app.get_subcommands().front()->get_name();
    if (*seed_opt) opt.seed = seed;
    if (*dt_opt) opt.dt = dt;
    if (*t_end_opt) opt.t_end = t_end;
    return run(opt, std::cout, std::cerr);
}

} // namespace memsim::cli
