#include "stefan/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <regex>
#include <sstream>

#include "stefan/error.hpp"

namespace stefan {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Context {
    int line;
    const std::string& key;
};

double parse_double(const std::string& v, const Context& c)
{
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw ParseError(c.line, c.key, "expected a finite number, got '" + v + "'");
}

int parse_int(const std::string& v, const Context& c)
{
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (trim(v.substr(pos)).empty() && d >= INT32_MIN && d <= INT32_MAX) return static_cast<int>(d);
    } catch (const std::exception&) {
    }
    throw ParseError(c.line, c.key, "expected an integer, got '" + v + "'");
}

bool parse_bool(const std::string& v, const Context& c)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(c.line, c.key, "expected true or false, got '" + v + "'");
}

Parity parse_parity(const std::string& v, const Context& c)
{
    if (v == "cos") return Parity::cosine;
    if (v == "sin") return Parity::sine;
    throw ParseError(c.line, c.key, "parity must be cos or sin, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "(m,k,cos)=value; ..."
std::vector<ModeCoefficient> parse_q0_modes(const std::string& v, const Context& c)
{
    static const std::regex re(R"(\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(cos|sin)\s*\)\s*=\s*(\S+))");
    std::vector<ModeCoefficient> out;
    for (const auto& item : split(v, ';')) {
        std::smatch m;
        if (!std::regex_match(item, m, re)) throw ParseError(c.line, c.key, "malformed mode entry '" + item + "'");
        ModeCoefficient mc;
        mc.m = parse_int(m[1], c);
        mc.k = parse_int(m[2], c);
        mc.parity = parse_parity(m[3], c);
        mc.value = parse_double(m[4], c);
        if (mc.k < 1) throw ParseError(c.line, c.key, "radial index must be >= 1");
        if (mc.m == 0 && mc.parity == Parity::sine) throw ParseError(c.line, c.key, "sin parity needs m >= 1");
        out.push_back(mc);
    }
    return out;
}

// "(m,cos)=value; (m,sin)=value"
std::vector<HeightMode> parse_h0_modes(const std::string& v, const Context& c)
{
    static const std::regex re(R"(\(\s*(\d+)\s*,\s*(cos|sin)\s*\)\s*=\s*(\S+))");
    std::vector<HeightMode> out;
    for (const auto& item : split(v, ';')) {
        std::smatch m;
        if (!std::regex_match(item, m, re)) throw ParseError(c.line, c.key, "malformed height entry '" + item + "'");
        int wn = parse_int(m[1], c);
        double val = parse_double(m[3], c);
        HeightMode* target = nullptr;
        for (auto& hm : out) {
            if (hm.m == wn) target = &hm;
        }
        if (!target) {
            out.push_back({wn, 0.0, 0.0});
            target = &out.back();
        }
        (m[2] == "cos" ? target->cos_coeff : target->sin_coeff) += val;
    }
    return out;
}

std::string echo_q0(const std::vector<ModeCoefficient>& modes)
{
    std::string s;
    for (const auto& mc : modes) {
        if (!s.empty()) s += "; ";
        s += "(" + std::to_string(mc.m) + "," + std::to_string(mc.k) + "," +
             (mc.parity == Parity::cosine ? "cos" : "sin") + ")=" + fmt_double(mc.value);
    }
    return s;
}

std::string echo_h0(const std::vector<HeightMode>& modes)
{
    std::string s;
    for (const auto& hm : modes) {
        for (int p = 0; p < 2; ++p) {
            double v = p == 0 ? hm.cos_coeff : hm.sin_coeff;
            if (v == 0.0) continue;
            if (!s.empty()) s += "; ";
            s += "(" + std::to_string(hm.m) + "," + (p == 0 ? "cos" : "sin") + ")=" + fmt_double(v);
        }
    }
    return s;
}

struct Key {
    const char* name;
    std::function<void(SimConfig&, const std::string&, const Context&)> set;
    std::function<std::string(const SimConfig&)> get;
};

#define KEY_INT(field)                                                                              \
    Key{#field, [](SimConfig& c, const std::string& v, const Context& x) { c.field = parse_int(v, x); }, \
        [](const SimConfig& c) { return std::to_string(c.field); }}
#define KEY_DOUBLE(field)                                                                              \
    Key{#field, [](SimConfig& c, const std::string& v, const Context& x) { c.field = parse_double(v, x); }, \
        [](const SimConfig& c) { return fmt_double(c.field); }}
#define KEY_BOOL(field)                                                                              \
    Key{#field, [](SimConfig& c, const std::string& v, const Context& x) { c.field = parse_bool(v, x); }, \
        [](const SimConfig& c) { return std::string(c.field ? "true" : "false"); }}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        Key{"preset", [](SimConfig&, const std::string&, const Context&) {},
            [](const SimConfig& c) { return c.preset; }},
        KEY_INT(n_theta),
        KEY_INT(n_r),
        KEY_DOUBLE(dt),
        KEY_DOUBLE(t_end),
        KEY_INT(snapshot_stride),
        KEY_INT(n_modes),
        Key{"q0_modes", [](SimConfig& c, const std::string& v, const Context& x) { c.q0_modes = parse_q0_modes(v, x); },
            [](const SimConfig& c) { return echo_q0(c.q0_modes); }},
        KEY_DOUBLE(epsilon),
        Key{"h0_modes", [](SimConfig& c, const std::string& v, const Context& x) { c.h0_modes = parse_h0_modes(v, x); },
            [](const SimConfig& c) { return echo_h0(c.h0_modes); }},
        Key{"compatibility_mode",
            [](SimConfig& c, const std::string& v, const Context& x) {
                if (v == "report") c.compatibility_mode = CompatibilityMode::report;
                else if (v == "enforce_first_order") c.compatibility_mode = CompatibilityMode::enforce_first_order;
                else throw ParseError(x.line, x.key, "expected report or enforce_first_order, got '" + v + "'");
            },
            [](const SimConfig& c) {
                return std::string(c.compatibility_mode == CompatibilityMode::report ? "report" : "enforce_first_order");
            }},
        Key{"validation",
            [](SimConfig& c, const std::string& v, const Context& x) {
                if (v == "strict") c.validation = ValidationMode::strict;
                else if (v == "report") c.validation = ValidationMode::report;
                else throw ParseError(x.line, x.key, "expected strict or report, got '" + v + "'");
            },
            [](const SimConfig& c) { return std::string(c.validation == ValidationMode::strict ? "strict" : "report"); }},
        KEY_DOUBLE(eta),
        KEY_DOUBLE(c_bar),
        KEY_DOUBLE(bootstrap_c),
        KEY_DOUBLE(F_C),
        KEY_DOUBLE(graph_floor),
        KEY_DOUBLE(gauge_min_j),
        KEY_DOUBLE(enthalpy_tol),
        KEY_DOUBLE(enforce_tol),
        KEY_DOUBLE(positivity_tol),
        KEY_DOUBLE(taylor_floor),
        KEY_BOOL(frozen_gauge),
        KEY_INT(energy_order),
        KEY_INT(energy_time_order),
        KEY_BOOL(compute_energy),
        KEY_BOOL(duhamel),
        KEY_INT(stencil_width),
        KEY_DOUBLE(fit_t_a),
        KEY_DOUBLE(fit_t_b),
        KEY_BOOL(radial_oracle),
        KEY_INT(radial_n_s),
        KEY_DOUBLE(radial_dt),
        KEY_BOOL(barrier),
        Key{"output_dir", [](SimConfig& c, const std::string& v, const Context&) { c.output_dir = v; },
            [](const SimConfig& c) { return c.output_dir; }},
        KEY_BOOL(write_fields),
    };
    return table;
}

#undef KEY_INT
#undef KEY_DOUBLE
#undef KEY_BOOL

} // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = {"frozen-heat", "stefan-small", "stefan-mixture", "radial-compare",
                                                   "barrier-check"};
    return names;
}

SimConfig preset_config(const std::string& name)
{
    SimConfig c;
    c.preset = name;
    if (name == "frozen-heat") return c;
    c.n_theta = 32;
    c.n_r = 32;
    c.frozen_gauge = false;
    c.epsilon = 0.05;
    if (name == "stefan-small") return c;
    if (name == "stefan-mixture") {
        c.q0_modes = {{0, 1, Parity::cosine, 1.0}, {0, 2, Parity::cosine, 0.8}};
        c.validation = ValidationMode::report;
        c.t_end = 0.5;
        c.snapshot_stride = 20;
        return c;
    }
    if (name == "radial-compare") {
        c.t_end = 0.5;
        c.radial_oracle = true;
        return c;
    }
    if (name == "barrier-check") {
        c.n_theta = 32;
        c.n_r = 16;
        c.t_end = 0.2;
        c.barrier = true;
        c.n_modes = 8;
        return c;
    }
    throw DomainError("unknown preset '" + name + "'");
}

void validate_config(const SimConfig& c)
{
    auto chk = [](bool ok, const char* key, const std::string& what) {
        if (!ok) throw ParseError(0, key, what);
    };
    chk(c.n_theta >= 16 && c.n_theta % 2 == 0 && c.n_theta <= 512, "n_theta", "must be even and in [16, 512]");
    chk(c.n_r >= 8 && c.n_r <= 256, "n_r", "must lie in [8, 256]");
    chk(c.dt > 0.0 && c.dt <= 0.1, "dt", "must lie in (0, 0.1]");
    chk(c.t_end >= 0.0 && c.t_end <= 100.0, "t_end", "must lie in [0, 100]");
    chk(c.snapshot_stride >= 1, "snapshot_stride", "must be >= 1");
    chk(c.n_modes >= 1 && c.n_modes <= 256, "n_modes", "must lie in [1, 256]");
    chk(c.epsilon >= 0.0, "epsilon", "must be nonnegative");
    chk(c.c_bar > 0.0, "c_bar", "must be positive");
    chk(c.bootstrap_c >= 1.0, "bootstrap_c", "must be >= 1");
    chk(c.F_C > 0.0, "F_C", "must be positive");
    chk(c.graph_floor > 0.0 && c.graph_floor < 1.0, "graph_floor", "must lie in (0, 1)");
    chk(c.gauge_min_j > 0.0 && c.gauge_min_j < 1.0, "gauge_min_j", "must lie in (0, 1)");
    chk(c.enthalpy_tol > 0.0, "enthalpy_tol", "must be positive");
    chk(c.enforce_tol > 0.0, "enforce_tol", "must be positive");
    chk(c.positivity_tol >= 0.0, "positivity_tol", "must be nonnegative");
    chk(c.taylor_floor >= 0.0, "taylor_floor", "must be nonnegative");
    chk(c.energy_order >= 1 && c.energy_order <= 6, "energy_order", "must lie in [1, 6]");
    chk(c.energy_time_order >= 0 && c.energy_time_order <= 1, "energy_time_order", "must be 0 or 1");
    chk(c.stencil_width >= 3 && c.stencil_width <= c.n_r, "stencil_width", "must lie in [3, n_r]");
    chk(c.radial_n_s >= 8, "radial_n_s", "must be >= 8");
    chk(c.radial_dt > 0.0, "radial_dt", "must be positive");
    chk(!c.output_dir.empty(), "output_dir", "must not be empty");
    for (const auto& mc : c.q0_modes) chk(std::isfinite(mc.value), "q0_modes", "coefficients must be finite");
}

SimConfig parse_config(const std::string& text)
{
    struct Entry {
        int line;
        std::string key, value;
    };
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "", "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "", "missing key");
        for (const auto& e : entries) {
            if (e.key == key) throw ParseError(line_no, key, "duplicate key");
        }
        entries.push_back({line_no, key, value});
    }

    SimConfig cfg;
    for (const auto& e : entries) {
        if (e.key == "preset") {
            try {
                cfg = preset_config(e.value);
            } catch (const DomainError&) {
                throw ParseError(e.line, e.key, "unknown preset '" + e.value + "'");
            }
        }
    }
    for (const auto& e : entries) {
        const Key* k = nullptr;
        for (const auto& cand : keys()) {
            if (e.key == cand.name) k = &cand;
        }
        if (!k) throw ParseError(e.line, e.key, "unknown key");
        if (e.value.empty() && e.key != "q0_modes" && e.key != "h0_modes") throw ParseError(e.line, e.key, "missing value");
        k->set(cfg, e.value, Context{e.line, e.key});
    }
    try {
        validate_config(cfg);
    } catch (const ParseError& err) {
        int line = 0;
        for (const auto& e : entries) {
            if (e.key == err.key()) line = e.line;
        }
        throw ParseError(line, err.key(), std::string(err.what()).substr(std::string(err.what()).find(": ") + 2));
    }
    return cfg;
}

std::string echo_config(const SimConfig& c)
{
    std::string out;
    for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(c) + "\n";
    return out;
}

} // namespace stefan
