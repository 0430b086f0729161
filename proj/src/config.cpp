#include "vrlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vrlab {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_config: key '" + key +
                                    "' expects a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument("parse_config: key '" + key +
                                    "' has trailing characters in '" + v + "'");
    return x;
}

long parse_long(const std::string& key, const std::string& v) {
    double x = parse_double(key, v);
    long n = static_cast<long>(x);
    if (static_cast<double>(n) != x)
        throw std::invalid_argument("parse_config: key '" + key +
                                    "' expects an integer, got '" + v + "'");
    return n;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "0" || v == "false" || v == "no") return false;
    if (v == "1" || v == "true" || v == "yes") return true;
    throw std::invalid_argument("parse_config: key '" + key +
                                "' expects a boolean, got '" + v + "'");
}

void parse_grid_value(const std::string& v, int& nr, int& nz) {
    std::size_t x = v.find('x');
    if (x == std::string::npos)
        throw std::invalid_argument(
            "parse_config: key 'grid' expects NRxNZ, got '" + v + "'");
    nr = static_cast<int>(parse_long("grid", trim(v.substr(0, x))));
    nz = static_cast<int>(parse_long("grid", trim(v.substr(x + 1))));
}

void fail_invariant(const std::string& name, const std::string& detail) {
    throw std::invalid_argument("config invariant violated: " + name +
                                (detail.empty() ? "" : " (" + detail + ")"));
}

} // namespace

PhysicalParams RunConfig::physical() const {
    PhysicalParams p;
    p.nu = nu;
    p.gamma_circ = gamma_over_nu * nu;
    p.rbar = rbar;
    p.zbar = zbar;
    return p;
}

Grid RunConfig::make_grid() const {
    return build_grid(r_max, zbar - z_halfwidth, zbar + z_halfwidth, nr, nz);
}

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "short_time",   "ring_speed",      "uniqueness_proxy", "linear_smoothing",
        "bs_crosscheck", "aronson_suite",  "kernel_suite",
    };
    return ids;
}

bool is_experiment_id(const std::string& id) {
    const auto& ids = experiment_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void validate_config(const RunConfig& cfg) {
    if (!is_experiment_id(cfg.experiment)) {
        std::string known;
        for (const auto& id : experiment_ids())
            known += (known.empty() ? "" : ", ") + id;
        throw std::invalid_argument("config invariant violated: experiment is one of {" +
                                    known + "}, got '" + cfg.experiment + "'");
    }
    PhysicalParams p = cfg.physical();
    p.validate();
    if (!(cfg.eps0 > 0.0)) fail_invariant("eps0 > 0", fmt("eps0 = %g", cfg.eps0));
    if (cfg.eps0 > 0.1 * (1.0 + 1e-12))
        fail_invariant("eps(t0) <= 0.1", fmt("eps0 = %g", cfg.eps0));
    if (cfg.eps_end > 0.5 * (1.0 + 1e-12))
        fail_invariant("eps(t_end) <= 0.5", fmt("eps_end = %g", cfg.eps_end));
    if (!(cfg.eps_end > cfg.eps0))
        fail_invariant("eps_end > eps0",
                       fmt("eps0 = %g, eps_end = %g", cfg.eps0, cfg.eps_end));
    if (cfg.nr < 8 || cfg.nz < 8)
        fail_invariant("grid has at least 8 cells per direction",
                       fmt("grid = %dx%d", cfg.nr, cfg.nz));
    if (!(cfg.r_max > cfg.rbar))
        fail_invariant("r_max > rbar", fmt("r_max = %g, rbar = %g", cfg.r_max, cfg.rbar));
    if (!(cfg.z_halfwidth > 0.0))
        fail_invariant("z_halfwidth > 0", fmt("z_halfwidth = %g", cfg.z_halfwidth));
    if (!(cfg.cfl_adv > 0.0) || !(cfg.cfl_diff > 0.0))
        fail_invariant("cfl factors positive",
                       fmt("cfl_adv = %g, cfl_diff = %g", cfg.cfl_adv, cfg.cfl_diff));
    if (cfg.snapshots < 2)
        fail_invariant("snapshots >= 2", fmt("snapshots = %d", cfg.snapshots));

    // Core resolution at the start of the run. Fewer than 2 cells across
    // sqrt(nu t0) cannot represent the initial field at all; below 8 the run
    // is legal but under-resolved at early times, so it only warns.
    double core = std::sqrt(cfg.nu * cfg.t0());
    double h = std::max(cfg.r_max / cfg.nr, 2.0 * cfg.z_halfwidth / cfg.nz);
    double cells = core / h;
    if (cells < 2.0 * (1.0 - 1e-12))
        fail_invariant("grid resolves sqrt(nu t0) with >= 2 cells",
                       fmt("sqrt(nu t0)/h = %.3g", cells));
    if (cells < 8.0)
        std::fprintf(stderr,
                     "config warning: sqrt(nu t0)/h = %.3g is below the "
                     "recommended 8 cells; early-time output is "
                     "under-resolved\n",
                     cells);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::vector<std::string> unknown;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw std::invalid_argument(
                    fmt("parse_config: malformed section header at line %d", lineno));
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(
                fmt("parse_config: expected 'key = value' at line %d", lineno));
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(fmt("parse_config: empty key at line %d", lineno));

        if (key == "experiment")            cfg.experiment = val;
        else if (key == "gamma_over_nu")    cfg.gamma_over_nu = parse_double(key, val);
        else if (key == "nu")               cfg.nu = parse_double(key, val);
        else if (key == "rbar")             cfg.rbar = parse_double(key, val);
        else if (key == "zbar")             cfg.zbar = parse_double(key, val);
        else if (key == "eps0")             cfg.eps0 = parse_double(key, val);
        else if (key == "eps_end")          cfg.eps_end = parse_double(key, val);
        else if (key == "grid")             parse_grid_value(val, cfg.nr, cfg.nz);
        else if (key == "r_max")            cfg.r_max = parse_double(key, val);
        else if (key == "z_halfwidth")      cfg.z_halfwidth = parse_double(key, val);
        else if (key == "snapshots")        cfg.snapshots = static_cast<int>(parse_long(key, val));
        else if (key == "upwind")           cfg.upwind = parse_bool(key, val);
        else if (key == "cfl_adv")          cfg.cfl_adv = parse_double(key, val);
        else if (key == "cfl_diff")         cfg.cfl_diff = parse_double(key, val);
        else if (key == "seed")             cfg.seed = static_cast<unsigned long>(parse_long(key, val));
        else                                unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw std::invalid_argument("parse_config: unknown keys: " + list);
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream body;
    body << in.rdbuf();
    return parse_config(body.str());
}

std::string emit_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[run]\n";
    out << "experiment = " << cfg.experiment << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "[physical]\n";
    out << fmt("gamma_over_nu = %.17g\n", cfg.gamma_over_nu);
    out << fmt("nu = %.17g\n", cfg.nu);
    out << fmt("rbar = %.17g\n", cfg.rbar);
    out << fmt("zbar = %.17g\n", cfg.zbar);
    out << "[window]\n";
    out << fmt("eps0 = %.17g\n", cfg.eps0);
    out << fmt("eps_end = %.17g\n", cfg.eps_end);
    out << "[grid]\n";
    out << "grid = " << cfg.nr << "x" << cfg.nz << "\n";
    out << fmt("r_max = %.17g\n", cfg.r_max);
    out << fmt("z_halfwidth = %.17g\n", cfg.z_halfwidth);
    out << "[scheme]\n";
    out << "snapshots = " << cfg.snapshots << "\n";
    out << "upwind = " << (cfg.upwind ? 1 : 0) << "\n";
    out << fmt("cfl_adv = %.17g\n", cfg.cfl_adv);
    out << fmt("cfl_diff = %.17g\n", cfg.cfl_diff);
    return out.str();
}

std::string config_hash(const RunConfig& cfg) {
    std::string text = emit_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

} // namespace vrlab
