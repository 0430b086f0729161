#pragma once

#include <string>
#include <vector>

#include "vrlab/grid.hpp"
#include "vrlab/params.hpp"

namespace vrlab {

// Everything a run needs, parsed from a small "key = value" file. Times are
// stored as core aspect ratios: the run starts where eps(t) = eps0 and ends
// where eps(t) = eps_end, so configs stay meaningful when nu changes.
struct RunConfig {
    std::string experiment = "short_time";
    double gamma_over_nu = 10.0;
    double nu = 1.0;
    double rbar = 1.0;
    double zbar = 0.0;
    double eps0 = 0.025;
    double eps_end = 0.1;
    int nr = 256, nz = 256;
    double r_max = 1.6;
    double z_halfwidth = 0.8;
    int snapshots = 24;
    bool upwind = false;
    double cfl_adv = 0.4;
    double cfl_diff = 0.4;
    unsigned long seed = 12345;

    PhysicalParams physical() const;
    double t0() const { return physical().time_of_eps(eps0); }
    double t_end() const { return physical().time_of_eps(eps_end); }
    Grid make_grid() const;
};

// The run drivers this build knows how to execute.
const std::vector<std::string>& experiment_ids();
bool is_experiment_id(const std::string& id);

// Parses configuration text. Lines are "key = value"; blank lines and lines
// starting with "#" are skipped; "[section]" headers are allowed and ignored
// (the emitted form uses them for grouping only). Unknown keys are collected
// and reported together in one std::invalid_argument. Violated run
// invariants throw std::invalid_argument naming the invariant, e.g.
// "eps(t0) <= 0.1". Marginal-but-legal settings (an initial core wider than
// two cells but narrower than eight) warn on stderr instead.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical text form; parse_config(emit_config(c)) reproduces c exactly
// (floating-point keys are printed with 17 significant digits).
std::string emit_config(const RunConfig& cfg);

// FNV-1a (64-bit) over the canonical text, as 16 lowercase hex digits.
// Stamped into snapshots, indexes, and CSV output so artifacts can be
// matched to the exact configuration that produced them.
std::string config_hash(const RunConfig& cfg);

// Runs the invariant checks on an already-built config (parse_config calls
// this itself; the CLI reuses it after applying overrides).
void validate_config(const RunConfig& cfg);

} // namespace vrlab
