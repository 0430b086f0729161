#pragma once

#include <string>
#include <vector>

#include "vrlab/config.hpp"
#include "vrlab/evolution.hpp"
#include "vrlab/selfsim.hpp"

namespace vrlab {

// One verdict line of an experiment report. `measured` passes when it lies
// in [bound_lo, bound_hi]; the bounds are pinned by the experiment driver,
// not by configuration.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound_lo = 0.0;
    double bound_hi = 0.0;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    std::string hash;           // config hash of the run that produced it
    double wall_seconds = 0.0;
    std::vector<CheckResult> checks;

    bool all_pass() const;
    // Structured text: magic line "VRREP1", header keys, one "check" line
    // per result, and a final "result PASS|FAIL" line.
    std::string to_text() const;
};

// Appends a check, deriving pass from the bounds.
CheckResult& add_check(ExperimentReport& rep, const std::string& name,
                       double measured, double lo, double hi,
                       const std::string& detail = "");

// Runs the experiment named by cfg.experiment and, when out_dir is not
// empty, persists the artifact set there. Throws std::invalid_argument for
// unknown ids; numerical failures surface as failing checks, not throws.
ExperimentReport run_experiment(const RunConfig& cfg,
                                const std::string& out_dir = "");

// Artifact writer: config echo, report text, diagnostics CSV (fixed-order
// reductions upstream make reruns byte-identical), and, when a trajectory
// is given, VRLAB1 snapshots plus a VRIDX1 index naming them. An empty or
// missing trajectory writes the report and config only. I/O failures throw
// std::runtime_error naming the path.
void write_outputs(const std::string& dir, const RunConfig& cfg,
                   const ExperimentReport& rep,
                   const Trajectory* traj = nullptr,
                   const std::vector<DiagnosticsRecord>& diag = {});

struct IndexEntry {
    int seq = 0;
    double time = 0.0;
    long step = -1;
    std::string file;
};

// Reads back a VRIDX1 index; a wrong magic line raises a format error
// naming the file.
std::vector<IndexEntry> read_index(const std::string& path);

// Per-snapshot diagnostics of a finished trajectory, in snapshot order.
std::vector<DiagnosticsRecord> diagnose_trajectory(const Trajectory& traj);

// The competing regularization of the proxy pair: a uniform disk of the
// same circulation, radius sqrt(6 nu t0), heat-mollified for t0/4 so its
// planar second moment about the center matches the Gaussian release at t0.
VorticityField make_tophat_initial(const Grid& g, const PhysicalParams& p,
                                   double t0);

// The tuned setup for each experiment id (grid sizes, eps windows, snapshot
// counts); the single source of truth the CLI and the acceptance runner
// share. Throws std::invalid_argument for unknown ids.
RunConfig default_config(const std::string& id);

} // namespace vrlab
