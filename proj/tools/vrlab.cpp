// Command-line front end: runs experiments from config files, rebuilds
// diagnostics from stored checkpoints, and dumps the kernel tables.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vrlab/aronson.hpp"
#include "vrlab/config.hpp"
#include "vrlab/experiments.hpp"
#include "vrlab/kernels.hpp"
#include "vrlab/selfsim.hpp"
#include "vrlab/snapshot.hpp"

namespace {

int cmd_run(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, const vrlab::RunConfig& overrides,
            const CLI::App* sub) {
    vrlab::RunConfig cfg = config_path.empty()
                               ? vrlab::default_config(experiment)
                               : vrlab::load_config(config_path);
    cfg.experiment = experiment;

    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--gamma-over-nu")) cfg.gamma_over_nu = overrides.gamma_over_nu;
    if (given("--eps0")) cfg.eps0 = overrides.eps0;
    if (given("--eps-end")) cfg.eps_end = overrides.eps_end;
    if (given("--grid")) {
        cfg.nr = overrides.nr;
        cfg.nz = overrides.nz;
    }
    if (given("--r-max")) cfg.r_max = overrides.r_max;
    if (given("--z-halfwidth")) cfg.z_halfwidth = overrides.z_halfwidth;
    if (given("--snapshots")) cfg.snapshots = overrides.snapshots;
    if (given("--upwind")) cfg.upwind = overrides.upwind;
    if (given("--seed")) cfg.seed = overrides.seed;
    vrlab::validate_config(cfg);

    vrlab::ExperimentReport rep = vrlab::run_experiment(cfg, out_dir);
    std::cout << rep.to_text();
    return rep.all_pass() ? 0 : 1;
}

int cmd_diagnose(const std::string& dir) {
    auto entries = vrlab::read_index(dir + "/index.vridx");
    std::cout << vrlab::diagnostics_csv_header() << "\n";
    for (const auto& e : entries) {
        vrlab::SnapshotMeta meta;
        vrlab::VorticityField w = vrlab::read_snapshot(dir + "/" + e.file, &meta);
        vrlab::RunState s;
        s.t = meta.time;
        s.step = meta.step;
        s.phys = meta.phys;
        s.u = meta.phys.gamma_circ != 0.0 ? vrlab::stream_velocity(w)
                                          : vrlab::VelocityField(w.grid);
        s.omega = std::move(w);
        std::cout << vrlab::diagnostics_csv_row(vrlab::diagnose_state(s)) << "\n";
    }

    std::ifstream rep(dir + "/report.txt", std::ios::binary);
    if (!rep) return 0;
    std::ostringstream body;
    body << rep.rdbuf();
    std::cout << body.str();
    return body.str().find("result FAIL") == std::string::npos ? 0 : 1;
}

int cmd_kernels(bool dump) {
    const vrlab::KernelTable& kt = vrlab::default_kernel_table();
    if (dump) {
        kt.dump_csv(std::cout);
    } else {
        std::printf("kernel table: %d cells over s in [%g, %g]\n", kt.cells(),
                    kt.s_lo(), kt.s_hi());
    }
    return 0;
}

int cmd_aronson(const std::string& drift, double k1, double k2, int n) {
    vrlab::DriftSpec spec = vrlab::drift_none();
    if (drift == "shear")
        spec = vrlab::drift_shear(k1, 1.0);
    else if (drift == "rotation")
        spec = vrlab::drift_rotation(k1);
    else if (drift != "none")
        throw std::invalid_argument("unknown drift '" + drift + "'");
    std::vector<double> t_list = {0.25, 0.5, 1.0};
    if (k2 > 0.0) spec = vrlab::with_uniform_growth(spec, k2, t_list.back());

    vrlab::FundamentalOpts opts;
    opts.n = n;
    vrlab::KernelEstimate est = vrlab::estimate_fundamental(spec, 1.0, t_list, opts);
    vrlab::AronsonReport chk = vrlab::aronson_check(est);
    std::printf("drift = %s  K1 = %g  K2 = %g\n", est.drift_name.c_str(), est.K1,
                est.K2);
    std::printf("fitted C2 = %.8g  (4 pi C2 = %.6g)\n", chk.c2,
                4.0 * 3.14159265358979323846 * chk.c2);
    std::printf("probes used = %d  skipped = %d  positive = %s  max mass = %.8g\n",
                chk.probes_used, chk.probes_skipped, chk.positive ? "yes" : "no",
                chk.max_mass);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Axisymmetric vortex-ring laboratory"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment and report checks");
    std::string experiment, config_path, out_dir;
    vrlab::RunConfig ov;
    std::string grid_spec;
    run->add_option("experiment", experiment, "Experiment id")->required();
    run->add_option("--config", config_path, "Config file (defaults per id)");
    run->add_option("--out", out_dir, "Output directory for artifacts");
    run->add_option("--gamma-over-nu", ov.gamma_over_nu, "Circulation over viscosity");
    run->add_option("--eps0", ov.eps0, "Core aspect ratio at release");
    run->add_option("--eps-end", ov.eps_end, "Core aspect ratio at the end");
    run->add_option("--grid", grid_spec, "Cells as NRxNZ");
    run->add_option("--r-max", ov.r_max, "Radial extent");
    run->add_option("--z-halfwidth", ov.z_halfwidth, "Axial half-extent");
    run->add_option("--snapshots", ov.snapshots, "Snapshot count");
    run->add_flag("--upwind", ov.upwind, "First-order upwind advection");
    run->add_option("--seed", ov.seed, "Probe-placement seed");

    auto* diag = app.add_subcommand("diagnose", "Recompute diagnostics from a checkpoint directory");
    std::string diag_dir;
    diag->add_option("dir", diag_dir, "Checkpoint directory")->required();

    auto* ker = app.add_subcommand("kernels", "Kernel table utilities");
    bool dump = false;
    ker->add_flag("--dump", dump, "Emit s,F,F_tilde CSV to stdout");

    auto* aro = app.add_subcommand("aronson", "Fundamental-solution envelope fit");
    std::string drift = "none";
    double k1 = 0.5, k2 = 0.0;
    int n = 192;
    aro->add_option("--drift", drift, "none, shear, or rotation");
    aro->add_option("--k1", k1, "Drift amplitude");
    aro->add_option("--k2", k2, "Uniform growth rate added on top");
    aro->add_option("--n", n, "Grid cells per direction");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (run->count("--grid") &&
                std::sscanf(grid_spec.c_str(), "%dx%d", &ov.nr, &ov.nz) != 2)
                throw std::invalid_argument("--grid expects NRxNZ, got '" +
                                            grid_spec + "'");
            return cmd_run(experiment, config_path, out_dir, ov, run);
        }
        if (diag->parsed()) return cmd_diagnose(diag_dir);
        if (ker->parsed()) return cmd_kernels(dump);
        if (aro->parsed()) return cmd_aronson(drift, k1, k2, n);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "vrlab: %s\n", err.what());
        return 2;
    }
    return 2;
}
