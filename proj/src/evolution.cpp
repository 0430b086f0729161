#include "vrlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "vrlab/elliptic.hpp"
#include "vrlab/kernels.hpp"

namespace vrlab {

namespace {

constexpr double inv_2pi = 0.15915494309189533577;

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return std::string(buf);
}

// Velocity via the stream function: boundary values of psi by direct
// kernel summation over the active sources, interior by the flux-form
// multigrid solve with a(r) = 1/r, then differencing. The boundary sum is
// the expensive part, so it is refreshed only every few steps; between
// refreshes the ring drifts a few 1e-6 of the domain per step, which
// perturbs the boundary data far less than its own discretization error.
class StreamVelocitySolver {
public:
    StreamVelocitySolver(const Grid& g, const KernelTable& kt, const EvolveOpts& o)
        : solver_(g, [](double r) { return r > 0.0 ? 1.0 / r : 0.0; }),
          psi_(g, 1.0),
          kt_(kt),
          refresh_stages_(2 * std::max(1, o.boundary_refresh_steps)),
          cutoff_(o.source_cutoff_rel),
          tol_(o.solver_tol) {}

    VelocityField velocity(const VorticityField& w) {
        if (stage_ % refresh_stages_ == 0) refresh_boundary(w);
        ++stage_;
        EllipticSolveInfo info =
            solver_.solve(w.w, psi_.psi, tol_, /*warm_start=*/true, 400);
        if (!info.converged)
            throw std::runtime_error(
                fmt("evolve: stream solve stalled, relative residual %.3g", info.rel_residual));
        return velocity_from_physical_stream(psi_);
    }

private:
    void refresh_boundary(const VorticityField& w) {
        const Grid& g = w.grid;
        double cut = cutoff_ * max_abs(w.w);

        // Pack sources above the cutoff once; every boundary target then
        // runs one tight loop instead of rescanning the grid.
        std::vector<double> rs, zs, sq, fw;
        for (int i = 1; i <= g.nr; ++i) {
            double r = g.r(i);
            double root = std::sqrt(r);
            for (int j = 0; j <= g.nz; ++j) {
                double v = w.w[g.idx(i, j)];
                if (v == 0.0 || std::abs(v) <= cut) continue;
                rs.push_back(r);
                zs.push_back(g.z(j));
                sq.push_back(root);
                fw.push_back(v * trapezoid_weight(g, i, j));
            }
        }
        std::size_t n = rs.size();

        auto psi_at = [&](double r, double z) -> double {
            if (r <= 0.0 || n == 0) return 0.0;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double dr = r - rs[k];
                double dz = z - zs[k];
                double rho2 = dr * dr + dz * dz;
                if (rho2 == 0.0) continue;
                acc += sq[k] * kt_.F(rho2 / (r * rs[k])) * fw[k];
            }
            return acc * inv_2pi * std::sqrt(r);
        };

        double r_out = g.r(g.nr);
        for (int j = 0; j <= g.nz; ++j)
            psi_.psi[g.idx(g.nr, j)] = psi_at(r_out, g.z(j));
        for (int i = 1; i < g.nr; ++i) {
            double r = g.r(i);
            psi_.psi[g.idx(i, 0)] = psi_at(r, g.z(0));
            psi_.psi[g.idx(i, g.nz)] = psi_at(r, g.z(g.nz));
        }
        // The axis edge stays zero (Dirichlet).
    }

    FluxPoissonSolver solver_;
    StreamField psi_;
    const KernelTable& kt_;
    long refresh_stages_;
    double cutoff_, tol_;
    long stage_ = 0;
};

void check_axis_grid(const Grid& g, const char* who) {
    if (g.r_min != 0.0)
        throw std::invalid_argument(std::string(who) + ": grid must start at the axis (r_min = 0)");
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// out = a + s * b on every node. Boundary entries of the tendency are zero,
// so boundary values ride along unchanged.
void axpy(const std::vector<double>& a, double s, const std::vector<double>& b,
          std::vector<double>& out) {
    std::size_t n = a.size();
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + s * b[k];
}

} // namespace

VorticityField make_filament_initial(const Grid& g, const PhysicalParams& p,
                                     double t0) {
    p.validate();
    check_axis_grid(g, "make_filament_initial");
    if (!(t0 > 0.0))
        throw std::invalid_argument("make_filament_initial: t0 must be positive");
    double eps = p.eps(t0);
    if (eps > 0.1 * (1.0 + 1e-12))
        throw std::invalid_argument(
            fmt("make_filament_initial: sqrt(nu t0)/rbar = %.4g exceeds 0.1", eps));
    double core = std::sqrt(p.nu * t0);
    double cells = core / std::max(g.hr, g.hz);
    if (cells < 2.0)
        throw std::invalid_argument(
            fmt("make_filament_initial: core sqrt(nu t0) spans %.2f cells, need at least 2", cells));
    if (cells < 8.0)
        std::fprintf(stderr,
                     "make_filament_initial: warning, core spans %.2f cells (8 recommended)\n",
                     cells);
    if (!(p.rbar > g.r_min && p.rbar < g.r_max && p.zbar > g.z_min && p.zbar < g.z_max))
        throw std::invalid_argument("make_filament_initial: ring center lies outside the grid");

    VorticityField w(g);
    double amp = p.gamma_circ / (4.0 * M_PI * p.nu * t0);
    double inv4 = 1.0 / (4.0 * p.nu * t0);
    for (int i = 1; i <= g.nr; ++i) {
        double dr = g.r(i) - p.rbar;
        for (int j = 0; j <= g.nz; ++j) {
            double dz = g.z(j) - p.zbar;
            w.w[g.idx(i, j)] = amp * std::exp(-(dr * dr + dz * dz) * inv4);
        }
    }
    return w;
}

void rhs(const VorticityField& w, const VelocityField* u, const PhysicalParams& p,
         bool upwind, std::vector<double>& out) {
    const Grid& g = w.grid;
    check_axis_grid(g, "rhs");
    if (u && !u->grid.same_layout(g))
        throw std::invalid_argument("rhs: velocity and vorticity grids differ");

    out.assign(g.node_count(), 0.0);
    const int nj = g.nz + 1;
    const double ihr = 1.0 / g.hr, ihz = 1.0 / g.hz;
    const double ihr2 = ihr * ihr, ihz2 = ihz * ihz;
    const double nu = p.nu;

    for (int i = 1; i < g.nr; ++i) {
        const double* wm = w.w.data() + (i - 1) * nj;
        const double* wc = w.w.data() + i * nj;
        const double* wp = w.w.data() + (i + 1) * nj;
        double* oc = out.data() + i * nj;
        const double r = g.r(i);
        const double rm = g.r(i - 1), rp = g.r(i + 1);

        const double* urm = nullptr;
        const double* urc = nullptr;
        const double* urp = nullptr;
        const double* uzc = nullptr;
        if (u) {
            urm = u->ur.data() + (i - 1) * nj;
            urc = u->ur.data() + i * nj;
            urp = u->ur.data() + (i + 1) * nj;
            uzc = u->uz.data() + i * nj;
        }

        for (int j = 1; j < g.nz; ++j) {
            double acc = nu * ((wp[j] - 2.0 * wc[j] + wm[j]) * ihr2 +
                               (wc[j + 1] - 2.0 * wc[j] + wc[j - 1]) * ihz2);

            // d_r(w/r): at i = 1 the ghost value q(0) = lim w/r comes from a
            // one-sided second-order d_r w with the axis Dirichlet value.
            double qp = wp[j] / rp;
            double qm = (i >= 2) ? wm[j] / rm
                                 : (4.0 * wc[j] - wp[j]) * (0.5 * ihr);
            acc += nu * (qp - qm) * (0.5 * ihr);

            if (u) {
                if (upwind) {
                    double ua = 0.5 * (urc[j] + urp[j]);
                    double ub = 0.5 * (urm[j] + urc[j]);
                    double fa = ua >= 0.0 ? ua * wc[j] : ua * wp[j];
                    double fb = ub >= 0.0 ? ub * wm[j] : ub * wc[j];
                    acc -= (fa - fb) * ihr;
                    double va = 0.5 * (uzc[j] + uzc[j + 1]);
                    double vb = 0.5 * (uzc[j - 1] + uzc[j]);
                    double ga = va >= 0.0 ? va * wc[j] : va * wc[j + 1];
                    double gb = vb >= 0.0 ? vb * wc[j - 1] : vb * wc[j];
                    acc -= (ga - gb) * ihz;
                } else {
                    acc -= (urp[j] * wp[j] - urm[j] * wm[j]) * (0.5 * ihr);
                    acc -= (uzc[j + 1] * wc[j + 1] - uzc[j - 1] * wc[j - 1]) * (0.5 * ihz);
                }
            }
            oc[j] = acc;
        }
    }
}

Trajectory evolve(const VorticityField& w0, double t0, double t1,
                  const PhysicalParams& p, const EvolveOpts& opts) {
    p.validate();
    const Grid& g = w0.grid;
    check_axis_grid(g, "evolve");
    if (!(t0 > 0.0)) throw std::invalid_argument("evolve: t0 must be positive");
    if (!(t1 > t0)) throw std::invalid_argument("evolve: t1 must exceed t0");
    for (int j = 0; j <= g.nz; ++j)
        if (w0.w[g.idx(0, j)] != 0.0)
            throw std::invalid_argument("evolve: axis column of the initial field must vanish");

    const bool zero_vel =
        opts.velocity == EvolveOpts::Velocity::zero ||
        (opts.velocity == EvolveOpts::Velocity::automatic && p.gamma_circ == 0.0);

    const KernelTable& kt = default_kernel_table();
    std::unique_ptr<StreamVelocitySolver> vs;
    if (!zero_vel) vs = std::make_unique<StreamVelocitySolver>(g, kt, opts);
    auto velocity = [&](const VorticityField& w) -> VelocityField {
        return zero_vel ? VelocityField(g) : vs->velocity(w);
    };

    // Emission schedule: requested times inside (t0, t1), deduplicated,
    // plus the initial and final states.
    std::vector<double> schedule;
    for (double s : opts.snap_times)
        if (s > t0 && s < t1) schedule.push_back(s);
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end(),
                               [&](double a, double b) { return b - a < 1e-12 * t1; }),
                   schedule.end());
    schedule.push_back(t1);

    Trajectory traj;
    traj.phys = p;
    traj.upwind = opts.upwind;
    traj.t_begin = t0;
    traj.t_end = t1;
    traj.has_history = opts.store_velocity_history;

    VorticityField w = w0;
    double t = t0;
    long step = 0;
    double l1_prev = lp_norm(w, 1.0);

    auto emit = [&]() {
        RunState st;
        st.t = t;
        st.step = step;
        st.omega = w;
        st.u = velocity(w);
        st.phys = p;
        traj.snaps.push_back(std::move(st));
    };
    emit();

    const double h = std::min(g.hr, g.hz);
    const double dt_diff = opts.cfl_diff * h * h / (4.0 * p.nu);
    std::size_t next_emit = 0;
    std::vector<double> k1, k2;
    VorticityField wstar(g), wnew(g);

    while (t < t1 - 1e-12 * t1) {
        if (step >= opts.max_steps)
            throw SchemeError("evolve: step budget exhausted before reaching t1");

        VelocityField u0 = velocity(w);
        double umax = zero_vel ? 0.0 : u0.max_speed();
        double dt = dt_diff;
        if (umax > 0.0) dt = std::min(dt, opts.cfl_adv * h / umax);
        if (opts.force_dt > 0.0) {
            if (opts.force_dt > dt * (1.0 + 1e-9))
                throw SchemeError(fmt(
                    "evolve: forced dt %.3g exceeds the CFL limit %.3g", opts.force_dt, dt));
            dt = opts.force_dt;
        }
        double target = schedule[next_emit];
        if (t + dt >= target - 1e-12 * t1) dt = target - t;

        rhs(w, zero_vel ? nullptr : &u0, p, opts.upwind, k1);
        axpy(w.w, dt, k1, wstar.w);
        VelocityField u1 = velocity(wstar);
        rhs(wstar, zero_vel ? nullptr : &u1, p, opts.upwind, k2);

        std::size_t n = w.w.size();
        wnew.w.resize(n);
        for (std::size_t m = 0; m < n; ++m)
            wnew.w[m] = 0.5 * (w.w[m] + wstar.w[m] + dt * k2[m]);

        t += dt;
        ++step;

        if (!all_finite(wnew.w))
            throw BlowUpError(fmt("evolve: state lost finiteness at t = %.6g", t),
                              std::move(w), t, step);
        double l1 = lp_norm(g, wnew.w, 1.0);
        if (l1 > l1_prev * (1.0 + opts.mono_tol))
            throw SchemeError(fmt(
                "evolve: ||w||_1 grew by a relative %.3g in one step", l1 / l1_prev - 1.0, 0.0));

        w.w.swap(wnew.w);
        l1_prev = l1;
        traj.steps.push_back({t, dt, l1});
        if (opts.store_velocity_history) {
            traj.u_stage0.push_back(std::move(u0));
            traj.u_stage1.push_back(std::move(u1));
            traj.dt_seq.push_back(dt);
        }

        bool hit_target = t >= target - 1e-12 * t1;
        if (hit_target) ++next_emit;
        if (hit_target || (opts.snap_every_steps > 0 && step % opts.snap_every_steps == 0))
            emit();
    }
    return traj;
}

VelocityField stream_velocity(const VorticityField& w, double solver_tol,
                              double source_cutoff_rel) {
    check_axis_grid(w.grid, "stream_velocity");
    EvolveOpts o;
    o.solver_tol = solver_tol;
    o.source_cutoff_rel = source_cutoff_rel;
    StreamVelocitySolver vs(w.grid, default_kernel_table(), o);
    return vs.velocity(w);
}

std::vector<VorticityField> linear_evolve_times(const VorticityField& w0,
                                                const std::vector<double>& durations,
                                                double nu) {
    const Grid& g = w0.grid;
    check_axis_grid(g, "linear_evolve");
    if (!(nu > 0.0)) throw std::invalid_argument("linear_evolve: nu must be positive");
    std::vector<double> targets = durations;
    std::sort(targets.begin(), targets.end());
    if (!targets.empty() && targets.front() < 0.0)
        throw std::invalid_argument("linear_evolve: durations must be nonnegative");

    PhysicalParams p;
    p.nu = nu;
    p.gamma_circ = 0.0;
    const double h = std::min(g.hr, g.hz);
    const double dt0 = 0.4 * h * h / (4.0 * nu);

    std::vector<VorticityField> out;
    VorticityField w = w0, wstar(g);
    std::vector<double> k1, k2;
    double t = 0.0;
    for (double target : targets) {
        while (t < target - 1e-12 * (target + 1.0)) {
            double dt = std::min(dt0, target - t);
            rhs(w, nullptr, p, false, k1);
            axpy(w.w, dt, k1, wstar.w);
            rhs(wstar, nullptr, p, false, k2);
            std::size_t n = w.w.size();
            for (std::size_t m = 0; m < n; ++m)
                w.w[m] = 0.5 * (w.w[m] + wstar.w[m] + dt * k2[m]);
            t += dt;
        }
        out.push_back(w);
    }
    return out;
}

VorticityField linear_evolve(const VorticityField& w0, double duration, double nu) {
    return linear_evolve_times(w0, {duration}, nu).front();
}

namespace {

// Transpose of the forward tendency with frozen velocity. The forward
// operator is linear in w once u is fixed; under the Euclidean pairing its
// stencil transposes are again local stencils because phi vanishes on every
// boundary. The d_r(w/r) block has two special rows near the axis from the
// one-sided ghost value in the forward stencil.
void apply_transpose(const Grid& g, const std::vector<double>& phi,
                     const VelocityField& u, double nu, std::vector<double>& out) {
    out.assign(g.node_count(), 0.0);
    const int nj = g.nz + 1;
    const double ihr = 1.0 / g.hr, ihz = 1.0 / g.hz;
    const double ihr2 = ihr * ihr, ihz2 = ihz * ihz;

    for (int i = 1; i < g.nr; ++i) {
        const double* pm = phi.data() + (i - 1) * nj;
        const double* pc = phi.data() + i * nj;
        const double* pp = phi.data() + (i + 1) * nj;
        double* oc = out.data() + i * nj;
        const double* urc = u.ur.data() + i * nj;
        const double* uzc = u.uz.data() + i * nj;
        const double r = g.r(i);

        for (int j = 1; j < g.nz; ++j) {
            double acc = urc[j] * (pp[j] - pm[j]) * (0.5 * ihr) +
                         uzc[j] * (pc[j + 1] - pc[j - 1]) * (0.5 * ihz);
            acc += nu * ((pp[j] - 2.0 * pc[j] + pm[j]) * ihr2 +
                         (pc[j + 1] - 2.0 * pc[j] + pc[j - 1]) * ihz2);
            double tr;
            if (i == 1) {
                tr = -pc[j] * ihr2 - pp[j] * (0.5 * ihr) / g.r(1);
            } else if (i == 2) {
                tr = pm[j] * ((0.5 * ihr) / r + 0.25 * ihr2) - pp[j] * (0.5 * ihr) / r;
            } else {
                tr = (pm[j] - pp[j]) * (0.5 * ihr) / r;
            }
            acc += nu * tr;
            oc[j] = acc;
        }
    }
}

} // namespace

AdjointField adjoint_evolve(const AdjointField& phi1, double t1, double t0,
                            const Trajectory& traj,
                            std::vector<double>* max_abs_trace) {
    if (!traj.has_history)
        throw std::invalid_argument(
            "adjoint_evolve: trajectory carries no stored velocity history");
    if (traj.upwind)
        throw std::invalid_argument(
            "adjoint_evolve: upwind forward runs have no centered transpose");
    const Grid& g = phi1.grid;
    check_axis_grid(g, "adjoint_evolve");
    if (traj.u_stage0.empty() || !traj.u_stage0.front().grid.same_layout(g))
        throw std::invalid_argument("adjoint_evolve: grid does not match the trajectory");
    double span = traj.t_end - traj.t_begin;
    if (std::abs(t1 - traj.t_end) > 1e-9 * span ||
        std::abs(t0 - traj.t_begin) > 1e-9 * span)
        throw std::invalid_argument(fmt(
            "adjoint_evolve: window [%.6g, %.6g] does not match the stored run", t0, t1));

    const double nu = traj.phys.nu;
    AdjointField phi = phi1;
    // The pairing argument needs phi = 0 on every edge; enforce it on entry.
    for (int j = 0; j <= g.nz; ++j) {
        phi.phi[g.idx(0, j)] = 0.0;
        phi.phi[g.idx(g.nr, j)] = 0.0;
    }
    for (int i = 0; i <= g.nr; ++i) {
        phi.phi[g.idx(i, 0)] = 0.0;
        phi.phi[g.idx(i, g.nz)] = 0.0;
    }

    if (max_abs_trace) max_abs_trace->clear();
    std::vector<double> s1, s2, tmp;
    for (long k = static_cast<long>(traj.dt_seq.size()) - 1; k >= 0; --k) {
        double dt = traj.dt_seq[k];
        apply_transpose(g, phi.phi, traj.u_stage1[k], nu, tmp);
        axpy(phi.phi, dt, tmp, s1);
        apply_transpose(g, s1, traj.u_stage0[k], nu, tmp);
        axpy(s1, dt, tmp, s2);
        std::size_t n = phi.phi.size();
        for (std::size_t m = 0; m < n; ++m)
            phi.phi[m] = 0.5 * (phi.phi[m] + s2[m]);
        if (max_abs_trace) max_abs_trace->push_back(max_abs(phi.phi));
    }
    return phi;
}

double pairing(const VorticityField& w, const AdjointField& phi) {
    if (!w.grid.same_layout(phi.grid))
        throw std::invalid_argument("pairing: grids differ");
    // Plain node sum (times the cell area), not the trapezoid rule: the
    // stage transposes are exact for this pairing, so it is conserved to
    // roundoff along matched forward/backward runs.
    double sum = 0.0, carry = 0.0;
    for (std::size_t m = 0; m < w.w.size(); ++m) {
        double y = w.w[m] * phi.phi[m] - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum * w.grid.hr * w.grid.hz;
}

} // namespace vrlab
