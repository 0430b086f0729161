#include "vrlab/biot_savart.hpp"

#include <cmath>
#include <stdexcept>

namespace vrlab {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double inv_2pi = 1.0 / (2.0 * pi);
constexpr double inv_4pi = 1.0 / (4.0 * pi);

// Sources packed into flat arrays: coordinates, the weight b (the radius in
// physical coordinates, 1 + eps R in a rescaled frame), its square root, and
// the field value times its quadrature weight.
struct Sources {
    std::vector<double> x, z, b, sqb, fw;
    std::size_t size() const { return x.size(); }
};

Sources pack_eps_sources(const VorticityField& f, double eps, double cutoff_abs) {
    Sources s;
    const Grid& g = f.grid;
    s.x.reserve(g.node_count());
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        double b = 1.0 + eps * R;
        for (int j = 0; j <= g.nz; ++j) {
            double v = f.w[g.idx(i, j)];
            if (v == 0.0 || std::abs(v) <= cutoff_abs) continue;
            s.x.push_back(R);
            s.z.push_back(g.z(j));
            s.b.push_back(b);
            s.sqb.push_back(b > 0.0 ? std::sqrt(b) : 0.0);
            s.fw.push_back(v * trapezoid_weight(g, i, j));
        }
    }
    return s;
}

Sources pack_physical_sources(const VorticityField& f, double cutoff_abs) {
    Sources s;
    const Grid& g = f.grid;
    for (int i = 0; i <= g.nr; ++i) {
        double r = g.r(i);
        if (r <= 0.0) continue;           // the axis column carries no vorticity
        for (int j = 0; j <= g.nz; ++j) {
            double v = f.w[g.idx(i, j)];
            if (v == 0.0 || std::abs(v) <= cutoff_abs) continue;
            s.x.push_back(r);
            s.z.push_back(g.z(j));
            s.b.push_back(r);
            s.sqb.push_back(std::sqrt(r));
            s.fw.push_back(v * trapezoid_weight(g, i, j));
        }
    }
    return s;
}

void check_eps_preconditions(const VorticityField& f, double eps) {
    if (eps < 0.0)
        throw std::domain_error("bs_eps: eps must be nonnegative");
    if (eps == 0.0) return;
    const Grid& g = f.grid;
    double peak = max_abs(f.w);
    for (int i = 0; i <= g.nr; ++i) {
        if (1.0 + eps * g.r(i) > 0.0) continue;
        for (int j = 0; j <= g.nz; ++j)
            if (std::abs(f.w[g.idx(i, j)]) > 1e-12 * peak)
                throw std::domain_error(
                    "bs_eps: f does not vanish where 1 + eps R <= 0");
    }
}

// Velocity at one rescaled-frame target from packed sources. Terms at
// coincident points are dropped; the antisymmetric part integrates to zero
// over the diagonal cell and the smooth part contributes O(h^2 log h).
void eps_velocity_at(const Sources& s, double eps, const KernelTable& kt,
                     double R, double Z, double bt, double& Ur, double& Uz) {
    double ur = 0.0, uz = 0.0;
    const double inv_sqbt = (bt > 0.0) ? 1.0 / std::sqrt(bt) : 0.0;
    const double sqbt_inv32 = (bt > 0.0) ? 1.0 / (bt * std::sqrt(bt)) : 0.0;
    const double xi_pref = (bt > 0.0) ? eps * eps / bt : 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        double dR = R - s.x[k];
        double dZ = Z - s.z[k];
        double rho2 = dR * dR + dZ * dZ;
        if (rho2 == 0.0) continue;
        if (eps > 0.0) {
            double xi2 = xi_pref * rho2 / s.b[k];
            double F, Ft;
            kt.eval(xi2, F, Ft);
            // sqrt(b_source / b_target) weighting, the gradient of the
            // sqrt(b_t b_s) F representation divided by b_t
            double common = inv_sqbt * s.sqb[k] * Ft / rho2 * s.fw[k];
            ur += common * dZ;
            uz -= common * dR;
            // second term carries 1/4pi = (1/2) * 1/2pi, hence the 0.5
            uz += 0.5 * eps * s.sqb[k] * sqbt_inv32 * (F + Ft) * s.fw[k];
        } else {
            double common = s.fw[k] / rho2;
            ur += common * dZ;
            uz -= common * dR;
        }
    }
    Ur = ur * inv_2pi;
    Uz = uz * inv_2pi;
}

} // namespace

void bs_eps_at(const VorticityField& f, double eps, double R, double Z,
               double& Ur, double& Uz, const KernelTable& kt) {
    check_eps_preconditions(f, eps);
    Sources s = pack_eps_sources(f, eps, 0.0);
    double bt = 1.0 + eps * R;
    if (bt <= 0.0) { Ur = 0.0; Uz = 0.0; return; }
    eps_velocity_at(s, eps, kt, R, Z, bt, Ur, Uz);
}

VelocityField bs_eps(const VorticityField& f, double eps, const KernelTable& kt) {
    check_eps_preconditions(f, eps);
    const Grid& g = f.grid;
    Sources s = pack_eps_sources(f, eps, 0.0);
    VelocityField u(g);
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        double bt = 1.0 + eps * R;
        for (int j = 0; j <= g.nz; ++j) {
            std::size_t id = g.idx(i, j);
            if (bt <= 0.0) { u.ur[id] = 0.0; u.uz[id] = 0.0; continue; }
            eps_velocity_at(s, eps, kt, R, g.z(j), bt, u.ur[id], u.uz[id]);
        }
    }
    return u;
}

StreamField stream_function_eps(const VorticityField& f, double eps,
                                const KernelTable& kt) {
    check_eps_preconditions(f, eps);
    const Grid& g = f.grid;
    Sources s = pack_eps_sources(f, eps, 0.0);
    StreamField phi(g, eps);
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        double bt = 1.0 + eps * R;
        if (bt <= 0.0) continue;           // phi vanishes with sqrt(b)
        double sqbt = std::sqrt(bt);
        for (int j = 0; j <= g.nz; ++j) {
            double Z = g.z(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                double dR = R - s.x[k];
                double dZ = Z - s.z[k];
                double rho2 = dR * dR + dZ * dZ;
                if (rho2 == 0.0) continue;
                if (eps > 0.0) {
                    double xi2 = eps * eps * rho2 / (bt * s.b[k]);
                    acc += s.sqb[k] * kt.F(xi2) * s.fw[k];
                } else {
                    // planar limit: -(1/2pi) log rho
                    acc += -0.5 * std::log(rho2) * s.fw[k];
                }
            }
            phi.psi[g.idx(i, j)] = acc * inv_2pi * (eps > 0.0 ? sqbt : 1.0);
        }
    }
    return phi;
}

VelocityField velocity_from_stream(const StreamField& phi) {
    const Grid& g = phi.grid;
    const double eps = phi.eps;
    VelocityField u(g);
    auto dR = [&](int i, int j) {
        if (i == 0)
            return (-3.0 * phi.psi[g.idx(0, j)] + 4.0 * phi.psi[g.idx(1, j)]
                    - phi.psi[g.idx(2, j)]) / (2.0 * g.hr);
        if (i == g.nr)
            return (3.0 * phi.psi[g.idx(g.nr, j)] - 4.0 * phi.psi[g.idx(g.nr - 1, j)]
                    + phi.psi[g.idx(g.nr - 2, j)]) / (2.0 * g.hr);
        return (phi.psi[g.idx(i + 1, j)] - phi.psi[g.idx(i - 1, j)]) / (2.0 * g.hr);
    };
    auto dZ = [&](int i, int j) {
        if (j == 0)
            return (-3.0 * phi.psi[g.idx(i, 0)] + 4.0 * phi.psi[g.idx(i, 1)]
                    - phi.psi[g.idx(i, 2)]) / (2.0 * g.hz);
        if (j == g.nz)
            return (3.0 * phi.psi[g.idx(i, g.nz)] - 4.0 * phi.psi[g.idx(i, g.nz - 1)]
                    + phi.psi[g.idx(i, g.nz - 2)]) / (2.0 * g.hz);
        return (phi.psi[g.idx(i, j + 1)] - phi.psi[g.idx(i, j - 1)]) / (2.0 * g.hz);
    };
    for (int i = 0; i <= g.nr; ++i) {
        double b = 1.0 + eps * g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            std::size_t id = g.idx(i, j);
            if (b <= 0.0) { u.ur[id] = 0.0; u.uz[id] = 0.0; continue; }
            u.ur[id] = -dZ(i, j) / b;
            u.uz[id] = dR(i, j) / b;
        }
    }
    return u;
}

EllipticResult bs_elliptic(const VorticityField& f, double eps,
                           const EllipticOpts& opts, const KernelTable& kt) {
    check_eps_preconditions(f, eps);
    const Grid& g = f.grid;
    for (int i = 0; i <= g.nr; ++i)
        if (1.0 + eps * g.r(i) <= 0.0)
            throw std::domain_error(
                "bs_elliptic: frame contains nodes with 1 + eps R <= 0");

    EllipticResult out;
    out.phi = StreamField(g, eps);

    if (opts.summed_boundary) {
        // Dirichlet data from the direct representation; interior left zero.
        Sources s = pack_eps_sources(f, eps, 0.0);
        auto boundary_phi = [&](int i, int j) {
            double R = g.r(i), Z = g.z(j);
            double bt = 1.0 + eps * R;
            double acc = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                double dRk = R - s.x[k];
                double dZk = Z - s.z[k];
                double rho2 = dRk * dRk + dZk * dZk;
                if (rho2 == 0.0) continue;
                if (eps > 0.0)
                    acc += s.sqb[k] * kt.F(eps * eps * rho2 / (bt * s.b[k])) * s.fw[k];
                else
                    acc += -0.5 * std::log(rho2) * s.fw[k];
            }
            return acc * inv_2pi * (eps > 0.0 ? std::sqrt(bt) : 1.0);
        };
        for (int i = 0; i <= g.nr; ++i) {
            out.phi.psi[g.idx(i, 0)] = boundary_phi(i, 0);
            out.phi.psi[g.idx(i, g.nz)] = boundary_phi(i, g.nz);
        }
        for (int j = 1; j < g.nz; ++j) {
            out.phi.psi[g.idx(0, j)] = boundary_phi(0, j);
            out.phi.psi[g.idx(g.nr, j)] = boundary_phi(g.nr, j);
        }
    }

    FluxPoissonSolver solver(g, [eps](double R) { return 1.0 / (1.0 + eps * R); });
    out.info = solver.solve(f.w, out.phi.psi, opts.tol_rel, false, opts.max_iter);
    if (!out.info.converged)
        throw std::runtime_error(
            "bs_elliptic: solver failed to converge, relative residual " +
            std::to_string(out.info.rel_residual));
    out.u = velocity_from_stream(out.phi);
    return out;
}

GapReport velocity_gap_report(const VorticityField& f, double eps,
                              const std::vector<std::pair<double, double>>& probes,
                              const KernelTable& kt) {
    if (!(eps > 0.0))
        throw std::domain_error("velocity_gap_report: eps must be positive");
    check_eps_preconditions(f, eps);
    Sources s = pack_eps_sources(f, eps, 0.0);

    GapReport rep;
    rep.eps = eps;
    rep.probes = static_cast<int>(probes.size());
    for (auto [R, Z] : probes) {
        double bt = 1.0 + eps * R;
        if (bt <= 0.0)
            throw std::domain_error("velocity_gap_report: probe has 1 + eps R <= 0");
        double ur_e, uz_e, ur_0, uz_0;
        eps_velocity_at(s, eps, kt, R, Z, bt, ur_e, uz_e);
        eps_velocity_at(s, 0.0, kt, R, Z, 1.0, ur_0, uz_0);
        double gap = std::hypot(ur_e - ur_0, uz_e - uz_0);

        // Majorant integral with unit constant.
        double maj = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            double dR = R - s.x[k];
            double dZ = Z - s.z[k];
            double rho2 = dR * dR + dZ * dZ;
            if (rho2 == 0.0) continue;
            double lg = std::log(bt / (eps * std::sqrt(rho2)));
            maj += (1.0 + std::max(0.0, lg)) * std::abs(s.fw[k]);
        }
        maj *= eps / bt;
        double C = (maj > 0.0) ? gap / maj : 0.0;
        rep.max_gap = std::max(rep.max_gap, gap);
        rep.fitted_C = std::max(rep.fitted_C, C);
    }
    rep.max_ratio = rep.fitted_C;
    return rep;
}

GapScaling gap_scaling(const VorticityField& f, const std::vector<double>& eps_list,
                       const std::vector<std::pair<double, double>>& probes,
                       const KernelTable& kt) {
    if (eps_list.size() < 2)
        throw std::invalid_argument("gap_scaling: need at least two eps values");
    GapScaling out;
    out.C_min = std::numeric_limits<double>::infinity();
    std::vector<double> lx, ly_comp, ly_bare;
    for (double e : eps_list) {
        GapReport r = velocity_gap_report(f, e, probes, kt);
        out.reports.push_back(r);
        lx.push_back(std::log(e));
        ly_bare.push_back(std::log(r.max_gap));
        ly_comp.push_back(std::log(r.max_gap / std::log(1.0 / e)));
        out.C_min = std::min(out.C_min, r.fitted_C);
        out.C_max = std::max(out.C_max, r.fitted_C);
    }
    auto slope = [&](const std::vector<double>& y) {
        double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            sx += lx[k]; sy += y[k];
            sxx += lx[k] * lx[k]; sxy += lx[k] * y[k];
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    out.exponent = slope(ly_comp);
    out.bare_exponent = slope(ly_bare);
    return out;
}

VelocityField axisym_velocity_direct(const VorticityField& omega,
                                     const KernelTable& kt, double cutoff_rel) {
    const Grid& g = omega.grid;
    double cutoff_abs = cutoff_rel * max_abs(omega.w);
    Sources s = pack_physical_sources(omega, cutoff_abs);
    VelocityField u(g);
    for (int i = 0; i <= g.nr; ++i) {
        double rt = g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            double zt = g.z(j);
            std::size_t id = g.idx(i, j);
            if (rt <= 0.0) {
                // axial limit: u_z(0,z) = (1/2) sum r'^2 / (r'^2 + dz^2)^{3/2}
                double acc = 0.0;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    double dz = zt - s.z[k];
                    double d2 = s.x[k] * s.x[k] + dz * dz;
                    acc += s.x[k] * s.x[k] / (d2 * std::sqrt(d2)) * s.fw[k];
                }
                u.ur[id] = 0.0;
                u.uz[id] = 0.5 * acc;
                continue;
            }
            double inv_rt = 1.0 / rt;
            double sq_rt = std::sqrt(rt);
            double ur = 0.0, uz = 0.0, uz2 = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                double dr = rt - s.x[k];
                double dz = zt - s.z[k];
                double rho2 = dr * dr + dz * dz;
                if (rho2 == 0.0) continue;
                double xi2 = rho2 * inv_rt / s.x[k];
                double F, Ft;
                kt.eval(xi2, F, Ft);
                double common = s.sqb[k] * Ft / rho2 * s.fw[k];
                ur += common * dz;
                uz -= common * dr;
                uz2 += s.sqb[k] * (F + Ft) * s.fw[k];
            }
            u.ur[id] = ur * inv_2pi / sq_rt;
            u.uz[id] = uz * inv_2pi / sq_rt + uz2 * inv_4pi / (rt * sq_rt);
        }
    }
    return u;
}

double axisym_stream_at(const VorticityField& omega, double r, double z,
                        const KernelTable& kt, double cutoff_rel,
                        int i_lo, int i_hi, int j_lo, int j_hi) {
    const Grid& g = omega.grid;
    if (r <= 0.0) return 0.0;
    if (i_hi < 0) i_hi = g.nr;
    if (j_hi < 0) j_hi = g.nz;
    double cutoff_abs = cutoff_rel * max_abs(omega.w);
    double acc = 0.0;
    for (int i = std::max(i_lo, 1); i <= i_hi; ++i) {
        double rs = g.r(i);
        double xi_pref = 1.0 / (r * rs);
        for (int j = j_lo; j <= j_hi; ++j) {
            double v = omega.w[g.idx(i, j)];
            if (v == 0.0 || std::abs(v) <= cutoff_abs) continue;
            double dr = r - rs;
            double dz = z - g.z(j);
            double rho2 = dr * dr + dz * dz;
            if (rho2 == 0.0) continue;
            acc += std::sqrt(rs) * kt.F(rho2 * xi_pref) * v * trapezoid_weight(g, i, j);
        }
    }
    return acc * inv_2pi * std::sqrt(r);
}

VelocityField velocity_from_physical_stream(const StreamField& psi) {
    const Grid& g = psi.grid;
    VelocityField u(g);
    const double ihr2 = 1.0 / (2.0 * g.hr), ihz2 = 1.0 / (2.0 * g.hz);
    for (int i = 0; i <= g.nr; ++i) {
        double r = g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            std::size_t id = g.idx(i, j);
            if (r <= 0.0) {
                // psi ~ c(z) r^2 near the axis, so u_z(0) = 2 psi(hr) / hr^2
                u.ur[id] = 0.0;
                u.uz[id] = 2.0 * psi.psi[g.idx(1, j)] / (g.hr * g.hr);
                continue;
            }
            double dpsi_r, dpsi_z;
            if (i == g.nr)
                dpsi_r = (3.0 * psi.psi[g.idx(i, j)] - 4.0 * psi.psi[g.idx(i - 1, j)]
                          + psi.psi[g.idx(i - 2, j)]) * ihr2;
            else
                dpsi_r = (psi.psi[g.idx(i + 1, j)] - psi.psi[g.idx(i - 1, j)]) * ihr2;
            if (j == 0)
                dpsi_z = (-3.0 * psi.psi[g.idx(i, 0)] + 4.0 * psi.psi[g.idx(i, 1)]
                          - psi.psi[g.idx(i, 2)]) * ihz2;
            else if (j == g.nz)
                dpsi_z = (3.0 * psi.psi[g.idx(i, j)] - 4.0 * psi.psi[g.idx(i, j - 1)]
                          + psi.psi[g.idx(i, j - 2)]) * ihz2;
            else
                dpsi_z = (psi.psi[g.idx(i, j + 1)] - psi.psi[g.idx(i, j - 1)]) * ihz2;
            u.ur[id] = -dpsi_z / r;
            u.uz[id] = dpsi_r / r;
        }
    }
    return u;
}

} // namespace vrlab
