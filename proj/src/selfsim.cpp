#include "vrlab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vrlab {

namespace {

constexpr double inv_4pi = 0.079577471545947667884;

struct Kahan {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Least-squares line y = a x + b.
void fit_line(const std::vector<double>& x, const std::vector<double>& y,
              double& a, double& b) {
    std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) { mx += x[k]; my += y[k]; }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    a = sxy / sxx;
    b = my - a * mx;
}

} // namespace

const Grid& standard_frame_grid() {
    static const Grid g = build_offset_grid(-12.0, 12.0, -12.0, 12.0, 192, 192);
    return g;
}

double gauss_profile(double R, double Z) {
    return inv_4pi * std::exp(-0.25 * (R * R + Z * Z));
}

double gauss_weight(double R, double Z) {
    return std::exp(0.25 * (R * R + Z * Z));
}

RescaledFrame to_selfsimilar(const VorticityField& w, double t,
                             const PhysicalParams& p, double z_center) {
    if (!(t > 0.0))
        throw std::invalid_argument("to_selfsimilar: t must be positive");
    if (p.gamma_circ == 0.0)
        throw std::invalid_argument("to_selfsimilar: needs a nonzero circulation");
    const Grid& pg = w.grid;
    const Grid& fg = standard_frame_grid();
    double zc = std::isnan(z_center) ? p.zbar : z_center;
    double s = std::sqrt(p.nu * t);
    double scale = p.nu * t / p.gamma_circ;

    RescaledFrame fr;
    fr.grid = fg;
    fr.f.assign(fg.node_count(), 0.0);
    fr.eps = p.eps(t);
    fr.gamma = p.gamma();
    fr.t = t;

    for (int i = 0; i <= fg.nr; ++i) {
        double r = p.rbar + fg.r(i) * s;
        double fi = (r - pg.r_min) / pg.hr;
        for (int j = 0; j <= fg.nz; ++j) {
            double z = zc + fg.z(j) * s;
            double fj = (z - pg.z_min) / pg.hz;
            if (fi < 0.0 || fj < 0.0 || fi > pg.nr || fj > pg.nz) {
                fr.window_clipped = true;
                continue;
            }
            int i0 = std::min(static_cast<int>(fi), pg.nr - 1);
            int j0 = std::min(static_cast<int>(fj), pg.nz - 1);
            double a = fi - i0, b = fj - j0;
            double v = (1.0 - a) * (1.0 - b) * w.w[pg.idx(i0, j0)] +
                       a * (1.0 - b) * w.w[pg.idx(i0 + 1, j0)] +
                       (1.0 - a) * b * w.w[pg.idx(i0, j0 + 1)] +
                       a * b * w.w[pg.idx(i0 + 1, j0 + 1)];
            fr.f[fg.idx(i, j)] = scale * v;
        }
    }
    return fr;
}

double refined_center(const PhysicalParams& p, double t) {
    return p.zbar + p.gamma_circ * t / (4.0 * M_PI * p.rbar) *
                        std::log(p.rbar / std::sqrt(p.nu * t));
}

namespace {

GaussianDistance distance_to(const RescaledFrame& frame,
                             const RescaledFrame* other) {
    const Grid& g = frame.grid;
    if (other && !other->grid.same_layout(g))
        throw std::invalid_argument("frame_distance: frames on different windows");
    Kahan x2, l1, tail;
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double Z = g.z(j);
            double rho2 = R * R + Z * Z;
            double ref = other ? other->f[g.idx(i, j)] : gauss_profile(R, Z);
            double d = frame.f[g.idx(i, j)] - ref;
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            l1.add(cr * cz * std::abs(d));
            // The weight grows faster than any converged frame decays, so
            // the weighted norm is truncated where the profile has died off.
            if (rho2 <= 144.0)
                x2.add(d * d * std::exp(0.25 * rho2));
            else
                tail.add(std::abs(frame.f[g.idx(i, j)]));
        }
    }
    double cell = g.hr * g.hz;
    GaussianDistance out;
    out.x_dist = std::sqrt(std::max(0.0, x2.sum * cell));
    out.l1_dist = l1.sum * cell;
    out.tail_warning = frame.window_clipped || tail.sum * cell > 1e-8;
    return out;
}

} // namespace

namespace {

// Trapezoid mass of a frame over its window. For smooth profiles that die
// off before the edge this is spectrally accurate, so it carries none of
// the bilinear resampling error of the frame values themselves.
double window_mass(const RescaledFrame& fr) {
    const Grid& g = fr.grid;
    Kahan acc;
    for (int i = 0; i <= g.nr; ++i) {
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc.add(cr * cz * fr.f[g.idx(i, j)]);
        }
    }
    return acc.sum * g.hr * g.hz;
}

} // namespace

GaussianDistance gaussian_distance(const RescaledFrame& frame) {
    return distance_to(frame, nullptr);
}

GaussianDistance frame_distance(const RescaledFrame& a, const RescaledFrame& b) {
    return distance_to(a, &b);
}

RescaledFrame cutoff_f0(double eps) {
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::domain_error("cutoff_f0: eps must lie in (0, 1/2]");
    const Grid& g = standard_frame_grid();
    RescaledFrame fr;
    fr.grid = g;
    fr.f.assign(g.node_count(), 0.0);
    fr.eps = eps;
    double e2 = eps * eps;
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            double Z = g.z(j);
            double x = e2 * (R * R + Z * Z);
            double chi;
            if (x <= 0.25) {
                chi = 1.0;
            } else if (x >= 0.5) {
                chi = 0.0;
            } else {
                double c = std::cos(2.0 * M_PI * (x - 0.25));
                chi = c * c;
            }
            if (chi != 0.0)
                fr.f[g.idx(i, j)] = chi * gauss_profile(R, Z);
        }
    }
    return fr;
}

Energies energies(const RescaledFrame& frame, double eps) {
    const Grid& g = frame.grid;
    RescaledFrame f0 = cutoff_f0(eps);
    if (!f0.grid.same_layout(g))
        throw std::invalid_argument("energies: frame is not on the standard window");

    std::vector<double> ft(g.node_count());
    for (std::size_t k = 0; k < ft.size(); ++k) ft[k] = frame.f[k] - f0.f[k];

    Kahan e_acc, be_acc, m_acc;
    double edge_max = 0.0, int_max = 0.0;
    const double ihr2 = 1.0 / (2.0 * g.hr), ihz2 = 1.0 / (2.0 * g.hz);
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double Z = g.z(j);
            double rho2 = R * R + Z * Z;
            double wgt = std::exp(0.25 * rho2);
            double v = ft[g.idx(i, j)];
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            double cc = cr * cz;
            m_acc.add(cc * v);
            double v2w = v * v * wgt;
            e_acc.add(cc * 0.5 * v2w);

            double gr, gz;
            if (i == 0)
                gr = (ft[g.idx(1, j)] - v) / g.hr;
            else if (i == g.nr)
                gr = (v - ft[g.idx(g.nr - 1, j)]) / g.hr;
            else
                gr = (ft[g.idx(i + 1, j)] - ft[g.idx(i - 1, j)]) * ihr2;
            if (j == 0)
                gz = (ft[g.idx(i, 1)] - v) / g.hz;
            else if (j == g.nz)
                gz = (v - ft[g.idx(i, g.nz - 1)]) / g.hz;
            else
                gz = (ft[g.idx(i, j + 1)] - ft[g.idx(i, j - 1)]) * ihz2;
            be_acc.add(cc * 0.5 * ((gr * gr + gz * gz) + (1.0 + rho2) * v * v) * wgt);

            bool edge = (i <= 1 || i >= g.nr - 1 || j <= 1 || j >= g.nz - 1);
            if (edge)
                edge_max = std::max(edge_max, std::abs(v2w));
            else
                int_max = std::max(int_max, std::abs(v2w));
        }
    }
    double cell = g.hr * g.hz;
    Energies out;
    out.E = e_acc.sum * cell;
    out.bigE = be_acc.sum * cell;
    out.m = m_acc.sum * cell;
    out.tail_warning = edge_max > 1e-10 * std::max(int_max, 1e-300);
    return out;
}

double envelope_ratio(const RescaledFrame& frame, double eta) {
    const Grid& g = frame.grid;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= g.nr; ++i) {
        double R = g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            double Z = g.z(j);
            double env = std::exp(-(1.0 - eta) * 0.25 * (R * R + Z * Z));
            best = std::max(best, frame.f[g.idx(i, j)] / env);
        }
    }
    return best;
}

RingSpeedFit ring_speed(const std::vector<double>& times,
                        const std::vector<double>& centroid_z,
                        const PhysicalParams& p,
                        double eps_lo, double eps_hi) {
    if (times.size() != centroid_z.size())
        throw std::invalid_argument("ring_speed: times and centroids differ in length");
    std::vector<double> t, z;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double e = p.eps(times[k]);
        if (e >= eps_lo && e <= eps_hi) {
            t.push_back(times[k]);
            z.push_back(centroid_z[k]);
        }
    }
    if (t.size() < 6 || p.eps(t.back()) < 2.0 * p.eps(t.front()))
        throw std::invalid_argument(
            "ring_speed: need at least 6 snapshots spanning a factor 2 in eps");

    RingSpeedFit fit;
    std::vector<double> x;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        double v = (z[k + 1] - z[k - 1]) / (t[k + 1] - t[k - 1]);
        fit.t_mid.push_back(t[k]);
        fit.speed.push_back(v);
        x.push_back(std::log(p.rbar / std::sqrt(p.nu * t[k])));
    }
    fit.n_used = static_cast<int>(fit.speed.size());
    fit_line(x, fit.speed, fit.A, fit.B);
    return fit;
}

Monitors monitors(const RunState& s, double gamma_norm) {
    const Grid& g = s.omega.grid;
    double norm = gamma_norm != 0.0 ? gamma_norm : s.phys.gamma_circ;
    Monitors out;
    double w_sup = 0.0, wr_sup = 0.0, u_sup = 0.0, urr_sup = 0.0, decay = 0.0;
    double st = std::sqrt(s.phys.nu * s.t);
    for (int i = 0; i <= g.nr; ++i) {
        double r = g.r(i);
        double Rdist = std::abs(r - s.phys.rbar) / st;
        for (int j = 0; j <= g.nz; ++j) {
            std::size_t id = g.idx(i, j);
            double w = std::abs(s.omega.w[id]);
            double ur = s.u.ur[id], uz = s.u.uz[id];
            double speed = std::hypot(ur, uz);
            w_sup = std::max(w_sup, w);
            u_sup = std::max(u_sup, speed);
            if (r > 0.0) {
                wr_sup = std::max(wr_sup, w / r);
                urr_sup = std::max(urr_sup, std::abs(ur) / r);
            }
            double Zdist = std::abs(g.z(j) - s.phys.zbar) / st;
            decay = std::max(decay, (1.0 + Rdist + Zdist) * speed);
        }
    }
    if (norm == 0.0) {
        if (w_sup == 0.0 && u_sup == 0.0) return out;
        throw std::invalid_argument("monitors: normalization scale is zero");
    }
    double nu_t = s.phys.nu * s.t;
    out.omega_sup = nu_t * w_sup / norm;
    out.omega_over_r = nu_t * st * wr_sup / norm;
    out.speed = st * u_sup / norm;
    out.ur_over_r = nu_t * urr_sup / norm;
    out.decay_product = st * decay / norm;
    return out;
}

TailChecks tail_checks(const std::vector<double>& times,
                       const std::vector<double>& near_mass,
                       const std::vector<double>& far_mass,
                       const PhysicalParams& p) {
    if (times.size() != near_mass.size() || times.size() != far_mass.size())
        throw std::invalid_argument("tail_checks: input lengths differ");

    auto fit_one = [&](const std::vector<double>& mass, double rho) {
        TailSlopeFit out;
        std::vector<double> x, y;
        out.below_envelope = true;
        for (std::size_t k = 0; k < times.size(); ++k) {
            double envelope = std::exp(-rho * rho / (16.0 * p.nu * times[k]));
            if (mass[k] > envelope) out.below_envelope = false;
            if (mass[k] > 1e-300) {
                x.push_back(1.0 / (p.nu * times[k]));
                y.push_back(std::log(mass[k]));
            }
        }
        out.n_used = static_cast<int>(x.size());
        out.below_floor = x.empty();
        if (x.size() >= 2) {
            double b;
            fit_line(x, y, out.slope, b);
        }
        return out;
    };

    TailChecks out;
    out.near_axis = fit_one(near_mass, 0.5 * p.rbar);
    out.far = fit_one(far_mass, p.rbar);
    return out;
}

DiagnosticsRecord diagnose_state(const RunState& s) {
    DiagnosticsRecord rec;
    rec.t = s.t;
    rec.eps = s.phys.eps(s.t);
    rec.l1_norm = lp_norm(s.omega, 1.0);
    rec.linf_norm = lp_norm(s.omega, std::numeric_limits<double>::infinity());
    rec.impulse = moment(s.omega, MomentKind::impulse);
    rec.centroid_z = moment(s.omega, MomentKind::centroid_z);

    RescaledFrame fr = to_selfsimilar(s.omega, s.t, s.phys);
    GaussianDistance gd = gaussian_distance(fr);
    rec.x_dist = gd.x_dist;
    rec.l1_dist = gd.l1_dist;
    double eps_cut = std::min(0.5, rec.eps);
    Energies en = energies(fr, eps_cut);
    rec.E = en.E;
    rec.bigE = en.bigE;
    // The mass deficit compares two conserved integrals, so it is formed from
    // the physical-grid mass directly; going through the resampled frame
    // instead would bury it under ~5e-4 of bilinear interpolation error.
    rec.m = moment(s.omega, MomentKind::mass) / s.phys.gamma_circ -
            window_mass(cutoff_f0(eps_cut));
    rec.envelope_ratio = envelope_ratio(fr, 0.25);

    double gam = std::abs(s.phys.gamma_circ);
    rec.tail_near = tail_mass(s.omega, TailRegion::near_axis, 0.5 * s.phys.rbar) / gam;
    // Data supported inside r <= 2 rbar admits the decay envelope
    // e^{-rbar^2/(16 nu t)} for the mass beyond 3 rbar. A grid that ends
    // before that radius holds no such mass at all: the solution is
    // truncated to zero there by construction.
    double far_rho = 3.0 * s.phys.rbar;
    rec.tail_far = (far_rho <= s.omega.grid.r_max)
                       ? tail_mass(s.omega, TailRegion::far, far_rho) / gam
                       : 0.0;
    rec.mon = monitors(s);
    return rec;
}

std::string diagnostics_csv_header() {
    return "t,eps,l1_norm,linf_norm,impulse,centroid_z,x_dist,l1_dist,"
           "E,bigE,m,envelope_ratio,tail_near,tail_far,"
           "mon_omega,mon_omega_r,mon_speed,mon_ur_r,mon_decay";
}

std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  r.t, r.eps, r.l1_norm, r.linf_norm, r.impulse, r.centroid_z,
                  r.x_dist, r.l1_dist, r.E, r.bigE, r.m, r.envelope_ratio,
                  r.tail_near, r.tail_far, r.mon.omega_sup, r.mon.omega_over_r,
                  r.mon.speed, r.mon.ur_over_r, r.mon.decay_product);
    return std::string(buf);
}

} // namespace vrlab
