#include "vrlab/aronson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "../src/quadrature.hpp"

namespace vrlab {

double h_tilde(double tau) {
    if (!(tau > 0.0))
        throw std::domain_error("h_tilde: tau must be positive");
    double inv_tau = 1.0 / tau;
    double integral = integrate_adaptive(
        [inv_tau](double phi) {
            double s = std::sin(phi);
            return std::exp(-s * s * inv_tau) * std::cos(2.0 * phi);
        },
        -M_PI / 4.0, M_PI / 4.0, 1e-12, 1e-12);
    return integral / std::sqrt(M_PI * tau);
}

DriftSpec drift_none() { return {}; }

DriftSpec drift_shear(double k1, double nu) {
    DriftSpec d;
    d.U = [k1, nu](double, double x2, double t, double& u1, double& u2) {
        double s = std::sqrt(nu * t);
        u1 = k1 * (nu / s) * std::tanh(x2 / s);
        u2 = 0.0;
    };
    d.K1 = k1;
    d.name = "shear";
    return d;
}

DriftSpec drift_rotation(double omega0) {
    DriftSpec d;
    d.U = [omega0](double x1, double x2, double, double& u1, double& u2) {
        u1 = -omega0 * x2;
        u2 = omega0 * x1;
    };
    d.name = "rotation";
    return d;
}

DriftSpec with_uniform_growth(DriftSpec d, double k2, double t_end) {
    double rate = -k2 / t_end;
    d.V = [rate](double, double, double) { return rate; };
    d.K2 += k2;
    d.name += "+growth";
    return d;
}

double max_drift_divergence(const DriftSpec& d, double t, double radius, int n) {
    if (!d.U) return 0.0;
    double delta = 1e-5 * radius;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double x1 = -radius + 2.0 * radius * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            double x2 = -radius + 2.0 * radius * j / (n - 1);
            double ap, am, bp, bm, dummy;
            d.U(x1 + delta, x2, t, ap, dummy);
            d.U(x1 - delta, x2, t, am, dummy);
            d.U(x1, x2 + delta, t, dummy, bp);
            d.U(x1, x2 - delta, t, dummy, bm);
            worst = std::max(worst, std::abs((ap - am + bp - bm) / (2.0 * delta)));
        }
    }
    return worst;
}

namespace {

// d_t phi = nu lap phi - div(U phi) - V phi with centered conservative
// fluxes; boundary rows stay zero (the kernel has decayed there by
// construction of the staged domain).
void planar_rhs(const Grid& g, const std::vector<double>& phi,
                const std::vector<double>* u1, const std::vector<double>* u2,
                const std::vector<double>* vpot, double nu,
                std::vector<double>& out) {
    out.assign(g.node_count(), 0.0);
    const int nj = g.nz + 1;
    const double ihr2 = 1.0 / (g.hr * g.hr), ihz2 = 1.0 / (g.hz * g.hz);
    const double ihr_half = 0.5 / g.hr, ihz_half = 0.5 / g.hz;
    for (int i = 1; i < g.nr; ++i) {
        const double* pm = phi.data() + (i - 1) * nj;
        const double* pc = phi.data() + i * nj;
        const double* pp = phi.data() + (i + 1) * nj;
        double* oc = out.data() + i * nj;
        for (int j = 1; j < g.nz; ++j) {
            double acc = nu * ((pp[j] - 2.0 * pc[j] + pm[j]) * ihr2 +
                               (pc[j + 1] - 2.0 * pc[j] + pc[j - 1]) * ihz2);
            if (u1) {
                const double* am = u1->data() + (i - 1) * nj;
                const double* ap = u1->data() + (i + 1) * nj;
                const double* bc = u2->data() + i * nj;
                acc -= (ap[j] * pp[j] - am[j] * pm[j]) * ihr_half;
                acc -= (bc[j + 1] * pc[j + 1] - bc[j - 1] * pc[j - 1]) * ihz_half;
            }
            if (vpot) acc -= (*vpot)[i * nj + j] * pc[j];
            oc[j] = acc;
        }
    }
}

struct DriftSamples {
    std::vector<double> u1, u2, v;
    bool has_u = false, has_v = false;
    double umax = 0.0;
};

void sample_drift(const DriftSpec& d, const Grid& g, double t, DriftSamples& s) {
    s.has_u = static_cast<bool>(d.U);
    s.has_v = static_cast<bool>(d.V);
    s.umax = 0.0;
    if (s.has_u) {
        s.u1.resize(g.node_count());
        s.u2.resize(g.node_count());
        for (int i = 0; i <= g.nr; ++i) {
            double x1 = g.r(i);
            for (int j = 0; j <= g.nz; ++j) {
                double a, b;
                d.U(x1, g.z(j), t, a, b);
                std::size_t id = g.idx(i, j);
                s.u1[id] = a;
                s.u2[id] = b;
                s.umax = std::max(s.umax, std::max(std::abs(a), std::abs(b)));
            }
        }
    }
    if (s.has_v) {
        s.v.resize(g.node_count());
        for (int i = 0; i <= g.nr; ++i) {
            double x1 = g.r(i);
            for (int j = 0; j <= g.nz; ++j)
                s.v[g.idx(i, j)] = d.V(x1, g.z(j), t);
        }
    }
}

Grid stage_grid(double nu, double t_end, const FundamentalOpts& o) {
    double L = o.domain_factor * std::sqrt(nu * t_end);
    return build_offset_grid(-L, L, -L, L, o.n, o.n);
}

} // namespace

KernelEstimate estimate_fundamental(const DriftSpec& drift, double nu,
                                    const std::vector<double>& t_list,
                                    const FundamentalOpts& opts) {
    if (t_list.empty())
        throw std::invalid_argument("estimate_fundamental: t_list is empty");
    if (!(nu > 0.0))
        throw std::invalid_argument("estimate_fundamental: nu must be positive");
    for (std::size_t k = 0; k < t_list.size(); ++k)
        if (!(t_list[k] > 0.0) || (k > 0 && t_list[k] <= t_list[k - 1]))
            throw std::invalid_argument("estimate_fundamental: t_list must be positive ascending");

    const double T = t_list.back();
    const double t_src = t_list.front() / 100.0;

    // Geometric stages: each quadruples the time horizon, and the grid is
    // rebuilt to the new diffusive scale, so the early narrow kernel and the
    // late wide one are both resolved with the same node count.
    std::vector<double> ends;
    for (double te = 4.0 * t_src; te < T * 0.999; te *= 4.0) ends.push_back(te);
    ends.push_back(T);

    KernelEstimate est;
    est.nu = nu;
    est.t_src = t_src;
    est.K1 = drift.K1;
    est.K2 = drift.K2;
    est.drift_name = drift.name;

    Grid g = stage_grid(nu, ends.front(), opts);
    std::vector<double> phi(g.node_count(), 0.0);
    double amp = 1.0 / (4.0 * M_PI * nu * t_src);
    double inv4 = 1.0 / (4.0 * nu * t_src);
    for (int i = 0; i <= g.nr; ++i) {
        double x1 = g.r(i);
        for (int j = 0; j <= g.nz; ++j) {
            double x2 = g.z(j);
            phi[g.idx(i, j)] = amp * std::exp(-(x1 * x1 + x2 * x2) * inv4);
        }
    }

    double t = t_src;
    std::size_t next_emit = 0;
    DriftSamples s0, s1;
    std::vector<double> k1, k2, star(g.node_count());

    for (std::size_t stage = 0; stage < ends.size(); ++stage) {
        double t_stage_end = ends[stage];
        if (stage > 0) {
            Grid gn = stage_grid(nu, t_stage_end, opts);
            std::vector<double> pn(gn.node_count());
            for (int i = 0; i <= gn.nr; ++i)
                for (int j = 0; j <= gn.nz; ++j)
                    pn[gn.idx(i, j)] = sample_bilinear(g, phi, gn.r(i), gn.z(j));
            g = gn;
            phi.swap(pn);
            star.assign(g.node_count(), 0.0);
        }
        const double h = std::min(g.hr, g.hz);
        const double dt_diff = opts.cfl_diff * h * h / (4.0 * nu);

        while (t < t_stage_end * (1.0 - 1e-12)) {
            sample_drift(drift, g, t, s0);
            double dt = dt_diff;
            if (s0.has_u && s0.umax > 0.0)
                dt = std::min(dt, opts.cfl_adv * h / s0.umax);
            double target = t_stage_end;
            if (next_emit < t_list.size()) target = std::min(target, t_list[next_emit]);
            if (t + dt >= target * (1.0 - 1e-12)) dt = target - t;

            planar_rhs(g, phi, s0.has_u ? &s0.u1 : nullptr,
                       s0.has_u ? &s0.u2 : nullptr,
                       s0.has_v ? &s0.v : nullptr, nu, k1);
            for (std::size_t m = 0; m < phi.size(); ++m)
                star[m] = phi[m] + dt * k1[m];
            sample_drift(drift, g, t + dt, s1);
            planar_rhs(g, star, s1.has_u ? &s1.u1 : nullptr,
                       s1.has_u ? &s1.u2 : nullptr,
                       s1.has_v ? &s1.v : nullptr, nu, k2);
            for (std::size_t m = 0; m < phi.size(); ++m)
                phi[m] = 0.5 * (phi[m] + star[m] + dt * k2[m]);
            t += dt;

            while (next_emit < t_list.size() &&
                   t >= t_list[next_emit] * (1.0 - 1e-12)) {
                est.snaps.push_back({t_list[next_emit], g, phi});
                ++next_emit;
            }
        }
    }
    if (next_emit != t_list.size())
        throw std::runtime_error("estimate_fundamental: emission schedule not exhausted");
    return est;
}

AronsonReport aronson_check(const KernelEstimate& est) {
    if (est.snaps.size() < 3)
        throw std::invalid_argument("aronson_check: need at least 3 stored times");
    AronsonReport rep;
    rep.max_lhs = -std::numeric_limits<double>::infinity();
    const double floor = 1e-280;
    for (const KernelSnapshot& snap : est.snaps) {
        double st = std::sqrt(est.nu * snap.t);
        double peak = max_abs(snap.phi);
        for (int kr = 0; kr <= 20; ++kr) {
            double d = 0.25 * kr * st;  // radii 0, 0.25, ..., 5 in units of sqrt(nu t)
            int n_ang = kr == 0 ? 1 : 8;
            for (int ka = 0; ka < n_ang; ++ka) {
                double th = 2.0 * M_PI * ka / 8.0;
                double v = sample_bilinear(snap.grid, snap.phi,
                                           d * std::cos(th), d * std::sin(th));
                if (v < -1e-10 * peak) rep.positive = false;
                if (v <= floor) {
                    ++rep.probes_skipped;
                    continue;
                }
                double lhs = std::log(v) + std::log(est.nu * snap.t) +
                             d * d / (4.0 * est.nu * snap.t) -
                             est.K1 * d / st - est.K2;
                rep.max_lhs = std::max(rep.max_lhs, lhs);
                ++rep.probes_used;
            }
        }
        rep.max_mass = std::max(rep.max_mass, integrate(snap.grid, snap.phi));
    }
    rep.c2 = std::exp(rep.max_lhs);
    return rep;
}

SmoothingFit smoothing_rate(const std::vector<double>& times,
                            const std::vector<double>& linf) {
    if (times.size() != linf.size() || times.size() < 4)
        throw std::invalid_argument("smoothing_rate: need at least 4 samples");
    if (!(times.back() >= 10.0 * times.front() * (1.0 - 1e-12)))
        throw std::invalid_argument("smoothing_rate: samples must span a decade in t");
    SmoothingFit fit;
    fit.n_used = static_cast<int>(times.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(times.size()), ly(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        lx[k] = std::log(times[k]);
        ly[k] = std::log(linf[k]);
        mx += lx[k];
        my += ly[k];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    fit.exponent = sxy / sxx;
    fit.log_prefactor = my - fit.exponent * mx;
    return fit;
}

} // namespace vrlab
