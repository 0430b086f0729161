#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vrlab/selfsim.hpp"

using namespace vrlab;

namespace {

constexpr double pi = 3.14159265358979323846;

// Fill a frame on the standard window by sampling a function of (R, Z).
template <typename F>
RescaledFrame sampled_frame(F fn) {
    RescaledFrame fr;
    fr.grid = standard_frame_grid();
    fr.f.resize(fr.grid.node_count());
    for (int i = 0; i <= fr.grid.nr; ++i)
        for (int j = 0; j <= fr.grid.nz; ++j)
            fr.f[fr.grid.idx(i, j)] = fn(fr.grid.r(i), fr.grid.z(j));
    return fr;
}

// Trapezoid mass of a frame over its window.
double frame_mass(const RescaledFrame& fr) {
    const Grid& g = fr.grid;
    double acc = 0.0;
    for (int i = 0; i <= g.nr; ++i) {
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc += cr * cz * fr.f[g.idx(i, j)];
        }
    }
    return acc * g.hr * g.hz;
}

} // namespace

TEST_SUITE_BEGIN("selfsim");

TEST_CASE("standard window and limiting profile") {
    const Grid& g = standard_frame_grid();
    CHECK(g.r(0) == -12.0);
    CHECK(g.r(g.nr) == 12.0);
    CHECK(g.z(0) == -12.0);
    CHECK(g.z(g.nz) == 12.0);
    CHECK(g.hr == 0.125);
    CHECK(g.hz == 0.125);
    // the origin is a node, where the profile peaks
    CHECK(g.r(g.nr / 2) == 0.0);
    CHECK(g.z(g.nz / 2) == 0.0);

    CHECK(gauss_profile(0.0, 0.0) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-15));
    CHECK(gauss_weight(0.0, 0.0) == 1.0);
    for (double rho : {0.5, 1.0, 3.0, 7.0})
        CHECK(gauss_profile(rho, 0.3) * gauss_weight(rho, 0.3)
              == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-14));

    // unit total mass over the window
    RescaledFrame gfr = sampled_frame(gauss_profile);
    CHECK(frame_mass(gfr) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform inflation of the profile is measured exactly") {
    double delta = 0.01;
    RescaledFrame fr = sampled_frame([&](double R, double Z) {
        return (1.0 + delta) * gauss_profile(R, Z);
    });
    GaussianDistance d = gaussian_distance(fr);
    // ||G||_X = 1/sqrt(4 pi), so the inflated profile sits at delta times that
    CHECK(d.x_dist == doctest::Approx(delta / std::sqrt(4.0 * pi)).epsilon(1e-9));
    CHECK(d.l1_dist == doctest::Approx(delta).epsilon(1e-9));
    CHECK(!d.tail_warning);

    // frame_distance against the plain profile reports the same numbers
    RescaledFrame gfr = sampled_frame(gauss_profile);
    GaussianDistance d2 = frame_distance(fr, gfr);
    CHECK(d2.x_dist == doctest::Approx(d.x_dist).epsilon(1e-14));

    // mismatched windows are rejected
    RescaledFrame off;
    off.grid = build_grid(1.0, -1.0, 1.0, 16, 16);
    off.f.assign(off.grid.node_count(), 0.0);
    CHECK_THROWS_AS(frame_distance(fr, off), std::invalid_argument);
}

TEST_CASE("axial slide of the profile") {
    double delta = 0.1;
    RescaledFrame fr = sampled_frame([&](double R, double Z) {
        return gauss_profile(R, Z - delta);
    });
    GaussianDistance d = gaussian_distance(fr);
    // leading order: delta * ||dG/dZ|| in each norm
    CHECK(d.l1_dist == doctest::Approx(delta / std::sqrt(pi)).epsilon(0.02));
    CHECK(d.x_dist == doctest::Approx(delta / std::sqrt(8.0 * pi)).epsilon(0.02));
}

TEST_CASE("a profile blotted out by the window warns") {
    RescaledFrame fr = sampled_frame([](double, double) { return 1.0; });
    GaussianDistance d = gaussian_distance(fr);
    CHECK(d.tail_warning);
    CHECK(d.l1_dist > 100.0);
}

TEST_CASE("energies of the inflated profile") {
    double delta = 0.1;
    RescaledFrame fr = sampled_frame([&](double R, double Z) {
        return (1.0 + delta) * gauss_profile(R, Z);
    });
    // eps small enough that the cutoff is identically 1 on the window, so
    // the fluctuation is exactly delta G
    Energies en = energies(fr, 0.02);
    CHECK(en.E == doctest::Approx(delta * delta / (8.0 * pi)).epsilon(1e-6));
    CHECK(en.bigE == doctest::Approx(3.0 * delta * delta / (4.0 * pi)).epsilon(5e-3));
    CHECK(en.m == doctest::Approx(delta).epsilon(1e-6));
    CHECK(!en.tail_warning);

    RescaledFrame off;
    off.grid = build_grid(1.0, -1.0, 1.0, 16, 16);
    off.f.assign(off.grid.node_count(), 0.0);
    CHECK_THROWS_AS(energies(off, 0.25), std::invalid_argument);
}

TEST_CASE("cutoff profile mass deficit") {
    // hand quadrature of int (1-chi) G for the cos^2 cutoff at eps = 1/4:
    // the transition occupies 2 < rho < 2 sqrt(2) and the deficit comes out
    //   e^{-1} [ (1-e^{-1})/2 - (1+e^{-1}) / (2 (1+pi^2)) ] + e^{-2}
    double expect = std::exp(-1.0) * ((1.0 - std::exp(-1.0)) / 2.0
                      - (1.0 + std::exp(-1.0)) / (2.0 * (1.0 + pi * pi)))
                    + std::exp(-2.0);
    RescaledFrame f0 = cutoff_f0(0.25);
    double deficit = 1.0 - frame_mass(f0);
    CHECK(deficit == doctest::Approx(expect).epsilon(0.025));
    CHECK(std::abs(deficit - 0.2284597) < 5e-3);
    // stays under the e^{-1/(4 eps)^2 ...} envelope, which at eps = 1/4 is e^{-1}
    CHECK(deficit < std::exp(-1.0));

    // small eps: the cutoff only bites beyond rho = 1/(2 eps) = 10, where
    // the profile mass is e^{-25}
    double small = 1.0 - frame_mass(cutoff_f0(0.05));
    CHECK(small >= 0.0);
    CHECK(small < 1e-10);

    // pointwise structure: untouched inside, zero outside
    const Grid& g = standard_frame_grid();
    CHECK(f0.at(g.nr / 2, g.nz / 2) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-14));
    int i2 = g.nr / 2 + 16;  // R = 2, on the transition edge
    CHECK(f0.at(i2, g.nz / 2) == doctest::Approx(gauss_profile(2.0, 0.0)).epsilon(1e-12));
    int i4 = g.nr / 2 + 32;  // R = 4, past the cutoff
    CHECK(f0.at(i4, g.nz / 2) == 0.0);

    CHECK_THROWS_AS(cutoff_f0(0.55), std::domain_error);
    CHECK_THROWS_AS(cutoff_f0(0.0), std::domain_error);
}

TEST_CASE("envelope ratio") {
    RescaledFrame fr = sampled_frame(gauss_profile);
    // against e^{-(1-eta) rho^2/4} with eta = 1/4 the profile's ratio peaks
    // at the origin with value 1/4pi
    CHECK(envelope_ratio(fr, 0.25) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-12));
    // eta = 1 removes the weight entirely, leaving the sup norm
    CHECK(envelope_ratio(fr, 1.0) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-12));

    RescaledFrame twice = fr;
    for (auto& v : twice.f) v *= 2.0;
    CHECK(envelope_ratio(twice, 0.25) == 2.0 * envelope_ratio(fr, 0.25));
}

TEST_CASE("physical field maps back onto the profile") {
    Grid g = build_grid(1.6, -0.8, 0.8, 256, 256);
    PhysicalParams p;  // nu = 1, circulation 1, ring at (1, 0)
    double t = 2.5e-3; // eps = 0.05: frame spacing lands on physical nodes
    double s = std::sqrt(p.nu * t);

    VorticityField w(g);
    for (int i = 0; i <= g.nr; ++i)
        for (int j = 0; j <= g.nz; ++j)
            w.w[g.idx(i, j)] = p.gamma_circ / (p.nu * t)
                * gauss_profile((g.r(i) - p.rbar) / s, g.z(j) / s);

    RescaledFrame fr = to_selfsimilar(w, t, p);
    CHECK(!fr.window_clipped);
    CHECK(fr.eps == doctest::Approx(0.05).epsilon(1e-12));

    double worst = 0.0;
    const Grid& fg = fr.grid;
    for (int i = 0; i <= fg.nr; ++i)
        for (int j = 0; j <= fg.nz; ++j)
            worst = std::max(worst, std::abs(fr.at(i, j)
                                             - gauss_profile(fg.r(i), fg.z(j))));
    CHECK(worst < 1e-12);

    GaussianDistance d = gaussian_distance(fr);
    CHECK(d.x_dist < 1e-8);
    CHECK(d.l1_dist < 1e-10);
    CHECK(!d.tail_warning);
    CHECK(frame_mass(fr) == doctest::Approx(1.0).epsilon(1e-6));

    // recentering the frame slides the sampled profile by the same amount
    RescaledFrame shifted = to_selfsimilar(w, t, p, 0.05);
    CHECK(shifted.at(fg.nr / 2, fg.nz / 2)
          == doctest::Approx(gauss_profile(0.0, 1.0)).epsilon(1e-6));

    // a wider core pushes the window off the grid
    RescaledFrame wide = to_selfsimilar(w, 0.01, p);
    CHECK(wide.window_clipped);
    CHECK(gaussian_distance(wide).tail_warning);

    CHECK_THROWS_AS(to_selfsimilar(w, 0.0, p), std::invalid_argument);
    PhysicalParams p0 = p;
    p0.gamma_circ = 0.0;
    CHECK_THROWS_AS(to_selfsimilar(w, t, p0), std::invalid_argument);
}

TEST_CASE("ring speed fit recovers a logarithmic drift law") {
    PhysicalParams p;  // rbar = 1, nu = 1
    double A = 10.0 / (4.0 * pi), B = 0.3, z0 = 2e-3;
    std::vector<double> times, z;
    for (int k = 0; k < 25; ++k) {
        double t = 6.25e-4 * std::pow(1.2, k);
        times.push_back(t);
        // integral of zdot = A log(1/sqrt(t)) + B from 0
        z.push_back(A * t * (std::log(1.0 / std::sqrt(t)) + 0.5) + B * t + z0);
    }
    RingSpeedFit fit = ring_speed(times, z, p);
    CHECK(fit.n_used == 23);
    CHECK(fit.A == doctest::Approx(A).epsilon(1e-6));
    CHECK(std::abs(fit.B - B) < 6e-3);
    REQUIRE(fit.t_mid.size() == 23);
    CHECK(fit.t_mid.front() == times[1]);

    // restricting the eps window drops the early snapshots
    RingSpeedFit late = ring_speed(times, z, p, 0.04, 1e300);
    CHECK(late.n_used < fit.n_used);
    CHECK(late.A == doctest::Approx(A).epsilon(1e-4));

    std::vector<double> short_t(times.begin(), times.begin() + 5);
    std::vector<double> short_z(z.begin(), z.begin() + 5);
    CHECK_THROWS_AS(ring_speed(short_t, short_z, p), std::invalid_argument);
    CHECK_THROWS_AS(ring_speed(times, short_z, p), std::invalid_argument);
    // a narrow eps span is rejected even with many samples
    std::vector<double> narrow_t, narrow_z;
    for (int k = 0; k < 8; ++k) {
        narrow_t.push_back(1e-3 * (1.0 + 0.05 * k));
        narrow_z.push_back(1e-3 * k);
    }
    CHECK_THROWS_AS(ring_speed(narrow_t, narrow_z, p), std::invalid_argument);
    // a window that filters everything out is rejected the same way
    CHECK_THROWS_AS(ring_speed(times, z, p, 100.0, 200.0), std::invalid_argument);
}

TEST_CASE("monitors normalize a diffusing ring") {
    Grid g = build_grid(1.6, -0.8, 0.8, 128, 128);
    PhysicalParams p;
    p.gamma_circ = 2.0;
    double t = 2.5e-3;
    RunState s;
    s.t = t;
    s.phys = p;
    s.omega = VorticityField(g);
    s.u = VelocityField(g);
    double amp = p.gamma_circ / (4.0 * pi * p.nu * t);
    for (int i = 0; i <= g.nr; ++i)
        for (int j = 0; j <= g.nz; ++j) {
            double dr = g.r(i) - 1.0, dz = g.z(j);
            s.omega.w[g.idx(i, j)] =
                amp * std::exp(-(dr * dr + dz * dz) / (4.0 * p.nu * t));
        }

    Monitors m = monitors(s);
    // nu t ||w||_inf / Gamma for the heat-kernel ring is exactly 1/4pi,
    // peaking on the node at r = 1
    CHECK(m.omega_sup == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-12));
    // ||w/r||_inf also lands on that node at this resolution
    CHECK(m.omega_over_r
          == doctest::Approx(std::sqrt(p.nu * t) / (4.0 * pi)).epsilon(1e-12));
    CHECK(m.speed == 0.0);
    CHECK(m.ur_over_r == 0.0);
    CHECK(m.decay_product == 0.0);

    // explicit normalization replaces the circulation
    Monitors half = monitors(s, 4.0);
    CHECK(half.omega_sup == doctest::Approx(1.0 / (8.0 * pi)).epsilon(1e-12));

    RunState bad = s;
    bad.phys.gamma_circ = 0.0;
    CHECK_THROWS_AS(monitors(bad), std::invalid_argument);
    RunState quiet;
    quiet.omega = VorticityField(g);
    quiet.u = VelocityField(g);
    quiet.phys.gamma_circ = 0.0;
    Monitors zero = monitors(quiet);
    CHECK(zero.omega_sup == 0.0);
}

TEST_CASE("refined center") {
    PhysicalParams p;
    p.gamma_circ = 10.0;
    // (Gamma t / 4 pi) log(1/sqrt(nu t)) at t = 6.25e-4: coefficient
    // 6.25e-3/4pi times log 40
    CHECK(refined_center(p, 6.25e-4) == doctest::Approx(1.8346981e-3).epsilon(1e-6));
    // the correction vanishes when sqrt(nu t) reaches rbar
    CHECK(refined_center(p, 1.0) == doctest::Approx(0.0));
    p.zbar = 0.5;
    CHECK(refined_center(p, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tail slope fits") {
    PhysicalParams p;
    std::vector<double> times, near, far;
    for (int k = 0; k < 8; ++k) {
        double t = 1e-3 * std::pow(1.35, k);
        times.push_back(t);
        near.push_back(0.5 * std::exp(-0.015625 / t));   // (rbar/2)^2/16 = 1/64
        far.push_back(0.3 * std::exp(-0.0625 / t));      // rbar^2/16
    }
    TailChecks tc = tail_checks(times, near, far, p);
    CHECK(tc.near_axis.slope == doctest::Approx(-0.015625).epsilon(1e-9));
    CHECK(tc.far.slope == doctest::Approx(-0.0625).epsilon(1e-9));
    CHECK(tc.near_axis.n_used == 8);
    CHECK(tc.near_axis.below_envelope);
    CHECK(tc.far.below_envelope);
    CHECK(!tc.near_axis.below_floor);

    // amplitudes above the envelope flip the verdict but not the slope
    std::vector<double> loud;
    for (double t : times) loud.push_back(2.0 * std::exp(-0.015625 / t));
    TailChecks tc2 = tail_checks(times, loud, far, p);
    CHECK(!tc2.near_axis.below_envelope);
    CHECK(tc2.near_axis.slope == doctest::Approx(-0.015625).epsilon(1e-9));

    // all-zero masses sit under the positivity floor
    std::vector<double> dead(times.size(), 0.0);
    TailChecks tc3 = tail_checks(times, dead, far, p);
    CHECK(tc3.near_axis.below_floor);
    CHECK(tc3.near_axis.n_used == 0);

    std::vector<double> short_mass(times.begin(), times.end() - 1);
    CHECK_THROWS_AS(tail_checks(times, short_mass, far, p), std::invalid_argument);
}

TEST_CASE("diagnostics table format") {
    std::string header = diagnostics_csv_header();
    CHECK(header ==
          "t,eps,l1_norm,linf_norm,impulse,centroid_z,x_dist,l1_dist,"
          "E,bigE,m,envelope_ratio,tail_near,tail_far,"
          "mon_omega,mon_omega_r,mon_speed,mon_ur_r,mon_decay");
    CHECK(std::count(header.begin(), header.end(), ',') == 18);

    DiagnosticsRecord rec;
    rec.t = 0.1;
    rec.eps = 0.05;
    rec.l1_norm = 1.0 / 3.0;
    rec.mon.decay_product = 2.5;
    std::string row = diagnostics_csv_row(rec);
    CHECK(std::count(row.begin(), row.end(), ',') == 18);
    CHECK(row.rfind("0.10000000000000001,", 0) == 0);
    // deterministic formatting, byte for byte
    CHECK(row == diagnostics_csv_row(rec));
}

TEST_SUITE_END();
