#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vrlab/field.hpp"
#include "vrlab/grid.hpp"

namespace vrlab {

// (1/sqrt(pi tau)) int_{-pi/4}^{pi/4} e^{-sin^2(phi)/tau} cos(2 phi) dphi.
// Decreasing in tau, tends to 1 as tau -> 0 and to 1/sqrt(pi tau) as
// tau -> infinity, and never exceeds 1/sqrt(pi tau).
double h_tilde(double tau);

// Prescribed planar drift: divergence-free velocity U and scalar potential
// V, with the size constants K1 = sup_t sqrt(t/nu) ||U(t)||_inf and
// K2 = int ||V(t)||_inf dt over the run window.
struct DriftSpec {
    std::function<void(double x1, double x2, double t, double& u1, double& u2)> U;
    std::function<double(double x1, double x2, double t)> V;
    double K1 = 0.0, K2 = 0.0;
    std::string name = "none";
};

DriftSpec drift_none();
// Shear u1 = k1 sqrt(nu/t) tanh(x2 / sqrt(nu t)): saturates K1 = k1 at
// every time and is invariant under parabolic rescaling.
DriftSpec drift_shear(double k1, double nu);
// Rigid rotation u = omega0 (-x2, x1); K1 is set by the caller's window.
DriftSpec drift_rotation(double omega0);
// Adds the uniform growth potential V = -k2 / t_end (so K2 = k2 over
// [0, t_end] and the kernel gains exactly the factor e^{k2 t/t_end}).
DriftSpec with_uniform_growth(DriftSpec d, double k2, double t_end);

// Max |div U| by central differences over an n x n probe box of the given
// radius at time t.
double max_drift_divergence(const DriftSpec& d, double t, double radius, int n);

struct KernelSnapshot {
    double t = 0.0;
    Grid grid;
    std::vector<double> phi;
};

// Planar fundamental-solution estimate: snapshots of the kernel started
// from a narrow Gaussian at the origin.
struct KernelEstimate {
    double nu = 1.0;
    double t_src = 0.0;
    double K1 = 0.0, K2 = 0.0;
    std::string drift_name;
    std::vector<KernelSnapshot> snaps;
};

struct FundamentalOpts {
    int n = 192;                 // cells per direction on each stage grid
    double domain_factor = 7.0;  // half-width in units of sqrt(nu t_end)
    double cfl_adv = 0.4, cfl_diff = 0.4;
};

// Evolve d_t phi = nu lap(phi) - div(U phi) - V phi from a Gaussian of
// width sqrt(4 nu t_src), t_src = t_list.front()/100, emitting snapshots at
// the requested times. The grid is re-centered on the diffusive scale in
// geometric stages so early times stay resolved without a fine global mesh.
KernelEstimate estimate_fundamental(const DriftSpec& drift, double nu,
                                    const std::vector<double>& t_list,
                                    const FundamentalOpts& opts = {});

struct AronsonReport {
    double c2 = 0.0;      // exp of the max tilted log expression over probes
    double max_lhs = 0.0; // that max: log phi + log(nu t) + d^2/(4 nu t) - K1 d/sqrt(nu t) - K2
    int probes_used = 0;
    int probes_skipped = 0;  // below the positivity floor
    double max_mass = 0.0;   // max over snapshot times of int phi
    bool positive = true;    // no negative phi at any probe above the floor
};

// Verifies the Gaussian upper envelope with drift-dependent tilt on probes
// with |x| <= 5 sqrt(nu t) and fits the single admissible constant.
AronsonReport aronson_check(const KernelEstimate& est);

struct SmoothingFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    int n_used = 0;
};

// Fit of log ||phi(t)||_inf against log t; needs >= 4 samples spanning at
// least a decade.
SmoothingFit smoothing_rate(const std::vector<double>& times,
                            const std::vector<double>& linf);

} // namespace vrlab
