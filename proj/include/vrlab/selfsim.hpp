#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vrlab/evolution.hpp"

namespace vrlab {

// Vorticity in self-similar variables R = (r - rbar)/sqrt(nu t),
// Z = (z - zbar)/sqrt(nu t), f = (nu t / Gamma) w, sampled on a fixed
// window so frames at different times are directly comparable.
struct RescaledFrame {
    Grid grid;
    std::vector<double> f;
    double eps = 0.0;    // sqrt(nu t) / rbar
    double gamma = 0.0;  // Gamma / nu
    double t = 0.0;
    bool window_clipped = false;  // part of the window fell off the physical grid

    double at(int i, int j) const { return f[grid.idx(i, j)]; }
};

// The standard window [-12,12]^2 at 8 cells per unit length.
const Grid& standard_frame_grid();

// Limiting profile (1/4pi) e^{-(R^2+Z^2)/4} and the weight e^{+(R^2+Z^2)/4}
// of the weighted L^2 norm; their product is identically 1/4pi.
double gauss_profile(double R, double Z);
double gauss_weight(double R, double Z);

// Resample a physical field into self-similar variables (bilinear).
// z_center overrides the frame center along z when given (used to compare
// the fixed center against the drift-corrected one).
RescaledFrame to_selfsimilar(const VorticityField& w, double t,
                             const PhysicalParams& p,
                             double z_center = std::numeric_limits<double>::quiet_NaN());

// Center correction z(t) = zbar + (Gamma t / 4 pi rbar) log(rbar/sqrt(nu t))
// accounting for the leading axial drift.
double refined_center(const PhysicalParams& p, double t);

struct GaussianDistance {
    double x_dist = 0.0;   // sqrt(int |f-G|^2 e^{+rho^2/4}), truncated at rho = 12
    double l1_dist = 0.0;  // int |f-G| over the window
    bool tail_warning = false;
};

// Distance of a frame from the limiting profile, and between two frames.
GaussianDistance gaussian_distance(const RescaledFrame& frame);
GaussianDistance frame_distance(const RescaledFrame& a, const RescaledFrame& b);

// Profile times a radial cutoff: G * chi(eps^2 (R^2+Z^2)) with chi = 1 on
// [0, 1/4], cos^2(2 pi (x - 1/4)) on [1/4, 1/2], 0 beyond. Requires
// 0 < eps <= 1/2.
RescaledFrame cutoff_f0(double eps);

struct Energies {
    double E = 0.0;     // (1/2) int ftilde^2 e^{+rho^2/4}
    double bigE = 0.0;  // (1/2) int (|grad ftilde|^2 + (1+rho^2) ftilde^2) e^{+rho^2/4}
    double m = 0.0;     // int ftilde, with ftilde = f - cutoff_f0(eps)
    bool tail_warning = false;
};
Energies energies(const RescaledFrame& frame, double eps);

// max over nodes of f / e^{-(1-eta)(R^2+Z^2)/4}; finite, stable values
// along a run certify the Gaussian envelope.
double envelope_ratio(const RescaledFrame& frame, double eta);

struct RingSpeedFit {
    double A = 0.0;  // coefficient of log(rbar/sqrt(nu t))
    double B = 0.0;  // constant offset
    int n_used = 0;
    std::vector<double> t_mid, speed;
};

// Least-squares fit of centered-difference centroid speeds against
// log(rbar/sqrt(nu t)). Requires >= 6 samples in the eps window spanning
// a factor >= 2 in eps.
RingSpeedFit ring_speed(const std::vector<double>& times,
                        const std::vector<double>& centroid_z,
                        const PhysicalParams& p,
                        double eps_lo = 0.0, double eps_hi = 1e300);

struct Monitors {
    double omega_sup = 0.0;      // nu t ||w||_inf / Gamma
    double omega_over_r = 0.0;   // nu t sqrt(nu t) ||w/r||_inf / Gamma
    double speed = 0.0;          // sqrt(nu t) ||u||_inf / Gamma
    double ur_over_r = 0.0;      // nu t ||u_r/r||_inf / Gamma
    double decay_product = 0.0;  // max (1+|R|+|Z|) |u| sqrt(nu t) / Gamma
};

// Scale-invariant size monitors of a state. gamma_norm replaces the
// circulation in the normalization when given (linear runs pass ||w0||_1).
Monitors monitors(const RunState& s, double gamma_norm = 0.0);

struct TailSlopeFit {
    double slope = 0.0;      // of log(mass) against 1/(nu t)
    int n_used = 0;
    bool below_floor = false;      // all samples under the positivity floor
    bool below_envelope = false;   // every sample under e^{-rho^2/(16 nu t)}
};

// Regression of near-axis (r < rbar/2) and far (r > 3 rbar) mass
// fractions of |w|/Gamma against 1/(nu t), with the Gaussian envelope
// verdicts; expected slopes are -rho^2/16 with rho = rbar/2 and rbar.
struct TailChecks {
    TailSlopeFit near_axis, far;
};
TailChecks tail_checks(const std::vector<double>& times,
                       const std::vector<double>& near_mass,
                       const std::vector<double>& far_mass,
                       const PhysicalParams& p);

// One row of the per-snapshot diagnostics table. The deficit m is computed
// from the physical-grid mass and the reference-profile mass, not from the
// resampled frame, so it is free of interpolation error.
struct DiagnosticsRecord {
    double t = 0.0, eps = 0.0;
    double l1_norm = 0.0, linf_norm = 0.0;
    double impulse = 0.0, centroid_z = 0.0;
    double x_dist = 0.0, l1_dist = 0.0;
    double E = 0.0, bigE = 0.0, m = 0.0;
    double envelope_ratio = 0.0;  // at eta = 1/4
    double tail_near = 0.0, tail_far = 0.0;  // |w| mass below rbar/2, beyond 3 rbar
    Monitors mon;
};

DiagnosticsRecord diagnose_state(const RunState& s);
std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const DiagnosticsRecord& rec);

} // namespace vrlab
