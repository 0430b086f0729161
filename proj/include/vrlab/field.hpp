#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vrlab/grid.hpp"

namespace vrlab {

// Azimuthal vorticity sampled on a half-plane grid. The axis column (i = 0)
// is stored explicitly and is zero for any physically admissible field.
struct VorticityField {
    Grid grid;
    std::vector<double> w;

    VorticityField() = default;
    explicit VorticityField(const Grid& g)
        : grid(g), w(g.node_count(), 0.0) {}

    double& at(int i, int j) { return w[grid.idx(i, j)]; }
    double at(int i, int j) const { return w[grid.idx(i, j)]; }
};

// Meridional velocity (u_r, u_z) on the same node layout.
struct VelocityField {
    Grid grid;
    std::vector<double> ur, uz;

    VelocityField() = default;
    explicit VelocityField(const Grid& g)
        : grid(g), ur(g.node_count(), 0.0), uz(g.node_count(), 0.0) {}

    double max_speed() const;
};

// Stream function; eps records which velocity map it belongs to
// (eps = 0 is the planar limit, physical-coordinate solves store
// eps = 1 by convention since the physical law has no eps parameter).
struct StreamField {
    Grid grid;
    std::vector<double> psi;
    double eps = 0.0;

    StreamField() = default;
    explicit StreamField(const Grid& g, double e = 0.0)
        : grid(g), psi(g.node_count(), 0.0), eps(e) {}
};

// Adjoint test function, evolved backward along a stored forward run.
struct AdjointField {
    Grid grid;
    std::vector<double> phi;

    AdjointField() = default;
    explicit AdjointField(const Grid& g)
        : grid(g), phi(g.node_count(), 0.0) {}
};

// Trapezoid weight of node (i, j) for the planar measure dr dz.
double trapezoid_weight(const Grid& g, int i, int j);

// Integral of the samples with the planar trapezoid rule (compensated
// summation in a fixed order, so results are bitwise reproducible).
double integrate(const Grid& g, const std::vector<double>& v);

// L^p norm with the planar measure. p = infinity gives the max over nodes,
// p < 1 throws std::domain_error.
double lp_norm(const VorticityField& f, double p);
double lp_norm(const Grid& g, const std::vector<double>& v, double p);

enum class MomentKind { mass, impulse, centroid_z };

// mass = integral of w, impulse = integral of r^2 w, centroid_z = the
// impulse-free z centroid (integral of z w over mass). centroid_z throws
// std::domain_error when |mass| < 1e-14 * ||w||_1, including the zero field.
double moment(const VorticityField& f, MomentKind kind);

enum class TailRegion { near_axis, far };

// Mass of |w| restricted to r < rho (near_axis) or r > rho (far). Nodes on
// r = rho split their weight evenly. rho outside [r_min, r_max] throws
// std::domain_error.
double tail_mass(const VorticityField& f, TailRegion region, double rho);

// True when the field is negligible near the outer boundaries: every node
// within `margin` cells of r_max, z_min, or z_max is below frac * max|w|.
bool boundary_negligible(const VorticityField& f, int margin = 3,
                         double frac = 1e-10);

double min_value(const std::vector<double>& v);
double max_value(const std::vector<double>& v);
double max_abs(const std::vector<double>& v);

// Bilinear sample of node values at (x, y) in grid coordinates; points
// outside the grid return 0.
double sample_bilinear(const Grid& g, const std::vector<double>& v,
                       double x, double y);

} // namespace vrlab
