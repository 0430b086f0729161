#pragma once

#include <utility>
#include <vector>

#include "vrlab/elliptic.hpp"
#include "vrlab/field.hpp"
#include "vrlab/kernels.hpp"

namespace vrlab {

// Velocity maps of the eps-parametrized family. Fields live on a rescaled
// (R, Z) frame; eps >= 0 measures how far the frame is from the planar
// limit, where eps = 0 degenerates to the 2D Biot-Savart law. The weight
// b(R) = 1 + eps R plays the role the radius plays in physical coordinates.

// Direct O(N^2) summation against the tabulated kernels. The reference
// implementation every other velocity route is checked against; no
// acceleration, deterministic summation order, self-term dropped (the
// antisymmetric kernel integrates to zero over the diagonal cell).
// Preconditions: eps >= 0 (negative throws std::domain_error), f below
// 1e-12 of its peak wherever 1 + eps R <= 0 (else std::domain_error).
VelocityField bs_eps(const VorticityField& f, double eps,
                     const KernelTable& kt = default_kernel_table());

// Stream function of the same family by direct summation,
// phi = (1/2pi) sum sqrt(b b') F(xi^2) f' w'.
StreamField stream_function_eps(const VorticityField& f, double eps,
                                const KernelTable& kt = default_kernel_table());

// Centered second-order differentiation of a stream function,
// U_r = -dZ phi / b, U_z = dR phi / b, one-sided at the frame edges,
// zero where b <= 0.
VelocityField velocity_from_stream(const StreamField& phi);

struct EllipticOpts {
    bool summed_boundary = true;   // boundary phi by direct summation
    double tol_rel = 1e-11;
    int max_iter = 400;
};

struct EllipticResult {
    VelocityField u;
    StreamField phi;
    EllipticSolveInfo info;
};

// Independent velocity route: solve -div((1/b) grad phi) = f with Dirichlet
// boundary data (summed or zero), then differentiate. Throws
// std::runtime_error with the residual when the solver fails to converge.
EllipticResult bs_elliptic(const VorticityField& f, double eps,
                           const EllipticOpts& opts = {},
                           const KernelTable& kt = default_kernel_table());

// Pointwise single-target evaluation (targets need not be grid nodes).
void bs_eps_at(const VorticityField& f, double eps, double R, double Z,
               double& Ur, double& Uz, const KernelTable& kt);

struct GapReport {
    double eps = 0.0;
    double max_gap = 0.0;        // max |U^eps - U^0| over probes
    double fitted_C = 0.0;       // max of gap * b / (eps * majorant integral)
    double max_ratio = 0.0;      // alias of fitted_C, max over probes
    int probes = 0;
};

// Compares U^eps with the planar U^0 at the probe points and fits the
// constant in the majorant (eps C / b)(1 + log_+(b / (eps rho))) * |f|.
// A probe with 1 + eps R <= 0 throws std::domain_error.
GapReport velocity_gap_report(const VorticityField& f, double eps,
                              const std::vector<std::pair<double, double>>& probes,
                              const KernelTable& kt = default_kernel_table());

// Fit over several eps values: slope of log(max_gap / log(1/eps)) against
// log(eps) (the gap grows like eps log(1/eps), so the log factor is divided
// out before fitting) plus the uncompensated slope for reference.
struct GapScaling {
    double exponent = 0.0;        // log-compensated slope
    double bare_exponent = 0.0;   // raw log-log slope
    double C_min = 0.0, C_max = 0.0;
    std::vector<GapReport> reports;
};
GapScaling gap_scaling(const VorticityField& f, const std::vector<double>& eps_list,
                       const std::vector<std::pair<double, double>>& probes,
                       const KernelTable& kt = default_kernel_table());

// Physical-coordinate axisymmetric velocity by direct summation; the
// same kernels with b = r and xi^2 = rho^2 / (r r'). On-axis targets use
// the closed-form axial limit. Sources with |w| <= cutoff_rel * max|w|
// are skipped (0 keeps everything).
VelocityField axisym_velocity_direct(const VorticityField& omega,
                                     const KernelTable& kt = default_kernel_table(),
                                     double cutoff_rel = 0.0);

// Physical stream function psi(r, z) = (1/2pi) sum sqrt(r r') F f' w',
// evaluated at one point; used for boundary data of the elliptic route.
double axisym_stream_at(const VorticityField& omega, double r, double z,
                        const KernelTable& kt, double cutoff_rel = 0.0,
                        int i_lo = 0, int i_hi = -1, int j_lo = 0, int j_hi = -1);

// Velocity from a physical stream function, u_r = -dz psi / r,
// u_z = dr psi / r, with the parabolic axis limit u_z(0, z) = 2 psi_1 / hr^2.
VelocityField velocity_from_physical_stream(const StreamField& psi);

} // namespace vrlab
