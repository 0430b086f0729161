#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vrlab/grid.hpp"

namespace vrlab {

struct EllipticSolveInfo {
    int iterations = 0;          // V-cycles or CG iterations
    double rel_residual = 0.0;   // ||A u - rhs||_2 / reference scale
    double max_residual = 0.0;   // max |A u - rhs| / max |rhs|
    bool converged = false;
    const char* method = "";
};

// Discrete flux-form operator A u = -div_h(a grad_h u) on the interior of a
// rectangular node grid, a = a(r) evaluated at radial half-nodes:
//
//   (A u)_ij = [aR_i (u_ij - u_{i+1,j}) + aR_{i-1} (u_ij - u_{i-1,j})] / hr^2
//            + aZ_i (2 u_ij - u_{i,j+1} - u_{i,j-1}) / hz^2
//
// with Dirichlet values held in the boundary entries of u. The coefficient
// must be positive across the open interior; the 1/r stream coefficient is
// fine because aZ at the axis column multiplies Dirichlet rows only.
//
// Solver: geometric multigrid V(2,2) with red-black Gauss-Seidel smoothing
// and rediscretized coarse operators, falling back to plain conjugate
// gradients when the cell counts do not coarsen. All reductions are serial,
// so repeated solves are bitwise reproducible.
class FluxPoissonSolver {
public:
    FluxPoissonSolver(const Grid& g, std::function<double(double)> a_of_r);
    ~FluxPoissonSolver();
    FluxPoissonSolver(FluxPoissonSolver&&) noexcept;
    FluxPoissonSolver& operator=(FluxPoissonSolver&&) noexcept;

    // u enters holding Dirichlet data on the edges (and, when warm_start,
    // an interior initial guess); exits holding the solution.
    EllipticSolveInfo solve(const std::vector<double>& rhs, std::vector<double>& u,
                            double tol_rel = 1e-10, bool warm_start = false,
                            int max_iter = 200) const;

    // Interior application of A (boundary entries of out are zeroed).
    void apply(const std::vector<double>& u, std::vector<double>& out) const;

    const Grid& grid() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace vrlab
