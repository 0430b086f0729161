#include "vrlab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrlab {

namespace {

struct Level {
    Grid g;
    std::vector<double> aR;      // a at (i+1/2), size nr
    std::vector<double> aZ;      // a at r_i, size nr+1
    std::vector<double> inv_diag;
    mutable std::vector<double> u, rhs, res;
};

void build_coeffs(Level& L, const std::function<double(double)>& a_of_r) {
    const Grid& g = L.g;
    L.aR.resize(g.nr);
    for (int i = 0; i < g.nr; ++i)
        L.aR[i] = a_of_r(g.r(i) + 0.5 * g.hr);
    L.aZ.resize(g.nr + 1);
    for (int i = 0; i <= g.nr; ++i)
        // The axis column is Dirichlet; its z-flux coefficient is never read,
        // so guard the 1/r singularity there.
        L.aZ[i] = (i == 0 && g.r(0) == 0.0) ? 0.0 : a_of_r(g.r(i));
    double ihr2 = 1.0 / (g.hr * g.hr), ihz2 = 1.0 / (g.hz * g.hz);
    L.inv_diag.assign(g.node_count(), 0.0);
    for (int i = 1; i < g.nr; ++i)
        for (int j = 1; j < g.nz; ++j)
            L.inv_diag[g.idx(i, j)] =
                1.0 / ((L.aR[i] + L.aR[i - 1]) * ihr2 + 2.0 * L.aZ[i] * ihz2);
    L.u.assign(g.node_count(), 0.0);
    L.rhs.assign(g.node_count(), 0.0);
    L.res.assign(g.node_count(), 0.0);
}

void apply_op(const Level& L, const std::vector<double>& u, std::vector<double>& out) {
    const Grid& g = L.g;
    double ihr2 = 1.0 / (g.hr * g.hr), ihz2 = 1.0 / (g.hz * g.hz);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i < g.nr; ++i) {
        const double aw = L.aR[i - 1] * ihr2, ae = L.aR[i] * ihr2;
        const double az = L.aZ[i] * ihz2;
        const std::size_t c = g.idx(i, 0), n = g.idx(i + 1, 0), s = g.idx(i - 1, 0);
        for (int j = 1; j < g.nz; ++j)
            out[c + j] = (aw + ae + 2.0 * az) * u[c + j]
                       - ae * u[n + j] - aw * u[s + j]
                       - az * (u[c + j + 1] + u[c + j - 1]);
    }
}

void residual(const Level& L, const std::vector<double>& u,
              const std::vector<double>& rhs, std::vector<double>& res) {
    const Grid& g = L.g;
    double ihr2 = 1.0 / (g.hr * g.hr), ihz2 = 1.0 / (g.hz * g.hz);
    std::fill(res.begin(), res.end(), 0.0);
    for (int i = 1; i < g.nr; ++i) {
        const double aw = L.aR[i - 1] * ihr2, ae = L.aR[i] * ihr2;
        const double az = L.aZ[i] * ihz2;
        const std::size_t c = g.idx(i, 0), n = g.idx(i + 1, 0), s = g.idx(i - 1, 0);
        for (int j = 1; j < g.nz; ++j)
            res[c + j] = rhs[c + j]
                       - ((aw + ae + 2.0 * az) * u[c + j]
                          - ae * u[n + j] - aw * u[s + j]
                          - az * (u[c + j + 1] + u[c + j - 1]));
    }
}

void rbgs_sweep(const Level& L, std::vector<double>& u,
                const std::vector<double>& rhs) {
    const Grid& g = L.g;
    double ihr2 = 1.0 / (g.hr * g.hr), ihz2 = 1.0 / (g.hz * g.hz);
    for (int color = 0; color < 2; ++color) {
        for (int i = 1; i < g.nr; ++i) {
            const double aw = L.aR[i - 1] * ihr2, ae = L.aR[i] * ihr2;
            const double az = L.aZ[i] * ihz2;
            const std::size_t c = g.idx(i, 0), n = g.idx(i + 1, 0), s = g.idx(i - 1, 0);
            int j0 = 1 + ((i + 1 + color) & 1);
            for (int j = j0; j < g.nz; j += 2)
                u[c + j] = (rhs[c + j] + ae * u[n + j] + aw * u[s + j]
                            + az * (u[c + j + 1] + u[c + j - 1])) * L.inv_diag[c + j];
        }
    }
}

// Full-weighting restriction of the fine residual to the coarse rhs.
void restrict_residual(const Level& fine, const Level& coarse) {
    const Grid& gf = fine.g;
    const Grid& gc = coarse.g;
    std::fill(coarse.rhs.begin(), coarse.rhs.end(), 0.0);
    for (int I = 1; I < gc.nr; ++I) {
        int i = 2 * I;
        for (int J = 1; J < gc.nz; ++J) {
            int j = 2 * J;
            const std::vector<double>& r = fine.res;
            double v = 4.0 * r[gf.idx(i, j)]
                     + 2.0 * (r[gf.idx(i + 1, j)] + r[gf.idx(i - 1, j)] +
                              r[gf.idx(i, j + 1)] + r[gf.idx(i, j - 1)])
                     + r[gf.idx(i + 1, j + 1)] + r[gf.idx(i + 1, j - 1)]
                     + r[gf.idx(i - 1, j + 1)] + r[gf.idx(i - 1, j - 1)];
            coarse.rhs[gc.idx(I, J)] = v / 16.0;
        }
    }
}

// Bilinear prolongation of the coarse correction, added into the fine iterate.
void prolong_correct(const Level& coarse, const Level& fine, std::vector<double>& uf) {
    const Grid& gf = fine.g;
    const Grid& gc = coarse.g;
    const std::vector<double>& c = coarse.u;
    for (int i = 1; i < gf.nr; ++i) {
        int I = i / 2;
        bool ei = (i % 2) == 0;
        for (int j = 1; j < gf.nz; ++j) {
            int J = j / 2;
            bool ej = (j % 2) == 0;
            double v;
            if (ei && ej)
                v = c[gc.idx(I, J)];
            else if (ei)
                v = 0.5 * (c[gc.idx(I, J)] + c[gc.idx(I, J + 1)]);
            else if (ej)
                v = 0.5 * (c[gc.idx(I, J)] + c[gc.idx(I + 1, J)]);
            else
                v = 0.25 * (c[gc.idx(I, J)] + c[gc.idx(I + 1, J)] +
                            c[gc.idx(I, J + 1)] + c[gc.idx(I + 1, J + 1)]);
            uf[gf.idx(i, j)] += v;
        }
    }
}

double norm2_interior(const Grid& g, const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 1; i < g.nr; ++i)
        for (int j = 1; j < g.nz; ++j) {
            double x = v[g.idx(i, j)];
            s += x * x;
        }
    return std::sqrt(s);
}

double dot_interior(const Grid& g, const std::vector<double>& a,
                    const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 1; i < g.nr; ++i)
        for (int j = 1; j < g.nz; ++j)
            s += a[g.idx(i, j)] * b[g.idx(i, j)];
    return s;
}

} // namespace

struct FluxPoissonSolver::Impl {
    std::vector<Level> levels;   // levels[0] is the fine grid
    bool mg_capable = false;

    void vcycle(std::size_t l) const {
        const Level& L = levels[l];
        if (l + 1 == levels.size()) {
            // Coarsest grid: smooth to convergence, it is at most ~12x12.
            for (int k = 0; k < 150; ++k) rbgs_sweep(L, L.u, L.rhs);
            return;
        }
        for (int k = 0; k < 2; ++k) rbgs_sweep(L, L.u, L.rhs);
        residual(L, L.u, L.rhs, L.res);
        const Level& C = levels[l + 1];
        restrict_residual(L, C);
        std::fill(C.u.begin(), C.u.end(), 0.0);
        vcycle(l + 1);
        prolong_correct(C, L, L.u);
        for (int k = 0; k < 2; ++k) rbgs_sweep(L, L.u, L.rhs);
    }
};

FluxPoissonSolver::FluxPoissonSolver(const Grid& g,
                                     std::function<double(double)> a_of_r)
    : impl_(new Impl) {
    Level fine;
    fine.g = g;
    build_coeffs(fine, a_of_r);
    impl_->levels.push_back(std::move(fine));
    Grid cur = g;
    while (cur.nr % 2 == 0 && cur.nz % 2 == 0 && cur.nr >= 16 && cur.nz >= 16) {
        Grid cg = cur;
        cg.nr /= 2;
        cg.nz /= 2;
        cg.hr *= 2.0;
        cg.hz *= 2.0;
        Level L;
        L.g = cg;
        build_coeffs(L, a_of_r);
        impl_->levels.push_back(std::move(L));
        cur = cg;
    }
    impl_->mg_capable = impl_->levels.size() > 1;
}

FluxPoissonSolver::~FluxPoissonSolver() = default;
FluxPoissonSolver::FluxPoissonSolver(FluxPoissonSolver&&) noexcept = default;
FluxPoissonSolver& FluxPoissonSolver::operator=(FluxPoissonSolver&&) noexcept = default;

const Grid& FluxPoissonSolver::grid() const { return impl_->levels[0].g; }

void FluxPoissonSolver::apply(const std::vector<double>& u,
                              std::vector<double>& out) const {
    out.resize(u.size());
    apply_op(impl_->levels[0], u, out);
}

EllipticSolveInfo FluxPoissonSolver::solve(const std::vector<double>& rhs,
                                           std::vector<double>& u,
                                           double tol_rel, bool warm_start,
                                           int max_iter) const {
    const Level& L = impl_->levels[0];
    const Grid& g = L.g;
    if (rhs.size() != g.node_count() || u.size() != g.node_count())
        throw std::invalid_argument("FluxPoissonSolver::solve: size mismatch");

    if (!warm_start) {
        for (int i = 1; i < g.nr; ++i)
            for (int j = 1; j < g.nz; ++j)
                u[g.idx(i, j)] = 0.0;
    }

    EllipticSolveInfo info;
    residual(L, u, rhs, L.res);
    double r0 = norm2_interior(g, L.res);
    double ref = std::max(norm2_interior(g, rhs), r0);
    if (ref == 0.0) {
        info.converged = true;
        info.method = impl_->mg_capable ? "multigrid" : "cg";
        return info;
    }
    double target = tol_rel * ref;

    if (impl_->mg_capable) {
        info.method = "multigrid";
        L.rhs = rhs;
        L.u = u;
        double rn = r0;
        int k = 0;
        while (rn > target && k < max_iter) {
            impl_->vcycle(0);
            residual(L, L.u, L.rhs, L.res);
            rn = norm2_interior(g, L.res);
            ++k;
        }
        u = L.u;
        info.iterations = k;
        info.rel_residual = rn / ref;
        info.converged = rn <= target;
    } else {
        // Plain CG on the interior unknowns (A is SPD in flux form).
        info.method = "cg";
        std::vector<double> r = L.res, p = r, Ap(u.size(), 0.0);
        double rr = dot_interior(g, r, r);
        int k = 0;
        int cap = std::max(max_iter, 10 * (g.nr + g.nz));
        while (std::sqrt(rr) > target && k < cap) {
            apply_op(L, p, Ap);
            double alpha = rr / dot_interior(g, p, Ap);
            for (int i = 1; i < g.nr; ++i)
                for (int j = 1; j < g.nz; ++j) {
                    std::size_t id = g.idx(i, j);
                    u[id] += alpha * p[id];
                    r[id] -= alpha * Ap[id];
                }
            double rr_new = dot_interior(g, r, r);
            double beta = rr_new / rr;
            rr = rr_new;
            for (int i = 1; i < g.nr; ++i)
                for (int j = 1; j < g.nz; ++j) {
                    std::size_t id = g.idx(i, j);
                    p[id] = r[id] + beta * p[id];
                }
            ++k;
        }
        info.iterations = k;
        info.rel_residual = std::sqrt(rr) / ref;
        info.converged = std::sqrt(rr) <= target;
    }

    // Max-norm residual scaled by the data, for the solver contract report.
    residual(L, u, rhs, L.res);
    double mr = 0.0, mrhs = 0.0;
    for (double x : L.res) mr = std::max(mr, std::abs(x));
    for (double x : rhs) mrhs = std::max(mrhs, std::abs(x));
    info.max_residual = (mrhs > 0.0) ? mr / mrhs : mr;
    return info;
}

} // namespace vrlab
