#include "vrlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrlab {

namespace {

// Kahan accumulator. The partition and conservation checks compare sums of
// ~1e5 terms at 1e-12 relative, which plain double summation only just meets,
// so all field reductions compensate. Fixed iteration order keeps results
// bitwise identical between runs.
struct Kahan {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace

double trapezoid_weight(const Grid& g, int i, int j) {
    double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
    double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
    return cr * cz * g.hr * g.hz;
}

double integrate(const Grid& g, const std::vector<double>& v) {
    Kahan acc;
    for (int i = 0; i <= g.nr; ++i) {
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc.add(cr * cz * v[g.idx(i, j)]);
        }
    }
    return acc.sum * g.hr * g.hz;
}

double lp_norm(const Grid& g, const std::vector<double>& v, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    if (!(p >= 1.0))
        throw std::domain_error("lp_norm: p must be >= 1");
    Kahan acc;
    for (int i = 0; i <= g.nr; ++i) {
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc.add(cr * cz * std::pow(std::abs(v[g.idx(i, j)]), p));
        }
    }
    return std::pow(acc.sum * g.hr * g.hz, 1.0 / p);
}

double lp_norm(const VorticityField& f, double p) {
    return lp_norm(f.grid, f.w, p);
}

double moment(const VorticityField& f, MomentKind kind) {
    const Grid& g = f.grid;
    if (kind == MomentKind::mass)
        return integrate(g, f.w);
    if (kind == MomentKind::impulse) {
        Kahan acc;
        for (int i = 0; i <= g.nr; ++i) {
            double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
            double r2 = g.r(i) * g.r(i);
            for (int j = 0; j <= g.nz; ++j) {
                double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
                acc.add(cr * cz * r2 * f.w[g.idx(i, j)]);
            }
        }
        return acc.sum * g.hr * g.hz;
    }
    // centroid_z
    double mass = moment(f, MomentKind::mass);
    double l1 = lp_norm(f, 1.0);
    if (l1 == 0.0 || std::abs(mass) < 1e-14 * l1)
        throw std::domain_error("moment: centroid_z undefined, mass is degenerate "
                                "relative to the L1 norm");
    Kahan acc;
    for (int i = 0; i <= g.nr; ++i) {
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc.add(cr * cz * g.z(j) * f.w[g.idx(i, j)]);
        }
    }
    return acc.sum * g.hr * g.hz / mass;
}

double tail_mass(const VorticityField& f, TailRegion region, double rho) {
    const Grid& g = f.grid;
    if (!(rho >= g.r_min && rho <= g.r_max))
        throw std::domain_error("tail_mass: rho lies outside the grid's radial range");
    Kahan acc;
    for (int i = 0; i <= g.nr; ++i) {
        double r = g.r(i);
        double sel;
        if (r < rho)
            sel = (region == TailRegion::near_axis) ? 1.0 : 0.0;
        else if (r > rho)
            sel = (region == TailRegion::far) ? 1.0 : 0.0;
        else
            sel = 0.5;   // node exactly on the split radius
        if (sel == 0.0) continue;
        double cr = (i == 0 || i == g.nr) ? 0.5 : 1.0;
        for (int j = 0; j <= g.nz; ++j) {
            double cz = (j == 0 || j == g.nz) ? 0.5 : 1.0;
            acc.add(sel * cr * cz * std::abs(f.w[g.idx(i, j)]));
        }
    }
    return acc.sum * g.hr * g.hz;
}

bool boundary_negligible(const VorticityField& f, int margin, double frac) {
    const Grid& g = f.grid;
    double peak = max_abs(f.w);
    if (peak == 0.0) return true;
    double thresh = frac * peak;
    for (int i = 0; i <= g.nr; ++i) {
        bool edge_r = (i >= g.nr - margin + 1);
        for (int j = 0; j <= g.nz; ++j) {
            bool edge_z = (j <= margin - 1) || (j >= g.nz - margin + 1);
            if (!edge_r && !edge_z) continue;
            if (std::abs(f.w[g.idx(i, j)]) > thresh) return false;
        }
    }
    return true;
}

double VelocityField::max_speed() const {
    double m = 0.0;
    for (std::size_t k = 0; k < ur.size(); ++k)
        m = std::max(m, std::hypot(ur[k], uz[k]));
    return m;
}

double min_value(const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::min(m, x);
    return m;
}

double max_value(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sample_bilinear(const Grid& g, const std::vector<double>& v,
                       double x, double y) {
    double fi = (x - g.r_min) / g.hr;
    double fj = (y - g.z_min) / g.hz;
    if (fi < 0.0 || fj < 0.0 || fi > g.nr || fj > g.nz) return 0.0;
    int i0 = std::min(static_cast<int>(fi), g.nr - 1);
    int j0 = std::min(static_cast<int>(fj), g.nz - 1);
    double a = fi - i0, b = fj - j0;
    return (1.0 - a) * (1.0 - b) * v[g.idx(i0, j0)] +
           a * (1.0 - b) * v[g.idx(i0 + 1, j0)] +
           (1.0 - a) * b * v[g.idx(i0, j0 + 1)] +
           a * b * v[g.idx(i0 + 1, j0 + 1)];
}

} // namespace vrlab
