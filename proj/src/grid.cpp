#include "vrlab/grid.hpp"
#include "vrlab/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vrlab {

void PhysicalParams::validate() const {
    if (!(nu > 0.0))
        throw std::invalid_argument("physical params: nu must be positive");
    if (!(rbar > 0.0))
        throw std::invalid_argument("physical params: rbar must be positive");
    if (!std::isfinite(gamma_circ) || !std::isfinite(zbar))
        throw std::invalid_argument("physical params: non-finite value");
}

bool Grid::same_layout(const Grid& o) const {
    return nr == o.nr && nz == o.nz &&
           r_min == o.r_min && r_max == o.r_max &&
           z_min == o.z_min && z_max == o.z_max;
}

Grid build_offset_grid(double r_min, double r_max, double z_min, double z_max,
                       int nr, int nz) {
    if (!(r_max > r_min))
        throw std::invalid_argument("build_grid: r_max must exceed r_min");
    if (!(z_max > z_min))
        throw std::invalid_argument("build_grid: z_max must exceed z_min");
    if (nr < 8 || nz < 8)
        throw std::invalid_argument("build_grid: need at least 8 cells per direction, got " +
                                    std::to_string(nr) + "x" + std::to_string(nz));
    Grid g;
    g.r_min = r_min;
    g.r_max = r_max;
    g.z_min = z_min;
    g.z_max = z_max;
    g.nr = nr;
    g.nz = nz;
    g.hr = (r_max - r_min) / nr;
    g.hz = (z_max - z_min) / nz;
    return g;
}

Grid build_grid(double r_max, double z_min, double z_max, int nr, int nz) {
    if (!(r_max > 0.0))
        throw std::invalid_argument("build_grid: r_max must be positive");
    return build_offset_grid(0.0, r_max, z_min, z_max, nr, nz);
}

} // namespace vrlab
