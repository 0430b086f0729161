#pragma once

#include <cstddef>

namespace vrlab {

// Uniform node-centered grid on [r_min, r_max] x [z_min, z_max] with
// nr x nz cells, so (nr+1) x (nz+1) nodes. Physical half-plane grids have
// r_min = 0 and the axis along the left edge; rescaled frames and planar
// grids may carry r_min < 0. Node (i, j) sits at (r_min + i*hr, z_min + j*hz)
// and fields are stored row-major with i (the r index) outermost.
struct Grid {
    double r_min = 0.0, r_max = 0.0;
    double z_min = 0.0, z_max = 0.0;
    int nr = 0, nz = 0;
    double hr = 0.0, hz = 0.0;

    double r(int i) const { return r_min + i * hr; }
    double z(int j) const { return z_min + j * hz; }

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * (nz + 1) + j;
    }
    std::size_t node_count() const {
        return static_cast<std::size_t>(nr + 1) * (nz + 1);
    }

    bool same_layout(const Grid& o) const;
};

// Standard half-plane grid with the axis at the left edge. Throws
// std::invalid_argument on r_max <= 0, z_max <= z_min, or nr/nz < 8.
Grid build_grid(double r_max, double z_min, double z_max, int nr, int nz);

// Grid with an explicit left edge, for rescaled frames and planar domains.
// Same validation except r_max > r_min replaces r_max > 0.
Grid build_offset_grid(double r_min, double r_max, double z_min, double z_max,
                       int nr, int nz);

} // namespace vrlab
