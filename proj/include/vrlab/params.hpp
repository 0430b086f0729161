#pragma once

#include <cmath>

namespace vrlab {

// Physical constants of a run: viscosity, circulation, and the ring's
// nominal center (rbar, zbar) in the meridional half-plane.
struct PhysicalParams {
    double nu = 1.0;
    double gamma_circ = 1.0;   // circulation, may be zero or negative
    double rbar = 1.0;
    double zbar = 0.0;

    double gamma() const { return gamma_circ / nu; }

    // Core-to-ring aspect ratio at time t.
    double eps(double t) const { return std::sqrt(nu * t) / rbar; }

    // Time at which eps reaches the given value.
    double time_of_eps(double e) const { return e * e * rbar * rbar / nu; }

    void validate() const;     // throws std::invalid_argument
};

} // namespace vrlab
