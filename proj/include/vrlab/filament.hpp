#pragma once

namespace vrlab {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

// Velocity induced by a unit-circulation circular filament of radius rbar in
// the x3 = 0 plane, by adaptive quadrature of the line integral. Points
// closer than 1e-9 * rbar to the filament throw std::domain_error. General
// radii reduce to the unit circle through U(x) = (1/rbar) U_unit(x/rbar).
Vec3 filament_velocity(const Vec3& x, double rbar = 1.0);

struct AxisDistanceResult {
    double quadrature = 0.0;
    double closed_form = 0.0;
    double difference = 0.0;
};

// Line integral of |x3| / |x - gamma(s)|^2 around the unit circle, returned
// together with its closed form 2 pi |x3| / sqrt((1+|x|^2)^2 - 4(x1^2+x2^2))
// so callers can see the quadrature agree. Bounded by sqrt(2) pi.
AxisDistanceResult axis_distance_integral(const Vec3& x);

} // namespace vrlab
