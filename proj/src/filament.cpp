#include "vrlab/filament.hpp"

#include <cmath>
#include <stdexcept>

#include "quadrature.hpp"

namespace vrlab {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

} // namespace

Vec3 filament_velocity(const Vec3& x, double rbar) {
    if (!(rbar > 0.0))
        throw std::domain_error("filament_velocity: rbar must be positive");
    // Scale to the unit circle.
    Vec3 p{x.x / rbar, x.y / rbar, x.z / rbar};
    double ring_dist = std::hypot(std::hypot(p.x, p.y) - 1.0, p.z);
    if (ring_dist <= 1e-9)
        throw std::domain_error("filament_velocity: point lies on the filament");

    // gamma(s) = (cos s, sin s, 0), gamma' x (p - gamma) =
    //   (cos s * p3, sin s * p3, 1 - p1 cos s - p2 sin s).
    auto denom = [&](double s) {
        double dx = p.x - std::cos(s);
        double dy = p.y - std::sin(s);
        double d2 = dx * dx + dy * dy + p.z * p.z;
        return d2 * std::sqrt(d2);
    };
    double ux = integrate_adaptive(
        [&](double s) { return std::cos(s) * p.z / denom(s); }, 0.0, two_pi,
        1e-12, 1e-10);
    double uy = integrate_adaptive(
        [&](double s) { return std::sin(s) * p.z / denom(s); }, 0.0, two_pi,
        1e-12, 1e-10);
    double uz = integrate_adaptive(
        [&](double s) { return (1.0 - p.x * std::cos(s) - p.y * std::sin(s)) / denom(s); },
        0.0, two_pi, 1e-12, 1e-10);
    double c = 1.0 / (4.0 * pi * rbar);
    return Vec3{c * ux, c * uy, c * uz};
}

AxisDistanceResult axis_distance_integral(const Vec3& x) {
    AxisDistanceResult res;
    double n2 = x.x * x.x + x.y * x.y + x.z * x.z;
    double planar2 = x.x * x.x + x.y * x.y;
    double disc = (1.0 + n2) * (1.0 + n2) - 4.0 * planar2;
    res.closed_form = two_pi * std::abs(x.z) / std::sqrt(disc);
    if (x.z == 0.0) {
        res.quadrature = 0.0;       // integrand identically zero
        res.difference = res.closed_form;
        return res;
    }
    res.quadrature = std::abs(x.z) * integrate_adaptive(
        [&](double s) {
            double dx = x.x - std::cos(s);
            double dy = x.y - std::sin(s);
            return 1.0 / (dx * dx + dy * dy + x.z * x.z);
        },
        0.0, two_pi, 1e-12, 1e-11);
    res.difference = std::abs(res.quadrature - res.closed_form);
    return res;
}

} // namespace vrlab
