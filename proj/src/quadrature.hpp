#pragma once

#include <functional>

namespace vrlab {

// Adaptive integration of f over [a, b] (GSL QAGS underneath). Throws
// std::runtime_error if the requested tolerance cannot be met.
double integrate_adaptive(const std::function<double(double)>& f,
                          double a, double b,
                          double epsabs = 1e-12, double epsrel = 1e-10);

} // namespace vrlab
