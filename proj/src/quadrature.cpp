#include "quadrature.hpp"

#include <memory>
#include <stdexcept>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace vrlab {

namespace {

double call_thunk(double x, void* p) {
    return (*static_cast<const std::function<double(double)>*>(p))(x);
}

// GSL's default error handler aborts the process; disable it once and
// propagate failures as exceptions instead.
struct HandlerGuard {
    HandlerGuard() { gsl_set_error_handler_off(); }
};

} // namespace

double integrate_adaptive(const std::function<double(double)>& f,
                          double a, double b,
                          double epsabs, double epsrel) {
    static HandlerGuard guard;
    constexpr std::size_t limit = 4096;
    std::unique_ptr<gsl_integration_workspace,
                    decltype(&gsl_integration_workspace_free)>
        ws(gsl_integration_workspace_alloc(limit), gsl_integration_workspace_free);
    if (!ws)
        throw std::runtime_error("integrate_adaptive: workspace allocation failed");

    gsl_function gf;
    gf.function = &call_thunk;
    gf.params = const_cast<std::function<double(double)>*>(&f);

    double result = 0.0, abserr = 0.0;
    int status = gsl_integration_qags(&gf, a, b, epsabs, epsrel, limit,
                                      ws.get(), &result, &abserr);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw std::runtime_error(std::string("integrate_adaptive: ") +
                                 gsl_strerror(status));
    return result;
}

} // namespace vrlab
