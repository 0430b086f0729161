#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vrlab {

// Angular kernels of the axisymmetric velocity law, as functions of the
// squared normalized separation s. F is the stream-function kernel with
// F(s) ~ log(8/sqrt(s)) - 2 for small s and pi/(2 s^{3/2}) for large s.
// F_tilde = -2 s F'(s) drives the velocity components and tends to 1 at
// small s, 3 pi/(2 s^{3/2}) at large s. Both are evaluated by adaptive
// quadrature, switching to a 1/s expansion above s = 1e3 where the
// quadrature loses the leading digits to cancellation.
double kernel_F(double s);
double kernel_F_tilde(double s);

// Closed-form limits, exposed for range clamping and cross-checks.
double kernel_F_small_s(double s);    // log(8/sqrt(s)) - 2
double kernel_F_large_s(double s);    // expansion around pi/(2 s^{3/2})
double kernel_F_tilde_large_s(double s);

// Tabulated kernels on log-spaced nodes over [1e-10, 1e10] with cubic
// interpolation in log s. Outside the range the asymptotic forms are used.
class KernelTable {
public:
    static KernelTable build(int cells = 4096);

    double F(double s) const;
    double F_tilde(double s) const;
    void eval(double s, double& F_out, double& Ft_out) const;  // one lookup

    int cells() const { return n_; }
    double s_node(int k) const;
    double F_node(int k) const { return f_[k]; }
    double F_tilde_node(int k) const { return ft_[k]; }
    double s_lo() const { return s_lo_; }
    double s_hi() const { return s_hi_; }

    // "VRKRN1" structured-text header plus float64 LE node values.
    void save(const std::string& path) const;
    static KernelTable load(const std::string& path);

    // CSV rows "s,F,F_tilde" at the table nodes.
    void dump_csv(std::ostream& out) const;

private:
    int n_ = 0;
    double s_lo_ = 0.0, s_hi_ = 0.0;
    double u_lo_ = 0.0, du_ = 0.0;     // log-space origin and spacing
    std::vector<double> f_, ft_;

    double interp(const std::vector<double>& y, double s) const;
};

// Process-wide table built on first use; the direct summation routines
// default to it so callers do not rebuild 8k quadratures per call site.
const KernelTable& default_kernel_table();

} // namespace vrlab
