#include "vrlab/kernels.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <gsl/gsl_sf_ellint.h>

#include "vrlab/snapshot.hpp"

namespace vrlab {

namespace {

constexpr double pi = 3.14159265358979323846;
// Above this the asymptotic expansion is good to ~3e-9 relative, while the
// elliptic route starts losing digits to cancellation growing like s^2.
constexpr double series_switch = 1e3;

} // namespace

double kernel_F_small_s(double s) {
    return std::log(8.0 / std::sqrt(s)) - 2.0;
}

double kernel_F_large_s(double s) {
    double inv = 1.0 / s;
    return pi / (2.0 * s * std::sqrt(s)) *
           (1.0 + inv * (-3.0 + inv * (75.0 / 8.0 - inv * 245.0 / 8.0)));
}

double kernel_F_tilde_large_s(double s) {
    double inv = 1.0 / s;
    return 3.0 * pi / (2.0 * s * std::sqrt(s)) *
           (1.0 + inv * (-5.0 + inv * (175.0 / 8.0 - inv * 735.0 / 8.0)));
}

// Both kernels reduce to complete elliptic integrals: with q = s/4 and
// parameter m = 1/(1+q), substituting the complement angle turns
// sin^2 + q into (1+q)(1 - m sin^2) and the standard tables give
//   F       = sqrt(m) [ (1+2q) K - 2(1+q) E ]
//   F_tilde = sqrt(m) [ (1+2q) E - 2q K ].
// K and E come from the Carlson symmetric forms so the complementary
// parameter q/(1+q) can be passed exactly; forming 1 - m from a rounded
// modulus instead costs ~5 digits near the small-s end. Below s ~ 1e-12
// the limiting forms are used; their error is O(s log s), far below
// anything downstream can resolve.

namespace {

void elliptic_KE(double q, double& K, double& E) {
    double m = 1.0 / (1.0 + q);
    double kp2 = q / (1.0 + q);
    K = gsl_sf_ellint_RF(0.0, kp2, 1.0, GSL_PREC_DOUBLE);
    E = K - (m / 3.0) * gsl_sf_ellint_RD(0.0, kp2, 1.0, GSL_PREC_DOUBLE);
}

} // namespace

double kernel_F(double s) {
    if (!(s > 0.0))
        throw std::domain_error("kernel_F: s must be positive");
    if (s >= series_switch)
        return kernel_F_large_s(s);
    if (s < 1e-12)
        return kernel_F_small_s(s);
    double q = 0.25 * s;
    double K, E;
    elliptic_KE(q, K, E);
    return ((1.0 + 2.0 * q) * K - 2.0 * (1.0 + q) * E) / std::sqrt(1.0 + q);
}

double kernel_F_tilde(double s) {
    if (!(s > 0.0))
        throw std::domain_error("kernel_F_tilde: s must be positive");
    if (s >= series_switch)
        return kernel_F_tilde_large_s(s);
    if (s < 1e-12)
        return 1.0;
    double q = 0.25 * s;
    double K, E;
    elliptic_KE(q, K, E);
    return ((1.0 + 2.0 * q) * E - 2.0 * q * K) / std::sqrt(1.0 + q);
}

KernelTable KernelTable::build(int cells) {
    if (cells < 16)
        throw std::invalid_argument("KernelTable: too few cells");
    KernelTable t;
    t.n_ = cells;
    t.s_lo_ = 1e-10;
    t.s_hi_ = 1e10;
    t.u_lo_ = std::log(t.s_lo_);
    t.du_ = (std::log(t.s_hi_) - t.u_lo_) / cells;
    t.f_.resize(cells + 1);
    t.ft_.resize(cells + 1);
    for (int k = 0; k <= cells; ++k) {
        double s = std::exp(t.u_lo_ + k * t.du_);
        t.f_[k] = kernel_F(s);
        t.ft_[k] = kernel_F_tilde(s);
    }
    return t;
}

double KernelTable::s_node(int k) const {
    return std::exp(u_lo_ + k * du_);
}

// Four-point Lagrange interpolation in u = log s, clamped at the ends.
double KernelTable::interp(const std::vector<double>& y, double s) const {
    double u = std::log(s);
    int k = static_cast<int>(std::floor((u - u_lo_) / du_));
    int k0 = k - 1;
    if (k0 < 0) k0 = 0;
    if (k0 > n_ - 3) k0 = n_ - 3;
    double x = (u - (u_lo_ + k0 * du_)) / du_;   // in node units from k0
    double x0 = x, x1 = x - 1.0, x2 = x - 2.0, x3 = x - 3.0;
    double w0 = -x1 * x2 * x3 / 6.0;
    double w1 = x0 * x2 * x3 / 2.0;
    double w2 = -x0 * x1 * x3 / 2.0;
    double w3 = x0 * x1 * x2 / 6.0;
    return w0 * y[k0] + w1 * y[k0 + 1] + w2 * y[k0 + 2] + w3 * y[k0 + 3];
}

double KernelTable::F(double s) const {
    if (s < s_lo_) return kernel_F_small_s(s);
    if (s > s_hi_) return kernel_F_large_s(s);
    return interp(f_, s);
}

double KernelTable::F_tilde(double s) const {
    if (s < s_lo_) return 1.0;
    if (s > s_hi_) return kernel_F_tilde_large_s(s);
    return interp(ft_, s);
}

void KernelTable::eval(double s, double& F_out, double& Ft_out) const {
    if (s < s_lo_) {
        F_out = kernel_F_small_s(s);
        Ft_out = 1.0;
        return;
    }
    if (s > s_hi_) {
        F_out = kernel_F_large_s(s);
        Ft_out = kernel_F_tilde_large_s(s);
        return;
    }
    // Same weight computation as interp(), shared between the two reads.
    double u = std::log(s);
    int k = static_cast<int>(std::floor((u - u_lo_) / du_));
    int k0 = k - 1;
    if (k0 < 0) k0 = 0;
    if (k0 > n_ - 3) k0 = n_ - 3;
    double x = (u - (u_lo_ + k0 * du_)) / du_;
    double x0 = x, x1 = x - 1.0, x2 = x - 2.0, x3 = x - 3.0;
    double w0 = -x1 * x2 * x3 / 6.0;
    double w1 = x0 * x2 * x3 / 2.0;
    double w2 = -x0 * x1 * x3 / 2.0;
    double w3 = x0 * x1 * x2 / 6.0;
    F_out = w0 * f_[k0] + w1 * f_[k0 + 1] + w2 * f_[k0 + 2] + w3 * f_[k0 + 3];
    Ft_out = w0 * ft_[k0] + w1 * ft_[k0 + 1] + w2 * ft_[k0 + 2] + w3 * ft_[k0 + 3];
}

void KernelTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("KernelTable::save: cannot open " + path);
    char lo[40], hi[40];
    std::snprintf(lo, sizeof lo, "%.17g", s_lo_);
    std::snprintf(hi, sizeof hi, "%.17g", s_hi_);
    out << "VRKRN1\n"
        << "cells = " << n_ << "\n"
        << "s_lo = " << lo << "\n"
        << "s_hi = " << hi << "\n"
        << "end_header\n";
    write_payload(out, f_);
    write_payload(out, ft_);
    if (!out)
        throw std::runtime_error("KernelTable::save: write failed for " + path);
}

KernelTable KernelTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("KernelTable::load: cannot open " + path);
    auto h = parse_header(in, "VRKRN1", path);
    KernelTable t;
    t.n_ = std::stoi(h.at("cells"));
    t.s_lo_ = std::stod(h.at("s_lo"));
    t.s_hi_ = std::stod(h.at("s_hi"));
    t.u_lo_ = std::log(t.s_lo_);
    t.du_ = (std::log(t.s_hi_) - t.u_lo_) / t.n_;
    t.f_.resize(t.n_ + 1);
    t.ft_.resize(t.n_ + 1);
    read_payload(in, t.f_, path);
    read_payload(in, t.ft_, path);
    return t;
}

void KernelTable::dump_csv(std::ostream& out) const {
    out << "s,F,F_tilde\n";
    char buf[128];
    for (int k = 0; k <= n_; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n",
                      s_node(k), f_[k], ft_[k]);
        out << buf;
    }
}

const KernelTable& default_kernel_table() {
    static KernelTable table = KernelTable::build();
    return table;
}

} // namespace vrlab
