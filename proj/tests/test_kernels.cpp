#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "vrlab/kernels.hpp"

using namespace vrlab;

namespace {
constexpr double pi = 3.14159265358979323846;
}

TEST_SUITE_BEGIN("kernels");

TEST_CASE("small-s asymptote of F") {
    // log(8/sqrt(s)) - 2 at s = 1e-6 is log(8000) - 2 = 6.987196820661973
    double asym = std::log(8.0e3) - 2.0;
    CHECK(asym == doctest::Approx(6.987196820661973).epsilon(1e-15));
    CHECK(std::abs(kernel_F(1e-6) - asym) < 2e-3);
    CHECK(std::abs(kernel_F(1e-8) - kernel_F_small_s(1e-8)) < 2e-4);
}

TEST_CASE("small-s limit of F_tilde") {
    CHECK(kernel_F_tilde(1e-8) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(kernel_F_tilde(1e-6) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("large-s asymptotes") {
    // leading order pi/(2 s^{3/2}) and 3 pi/(2 s^{3/2})
    CHECK(kernel_F(1e6) == doctest::Approx(pi / 2e9).epsilon(1e-2));
    CHECK(kernel_F_tilde(1e6) == doctest::Approx(3.0 * pi / 2e9).epsilon(1e-2));
    // the expansion route must agree with its own closed form exactly there
    CHECK(kernel_F(1e6) == doctest::Approx(kernel_F_large_s(1e6)).epsilon(1e-14));
    CHECK(kernel_F_tilde(1e6)
          == doctest::Approx(kernel_F_tilde_large_s(1e6)).epsilon(1e-14));
}

TEST_CASE("F_tilde is the log-derivative combination of F") {
    // F_tilde = -2 s F'(s), central difference at s = 1
    double h = 1e-5;
    double fd = -2.0 * 1.0 * (kernel_F(1.0 + h) - kernel_F(1.0 - h)) / (2.0 * h);
    CHECK(std::abs(kernel_F_tilde(1.0) - fd) < 1e-6);
}

TEST_CASE("quadrature-to-series seam is continuous") {
    // the jump at the switch point is the series truncation error, about
    // 3e-9 relative for both kernels
    double below_F = kernel_F(1e3 * (1.0 - 1e-9));
    double above_F = kernel_F(1e3 * (1.0 + 1e-9));
    CHECK(std::abs(below_F - above_F) <= 1e-8 * std::abs(below_F));
    double below_Ft = kernel_F_tilde(1e3 * (1.0 - 1e-9));
    double above_Ft = kernel_F_tilde(1e3 * (1.0 + 1e-9));
    CHECK(std::abs(below_Ft - above_Ft) <= 1e-8 * std::abs(below_Ft));
}

TEST_CASE("F decreases and stays positive") {
    // Pairing psi with pi/2 - psi puts the positive lobe of 1 - 2 sin^2
    // over the smaller root, so F > 0 at every s; it falls monotonically
    // from the small-s logarithm to the s^{-3/2} tail.
    double prev = kernel_F(1e-6);
    for (double s = 1e-5; s <= 1e7; s *= 10.0) {
        double cur = kernel_F(s);
        CHECK(cur < prev);
        CHECK(cur > 0.0);
        prev = cur;
    }
    for (double s = 1e-6; s <= 1e6; s *= 100.0) CHECK(kernel_F_tilde(s) > 0.0);
}

TEST_CASE("table matches direct evaluation") {
    const KernelTable& kt = default_kernel_table();
    CHECK(kt.s_lo() == doctest::Approx(1e-10));
    CHECK(kt.s_hi() == doctest::Approx(1e10));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-9.0, 9.0);
    for (int k = 0; k < 50; ++k) {
        double s = std::pow(10.0, dist(rng));
        double scale_F = std::max(1.0, std::abs(kernel_F(s)));
        CHECK(std::abs(kt.F(s) - kernel_F(s)) < 1e-8 * scale_F);
        double scale_Ft = std::max(std::abs(kernel_F_tilde(s)), 1e-30);
        CHECK(std::abs(kt.F_tilde(s) - kernel_F_tilde(s)) < 1e-6 * scale_Ft);
    }
    // outside the tabulated range the asymptotic forms take over
    CHECK(kt.F(1e-12) == doctest::Approx(kernel_F_small_s(1e-12)).epsilon(1e-12));
    CHECK(kt.F(1e12) == doctest::Approx(kernel_F_large_s(1e12)).epsilon(1e-12));
    double F, Ft;
    kt.eval(2.5, F, Ft);
    CHECK(F == doctest::Approx(kt.F(2.5)).epsilon(1e-15));
    CHECK(Ft == doctest::Approx(kt.F_tilde(2.5)).epsilon(1e-15));
}

TEST_CASE("table serialization roundtrip") {
    KernelTable kt = KernelTable::build(512);
    std::string path = "vrlab_test_table.vrkrn";
    kt.save(path);
    KernelTable back = KernelTable::load(path);
    REQUIRE(back.cells() == kt.cells());
    for (int k = 0; k <= kt.cells(); k += 37) {
        CHECK(back.s_node(k) == kt.s_node(k));
        CHECK(back.F_node(k) == kt.F_node(k));
        CHECK(back.F_tilde_node(k) == kt.F_tilde_node(k));
    }
    CHECK(back.F(3.7) == kt.F(3.7));
    std::remove(path.c_str());
}

TEST_CASE("corrupted table magic names the file") {
    KernelTable kt = KernelTable::build(512);
    std::string path = "vrlab_test_badmagic.vrkrn";
    kt.save(path);
    {
        std::fstream io(path, std::ios::in | std::ios::out | std::ios::binary);
        io.seekp(0);
        io << "XXKRN1";
    }
    bool threw = false;
    try {
        KernelTable::load(path);
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    CHECK(threw);
    std::remove(path.c_str());
}

TEST_CASE("csv dump has one row per node") {
    KernelTable kt = KernelTable::build(512);
    std::ostringstream os;
    kt.dump_csv(os);
    std::string text = os.str();
    long rows = std::count(text.begin(), text.end(), '\n');
    CHECK(rows == kt.cells() + 2);  // header line plus nodes
    CHECK(text.compare(0, 1, "s") == 0);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(kernel_F(0.0), std::domain_error);
    CHECK_THROWS_AS(kernel_F(-1.0), std::domain_error);
    CHECK_THROWS_AS(kernel_F_tilde(0.0), std::domain_error);
}

TEST_SUITE_END();
