#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "rotq/numerics.hpp"

using namespace rotq;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("associated Laguerre basics and series oracle") {
    CHECK(assoc_laguerre(0, 2.5, 1.7) == 1.0);
    CHECK(assoc_laguerre(1, 2.5, 1.7) == doctest::Approx(1.0 + 2.5 - 1.7).epsilon(1e-15));
    CHECK(assoc_laguerre(5, 1.0, 2.3) ==
          doctest::Approx(double(oracle::laguerre_series(5, 1.0L, 2.3L))).epsilon(1e-12));

    for (int i = 0; i < 200; ++i) {
        int p = int(oracle::uniform(0, 12.99));
        double a = oracle::uniform(0.0, 11.0);
        double x = oracle::uniform(0.0, 30.0);
        double got = assoc_laguerre(p, a, x);
        double want = double(oracle::laguerre_series(p, a, x));
        CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("Bessel J: pinned values, first zero, integral-representation oracle") {
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(1, 0.0) == 0.0);

    // first zero of J_0, located by bisection on the oracle
    long double lo = 2.0L, hi = 3.0L;
    for (int it = 0; it < 80; ++it) {
        long double mid = 0.5L * (lo + hi);
        if (oracle::bessel_j_integral(0, lo) * oracle::bessel_j_integral(0, mid) <= 0.0L)
            hi = mid;
        else
            lo = mid;
    }
    double zero = double(0.5L * (lo + hi));
    CHECK(zero == doctest::Approx(2.404825557695773).epsilon(1e-12));
    CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-9);

    CHECK_THROWS_AS(bessel_j(0, -0.5), std::domain_error);
    CHECK_THROWS_AS(bessel_j(0, 201.0), std::domain_error);

    for (int i = 0; i < 1000; ++i) {
        int n = int(oracle::uniform(0, 12.99));
        double x = oracle::uniform(0.0, 200.0);
        double want = double(oracle::bessel_j_integral(n, x));
        CHECK(bessel_j(n, x) == doctest::Approx(want).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("modified Bessel I: pinned values and series oracle") {
    CHECK(bessel_i_mod(0, 0.0) == 1.0);
    CHECK(bessel_i_mod(3, 0.0) == 0.0);
    CHECK(bessel_i_mod(1, 2.0) ==
          doctest::Approx(double(oracle::bessel_i_series(1, 2.0L))).epsilon(1e-10));
    CHECK_THROWS_AS(bessel_i_mod(0, 101.0), std::domain_error);

    for (int i = 0; i < 1000; ++i) {
        int n = int(oracle::uniform(0, 10.99));
        double x = oracle::uniform(0.0, 100.0);
        double want = double(oracle::bessel_i_series(n, x));
        CHECK(bessel_i_mod(n, x) == doctest::Approx(want).epsilon(1e-10));
    }

    // the all-orders pass must agree with single evaluations
    auto all = bessel_i_mod_all(8, 37.5);
    for (int n = 0; n <= 8; ++n)
        CHECK(all[n] == doctest::Approx(bessel_i_mod(n, 37.5)).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre: polynomial exactness and adaptive wrapper") {
    auto sq = [](double x) -> cplx { return x * x; };
    CHECK(gauss_legendre(sq, 0.0, 1.0, 2).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // 2D Gaussian over the disk r <= 6 against the closed form
    auto radial = [](double r) -> cplx { return r * std::exp(-r * r); };
    double disk = 2.0 * kPi * integrate_adaptive(radial, 0.0, 6.0, 1e-12).real();
    CHECK(disk == doctest::Approx(kPi * (1.0 - std::exp(-36.0))).epsilon(1e-10));

    // the displacement normalizer at delta = 0: (8/w0^4) \int r^3 e^{-2r^2/w0^2} = 1
    double w0 = 1.3;
    auto norm3 = [w0](double r) -> cplx { return r * r * r * std::exp(-2.0 * r * r / (w0 * w0)); };
    double val = 8.0 / std::pow(w0, 4) * integrate_adaptive(norm3, 0.0, 6.0 * w0, 1e-12).real();
    CHECK(val == doctest::Approx(1.0).epsilon(1e-10));

    auto wild = [](double x) -> cplx { return std::sin(4.0e4 * x * x); };
    CHECK_THROWS_AS(integrate_adaptive(wild, 0.0, 1.0, 1e-10, 8, 64), convergence_error);
    try {
        integrate_adaptive(wild, 0.0, 1.0, 1e-10, 8, 64);
    } catch (const convergence_error& e) {
        CHECK(std::abs(e.last_estimate - e.previous_estimate) > 1e-10);
    }
}

TEST_CASE("LG fields: normalization, |m| symmetry, orthogonality") {
    PolarGrid grid = make_grid();
    double w0 = 1.0;

    ScalarField g00{[&](double r, double ph) { return lg_field(0, 0, r, ph, w0); }};
    CHECK(overlap(g00, g00, grid, w0).real() == doctest::Approx(1.0).epsilon(1e-10));

    for (double rho : {0.1, 0.6, 1.4, 2.9})
        CHECK(lg_field(0, +1, rho, 0.0, w0).real() ==
              doctest::Approx(lg_field(0, -1, rho, 0.0, w0).real()).epsilon(1e-14));

    ScalarField g01{[&](double r, double ph) { return lg_field(0, 1, r, ph, w0); }};
    ScalarField g11{[&](double r, double ph) { return lg_field(1, 1, r, ph, w0); }};
    ScalarField g0m1{[&](double r, double ph) { return lg_field(0, -1, r, ph, w0); }};
    CHECK(std::abs(overlap(g01, g11, grid, w0)) < 1e-10);
    CHECK(std::abs(overlap(g01, g0m1, grid, w0)) < 1e-12);

    // a richer sample of pairs
    for (int p = 0; p <= 3; ++p)
        for (int p2 = 0; p2 <= 3; ++p2) {
            ScalarField a{[&, p](double r, double ph) { return lg_field(p, 2, r, ph, w0); }};
            ScalarField b{[&, p2](double r, double ph) { return lg_field(p2, 2, r, ph, w0); }};
            double want = (p == p2) ? 1.0 : 0.0;
            CHECK(overlap(a, b, grid, w0).real() == doctest::Approx(want).epsilon(1e-10));
        }

    CHECK_THROWS_AS(make_grid(16, 256, 6.0), std::domain_error);
    CHECK_THROWS_AS(make_grid(200, 32, 6.0), std::domain_error);
    CHECK_THROWS_AS(make_grid(200, 256, 2.0), std::domain_error);
}

TEST_CASE("overlap: conjugate symmetry and Parseval bound") {
    PolarGrid grid = make_grid();
    double w0 = 1.0;

    // random smooth band-limited test field
    auto coeffs = std::vector<cplx>();
    for (int i = 0; i < 6; ++i) coeffs.push_back(0.3 * oracle::random_phase_amp());
    ScalarField f{[&](double r, double ph) {
        cplx v = 0.0;
        for (int i = 0; i < 6; ++i)
            v += coeffs[i] * std::exp(-r * r * (0.7 + 0.1 * i)) * std::pow(r, i % 3) *
                 std::exp(cplx(0.0, (i - 3) * ph));
        return v;
    }};
    ScalarField g{[&](double r, double ph) {
        return std::exp(-r * r) * std::exp(cplx(0.0, 2.0 * ph)) * (r + 0.2);
    }};

    cplx ab = overlap(f, g, grid, w0);
    cplx ba = overlap(g, f, grid, w0);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-12);

    double total = overlap(f, f, grid, w0).real();
    double captured = 0.0;
    for (int m = -5; m <= 5; ++m)
        for (int p = 0; p <= 8; ++p) {
            ScalarField basis{[&](double r, double ph) { return lg_field(p, m, r, ph, w0); }};
            captured += std::norm(overlap(basis, f, grid, w0));
        }
    CHECK(captured <= total + 1e-10);
}

TEST_CASE("grid refinement stability of overlap coefficients") {
    double w0 = 1.0;
    PolarGrid g1 = make_grid(200, 256, 6.0);
    PolarGrid g2 = make_grid(400, 512, 6.0);

    ScalarField target{[&](double r, double ph) { return lg_field(0, 1, r, ph, w0); }};
    ScalarField smooth{[&](double r, double ph) {
        return lg_field(0, 1, r, ph, w0) * std::exp(cplx(0.0, 0.8 * r * std::cos(ph)));
    }};
    cplx c1 = overlap(target, smooth, g1, w0);
    cplx c2 = overlap(target, smooth, g2, w0);
    CHECK(std::abs(c1 - c2) < 1e-8);
}
