#ifndef ROTQ_NUMERICS_HPP
#define ROTQ_NUMERICS_HPP

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotq {

using cplx = std::complex<double>;

/// Raised when an adaptive quadrature fails to settle below its tolerance
/// before hitting the node cap. Carries the last two estimates so the caller
/// can report how far apart they were.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, cplx previous, cplx last)
        : std::runtime_error(what), previous_estimate(previous), last_estimate(last) {}
    cplx previous_estimate;
    cplx last_estimate;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Generalized Laguerre polynomial L_p^a(x), stable three-term recurrence.
double assoc_laguerre(int p, double a, double x);

// Bessel function of the first kind J_n(x) for n >= 0, 0 <= x <= 200.
// Ascending series for small arguments, downward Miller recurrence otherwise;
// accurate to ~1e-12 over the supported range.
double bessel_j(int n, double x);

// All orders J_0..J_{n_max}(x) in one downward pass (cheaper than repeated
// bessel_j calls inside the combined-perturbation sums).
std::vector<double> bessel_j_all(int n_max, double x);

// Modified Bessel function of the first kind I_n(x), n >= 0, 0 <= x <= 100.
double bessel_i_mod(int n, double x);
std::vector<double> bessel_i_mod_all(int n_max, double x);

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

struct GaussLegendreRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Nodes/weights by Newton iteration on the Legendre recurrence; cached per n.
const GaussLegendreRule& gauss_legendre_rule(int n);

// Fixed-order estimate of \int_lo^hi f.
cplx gauss_legendre(const std::function<cplx(double)>& f, double lo, double hi, int n);

// Doubles the order until two successive estimates agree within tol (absolute,
// with a relative fallback for large values). Throws convergence_error at the cap.
cplx integrate_adaptive(const std::function<cplx(double)>& f, double lo, double hi,
                        double tol = 1e-10, int n0 = 16, int n_cap = 4096);

// ---------------------------------------------------------------------------
// Polar grid, fields, overlap integrals
// ---------------------------------------------------------------------------

// Discretization of the transverse plane at the waist: Gauss-Legendre radially
// on [0, r_max*w0], equispaced azimuthal nodes (trapezoid rule, spectrally
// accurate for the band-limited e^{i m phi} integrands that appear here).
struct PolarGrid {
    int n_radial = 200;
    int n_azimuthal = 256;
    double r_max = 6.0;  // in units of w0
};

PolarGrid make_grid(int n_radial = 200, int n_azimuthal = 256, double r_max = 6.0);

// A complex field amplitude over the waist plane, evaluable pointwise.
struct ScalarField {
    std::function<cplx(double rho, double phi)> f;
    cplx operator()(double rho, double phi) const { return f(rho, phi); }
};

// Radial part R_{p,|m|}(rho) of a normalized Laguerre-Gauss mode, scaled so
// that the full field R(rho) e^{i m phi} has unit L2 norm.
double lg_radial(int p, int abs_m, double rho, double w0);

// Normalized LG_{p,m} amplitude at the waist plane.
cplx lg_field(int p, int m, double rho, double phi, double w0);

// <a|b> = \int conj(a) b rho drho dphi over the grid.
cplx overlap(const ScalarField& a, const ScalarField& b, const PolarGrid& grid, double w0);

}  // namespace rotq

#endif
