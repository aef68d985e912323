// Slow, independent oracles used only by the test suites. Everything here is
// deliberately brute force (extended-precision series, integral
// representations, naive quadrature) and shares no code path with the library
// implementations it checks.
#ifndef ROTQ_TEST_ORACLES_HPP
#define ROTQ_TEST_ORACLES_HPP

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

// L_p^a(x) from the explicit finite sum, evaluated in long double.
inline long double laguerre_series(int p, long double a, long double x) {
    long double sum = 0.0L;
    for (int k = 0; k <= p; ++k) {
        // (-1)^k / k! * prod_{j=k+1}^{p} (a+j) / (p-k)!
        long double c = (k % 2 == 0) ? 1.0L : -1.0L;
        for (int j = 1; j <= k; ++j) c /= j;
        for (int j = k + 1; j <= p; ++j) c *= (a + j);
        for (int j = 1; j <= p - k; ++j) c /= j;
        long double xk = 1.0L;
        for (int j = 0; j < k; ++j) xk *= x;
        sum += c * xk;
    }
    return sum;
}

// J_n(x) = (1/pi) \int_0^pi cos(n t - x sin t) dt by composite Simpson in
// long double; valid for any x in the library's supported range.
inline long double bessel_j_integral(int n, long double x) {
    const int panels = 1 << 15;
    const long double pi = 3.141592653589793238462643383279502884L;
    long double h = pi / panels;
    long double sum = 0.0L;
    auto f = [&](long double t) { return std::cos(n * t - x * std::sin(t)); };
    for (int i = 0; i < panels; ++i) {
        long double t0 = i * h;
        sum += f(t0) + 4.0L * f(t0 + 0.5L * h) + f(t0 + h);
    }
    return sum * h / 6.0L / pi;
}

// I_n(x) by its (all-positive) ascending series in long double.
inline long double bessel_i_series(int n, long double x) {
    long double half = 0.5L * x;
    long double term = 1.0L;
    for (int j = 1; j <= n; ++j) term *= half / j;
    long double sum = term;
    long double x2 = half * half;
    for (int k = 1; k <= 2000; ++k) {
        term *= x2 / (k * (long double)(n + k));
        sum += term;
        if (term < 1e-25L * sum) break;
    }
    return sum;
}

// Closed forms for the LG(0,+-1) perturbation coefficients, obtained from the
// Gaussian moments of the translated/tilted fields:
//   displacement: (1 - d^2/(2 w0^2)) e^{-d^2/(2 w0^2)}
//   tilt:         (1 - (a w0)^2/8)   e^{-(a w0)^2/8}
inline double displacement_closed_form(double delta, double w0) {
    double s = delta * delta / (2.0 * w0 * w0);
    return (1.0 - s) * std::exp(-s);
}

inline double tilt_closed_form(double alpha_w0) {
    double s = alpha_w0 * alpha_w0 / 8.0;
    return (1.0 - s) * std::exp(-s);
}

// Brute-force CHSH value for the polarization Bell pair (|RR> - |LL>)/sqrt(2)
// with Alice's frame rotated by theta, worked out directly on 4-vectors in
// the logical (H, V) basis: no mode-space machinery involved.
inline double chsh_polarization_bruteforce(double theta) {
    using C = std::complex<double>;
    using V2 = std::array<C, 2>;
    const double pi = 3.14159265358979323846;
    const double inv = 1.0 / std::sqrt(2.0);
    // |phi->_p expressed in the H/V logical basis: -i (|HV> + |VH>)/sqrt(2)
    std::array<C, 4> psi{0.0, C(0, -1) * inv, C(0, -1) * inv, 0.0};
    double c = std::cos(theta), s = std::sin(theta);
    std::array<C, 4> rot{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double r = (i == 0 && j == 0) ? c : (i == 0 && j == 1) ? -s : (i == 1 && j == 0) ? s : c;
            for (int k = 0; k < 2; ++k) rot[2 * i + k] += r * psi[2 * j + k];
        }
    double cc = std::cos(pi / 8), ss = std::sin(pi / 8);
    std::array<std::array<V2, 2>, 2> alice{{{V2{1.0, 0.0}, V2{0.0, 1.0}},
                                            {V2{inv, inv}, V2{inv, -inv}}}};
    std::array<std::array<V2, 2>, 2> bob{{{V2{cc, ss}, V2{-ss, cc}}, {V2{ss, cc}, V2{-cc, ss}}}};
    double e[2][2];
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double v = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int bo = 0; bo < 2; ++bo) {
                    C amp = 0.0;
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j)
                            amp += std::conj(alice[x][a][i] * bob[y][bo][j]) * rot[2 * i + j];
                    v += ((a + bo) % 2 == 0 ? 1.0 : -1.0) * std::norm(amp);
                }
            e[x][y] = v;
        }
    return std::abs(e[0][0] - e[1][0] - e[0][1] - e[1][1]);  // labels flipped on x=1, y=1
}

// Deterministic random helpers.
inline std::mt19937& rng() {
    static std::mt19937 gen(0x5eed1234u);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline std::complex<double> random_phase_amp() {
    double re = std::normal_distribution<double>(0.0, 1.0)(rng());
    double im = std::normal_distribution<double>(0.0, 1.0)(rng());
    return {re, im};
}

}  // namespace oracle

#endif
