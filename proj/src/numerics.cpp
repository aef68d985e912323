#include "rotq/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace rotq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double assoc_laguerre(int p, double a, double x) {
    if (p < 0) throw std::domain_error("assoc_laguerre: p must be >= 0");
    if (p == 0) return 1.0;
    double lm1 = 1.0;            // L_0
    double l = 1.0 + a - x;      // L_1
    for (int k = 1; k < p; ++k) {
        double lp1 = ((2.0 * k + 1.0 + a - x) * l - (k + a) * lm1) / (k + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

// ---------------------------------------------------------------------------
// Bessel J
// ---------------------------------------------------------------------------

namespace {

// Ascending series, adequate for small arguments where no cancellation occurs.
double bessel_j_series(int n, double x) {
    double half = 0.5 * x;
    double term = 1.0;
    for (int j = 1; j <= n; ++j) term *= half / j;  // (x/2)^n / n!
    double sum = term;
    double x2 = -half * half;
    for (int k = 1; k <= 60; ++k) {
        term *= x2 / (k * double(n + k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
    }
    return sum;
}

// Downward Miller recurrence normalized with J_0 + 2*sum_{k even} J_k = 1.
// Fills orders 0..n_max.
std::vector<double> bessel_j_miller(int n_max, double x) {
    int start = n_max + int(x) + 6 * int(std::cbrt(x + 1.0)) + 40;
    if (start % 2) ++start;
    std::vector<double> out(n_max + 1, 0.0);
    double jp1 = 0.0, j = 1e-300;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        double jm1 = (2.0 * k / x) * j - jp1;
        jp1 = j;
        j = jm1;
        if (k - 1 <= n_max) out[k - 1] = j;
        if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? j : 2.0 * j;
        if (std::abs(j) > 1e250) {  // rescale to avoid overflow
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for (double& v : out) v *= 1e-250;
        }
    }
    for (double& v : out) v /= norm;
    return out;
}

}  // namespace

std::vector<double> bessel_j_all(int n_max, double x) {
    if (n_max < 0) throw std::domain_error("bessel_j: order must be >= 0");
    if (x < 0.0 || x > 200.0) throw std::domain_error("bessel_j: argument outside [0, 200]");
    if (x == 0.0) {
        std::vector<double> out(n_max + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    if (x < 2.0) {
        std::vector<double> out(n_max + 1);
        for (int n = 0; n <= n_max; ++n) out[n] = bessel_j_series(n, x);
        return out;
    }
    return bessel_j_miller(n_max, x);
}

double bessel_j(int n, double x) {
    return bessel_j_all(n, x)[n];
}

// ---------------------------------------------------------------------------
// Modified Bessel I
// ---------------------------------------------------------------------------

namespace {

double bessel_i_series(int n, double x) {
    double half = 0.5 * x;
    double term = 1.0;
    for (int j = 1; j <= n; ++j) term *= half / j;
    double sum = term;
    double x2 = half * half;
    for (int k = 1; k <= 500; ++k) {
        term *= x2 / (k * double(n + k));
        sum += term;
        if (term < 1e-18 * sum + 1e-300) break;
    }
    return sum;
}

}  // namespace

std::vector<double> bessel_i_mod_all(int n_max, double x) {
    if (n_max < 0) throw std::domain_error("bessel_i_mod: order must be >= 0");
    if (x < 0.0 || x > 100.0) throw std::domain_error("bessel_i_mod: argument outside [0, 100]");
    std::vector<double> out(n_max + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (x < 20.0) {
        for (int n = 0; n <= n_max; ++n) out[n] = bessel_i_series(n, x);
        return out;
    }
    // Downward recurrence I_{k-1} = I_{k+1} + (2k/x) I_k, normalized with
    // I_0 + 2*sum I_k = e^x; intermediate values rescaled to stay in range.
    int start = n_max + int(x / 2) + 40;
    double ip1 = 0.0, i = 1e-30, norm = 0.0;
    for (int k = start; k >= 1; --k) {
        double im1 = ip1 + (2.0 * k / x) * i;
        ip1 = i;
        i = im1;
        if (k - 1 <= n_max) out[k - 1] = i;
        norm += (k - 1 == 0) ? i : 2.0 * i;
        if (i > 1e200) {
            i *= 1e-200;
            ip1 *= 1e-200;
            norm *= 1e-200;
            for (double& v : out) v *= 1e-200;
        }
    }
    // pull the dynamic range together before dividing out the sum rule
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, v);
    if (peak > 0.0) {
        for (double& v : out) v /= peak;
        norm /= peak;
    }
    double scale = std::exp(x) / norm;
    for (double& v : out) v *= scale;
    return out;
}

double bessel_i_mod(int n, double x) {
    if (n < 0) throw std::domain_error("bessel_i_mod: order must be >= 0");
    if (x < 0.0 || x > 100.0) throw std::domain_error("bessel_i_mod: argument outside [0, 100]");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x < 20.0) return bessel_i_series(n, x);
    return bessel_i_mod_all(n, x)[n];
}

// ---------------------------------------------------------------------------
// Gauss-Legendre
// ---------------------------------------------------------------------------

const GaussLegendreRule& gauss_legendre_rule(int n) {
    if (n < 1) throw std::domain_error("gauss_legendre: order must be >= 1");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double z1, pp;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::abs(z - z1) > 1e-15);
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

cplx gauss_legendre(const std::function<cplx(double)>& f, double lo, double hi, int n) {
    if (n < 2) throw std::domain_error("gauss_legendre: need n >= 2");
    const GaussLegendreRule& rule = gauss_legendre_rule(n);
    double mid = 0.5 * (hi + lo);
    double halfw = 0.5 * (hi - lo);
    cplx sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.w[i] * f(mid + halfw * rule.x[i]);
    return halfw * sum;
}

cplx integrate_adaptive(const std::function<cplx(double)>& f, double lo, double hi,
                        double tol, int n0, int n_cap) {
    cplx prev = gauss_legendre(f, lo, hi, n0);
    int n = 2 * n0;
    while (true) {
        cplx cur = gauss_legendre(f, lo, hi, n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        if (2 * n > n_cap)
            throw convergence_error("integrate_adaptive: no convergence to tol=" +
                                        std::to_string(tol) + " within " + std::to_string(n_cap) +
                                        " nodes",
                                    prev, cur);
        prev = cur;
        n *= 2;
    }
}

// ---------------------------------------------------------------------------
// Fields and overlaps
// ---------------------------------------------------------------------------

PolarGrid make_grid(int n_radial, int n_azimuthal, double r_max) {
    if (n_radial < 32) throw std::domain_error("PolarGrid: n_radial must be >= 32");
    if (n_azimuthal < 64) throw std::domain_error("PolarGrid: n_azimuthal must be >= 64");
    if (r_max < 4.0) throw std::domain_error("PolarGrid: r_max must be >= 4");
    return PolarGrid{n_radial, n_azimuthal, r_max};
}

double lg_radial(int p, int abs_m, double rho, double w0) {
    if (p < 0 || abs_m < 0) throw std::domain_error("lg_radial: indices must be >= 0");
    // sqrt(p!/(p+|m|)!) accumulated as a product to avoid factorial overflow
    double ratio = 1.0;
    for (int j = 1; j <= abs_m; ++j) ratio /= (p + j);
    double norm = std::sqrt(2.0 * ratio / kPi) / w0;
    double u = std::sqrt(2.0) * rho / w0;
    double arg = 2.0 * rho * rho / (w0 * w0);
    return norm * std::pow(u, abs_m) * assoc_laguerre(p, abs_m, arg) * std::exp(-0.5 * arg);
}

cplx lg_field(int p, int m, double rho, double phi, double w0) {
    double r = lg_radial(p, std::abs(m), rho, w0);
    return r * std::exp(cplx(0.0, m * phi));
}

cplx overlap(const ScalarField& a, const ScalarField& b, const PolarGrid& grid, double w0) {
    const GaussLegendreRule& rule = gauss_legendre_rule(grid.n_radial);
    double hi = grid.r_max * w0;
    double dphi = 2.0 * kPi / grid.n_azimuthal;
    cplx total = 0.0;
    for (int i = 0; i < grid.n_radial; ++i) {
        double rho = 0.5 * hi * (rule.x[i] + 1.0);
        double wr = 0.5 * hi * rule.w[i] * rho;
        cplx ring = 0.0;
        for (int j = 0; j < grid.n_azimuthal; ++j) {
            double phi = dphi * j;
            ring += std::conj(a(rho, phi)) * b(rho, phi);
        }
        total += wr * ring * dphi;
    }
    return total;
}

}  // namespace rotq
