// Production kernels for building coupling tensors. The azimuthal dependence
// of every integrand is a finite harmonic comb, so each tensor entry reduces
// to a radial quadrature against per-harmonic azimuthal integrals T_k(rho).
// Aperture and knife-edge masks get their T_k in closed form over the
// transmitting arcs, with the radial rule split at the geometric breakpoints;
// smooth screens use the periodic trapezoid. Coordinate remaps (displacement,
// elliptical scaling) go through a per-source-mode azimuthal DFT instead.
// OpenMP parallelizes over independent output blocks.

#include <algorithm>
#include <cmath>

#include "rotq/channel.hpp"

namespace rotq {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct RadialRule {
    std::vector<double> rho;
    std::vector<double> w;  // includes the rho area factor
};

// Composite Gauss-Legendre rule on [0, r_max*w0] split at the breakpoints.
// Arc widths behave like sqrt(distance) at the breakpoints, so segments of a
// split rule are mapped through r = lo + (up-lo)(1-cos(pi t))/2, which turns
// those square roots into analytic functions of t.
RadialRule radial_rule(const PolarGrid& grid, double w0, std::vector<double> breakpoints) {
    double hi = grid.r_max * w0;
    std::vector<double> cuts{0.0, hi};
    for (double b : breakpoints)
        if (b > 1e-12 * w0 && b < hi - 1e-12 * w0) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double a, double b) { return std::abs(a - b) < 1e-12 * w0; }),
               cuts.end());
    bool edged = cuts.size() > 2;

    RadialRule out;
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
        double lo = cuts[s], up = cuts[s + 1];
        int n = std::max(24, int(std::lround(grid.n_radial * (up - lo) / hi)));
        const GaussLegendreRule& rule = gauss_legendre_rule(n);
        for (int i = 0; i < n; ++i) {
            double t = 0.5 * (rule.x[i] + 1.0);  // node on [0, 1]
            if (edged) {
                double sfac = 0.5 * (1.0 - std::cos(kPi * t));
                double r = lo + (up - lo) * sfac;
                out.rho.push_back(r);
                out.w.push_back(0.5 * rule.w[i] * (up - lo) * 0.5 * kPi * std::sin(kPi * t) * r);
            } else {
                double r = lo + (up - lo) * t;
                out.rho.push_back(r);
                out.w.push_back(0.5 * (up - lo) * rule.w[i] * r);
            }
        }
    }
    return out;
}

// Radial profiles R_{p,|m|} tabulated on the rule nodes: radial[a][p*n + i].
std::vector<std::vector<double>> tabulate_radials(const BasisSpec& basis,
                                                  const std::vector<double>& rho) {
    int n = int(rho.size());
    std::vector<std::vector<double>> radial(basis.m_max + 1);
    for (int a = 0; a <= basis.m_max; ++a) {
        radial[a].resize(size_t(basis.p_max + 1) * n);
        for (int p = 0; p <= basis.p_max; ++p)
            for (int i = 0; i < n; ++i)
                radial[a][size_t(p) * n + i] = lg_radial(p, a, rho[i], basis.w0);
    }
    return radial;
}

// Adds the closed-form contribution of the arc [center-half, center+half] to
// T_k for all k in [-K, K]; out is indexed k + K.
void add_arc(std::vector<cplx>& out, int K, double center, double half) {
    for (int k = -K; k <= K; ++k) {
        if (k == 0) {
            out[K] += 2.0 * half;
        } else {
            out[k + K] += std::exp(cplx(0.0, k * center)) * (2.0 * std::sin(k * half) / k);
        }
    }
}

// T_k(rho) = \int t(rho,phi) e^{i k phi} dphi for one radial node.
void mask_harmonics(const MaskSpec& mask, double rho, int K, int n_phi, std::vector<cplx>& out) {
    std::fill(out.begin(), out.end(), cplx(0.0));
    if (const auto* ap = std::get_if<CircularAperture>(&mask)) {
        double d = std::hypot(ap->offset_x, ap->offset_y);
        if (d < 1e-15) {
            if (rho <= ap->radius) out[K] = 2.0 * kPi;
            return;
        }
        double t = (rho * rho + d * d - ap->radius * ap->radius) / (2.0 * rho * d);
        if (t >= 1.0) return;
        if (t <= -1.0) {
            out[K] = 2.0 * kPi;
            return;
        }
        add_arc(out, K, std::atan2(ap->offset_y, ap->offset_x), std::acos(t));
        return;
    }
    if (const auto* kn = std::get_if<KnifeEdge>(&mask)) {
        double t = kn->edge_position / rho;
        if (t >= 1.0) return;
        if (t <= -1.0) {
            out[K] = 2.0 * kPi;
            return;
        }
        add_arc(out, K, kn->orientation, std::acos(t));
        return;
    }
    // smooth screens: periodic trapezoid, spectrally accurate
    double dphi = 2.0 * kPi / n_phi;
    for (int j = 0; j < n_phi; ++j) {
        double phi = dphi * j;
        cplx tv = mask_transmission(mask, rho, phi);
        for (int k = -K; k <= K; ++k) out[k + K] += tv * std::exp(cplx(0.0, k * phi)) * dphi;
    }
}

std::vector<double> mask_breakpoints(const MaskSpec& mask) {
    if (const auto* ap = std::get_if<CircularAperture>(&mask)) {
        double d = std::hypot(ap->offset_x, ap->offset_y);
        return {std::abs(ap->radius - d), ap->radius + d};
    }
    if (const auto* kn = std::get_if<KnifeEdge>(&mask)) return {std::abs(kn->edge_position)};
    return {};
}

// Shared assembly for any transformation whose target-side azimuthal content
// has been collapsed to per-node harmonics.
ModeCoupling assemble_multiplicative(const MaskSpec& mask, const BasisSpec& basis,
                                     const PolarGrid& grid) {
    RadialRule rule = radial_rule(grid, basis.w0, mask_breakpoints(mask));
    int n = int(rule.rho.size());
    int K = 2 * basis.m_max;
    auto radial = tabulate_radials(basis, rule.rho);

    // T_k at every node
    std::vector<cplx> tk(size_t(n) * (2 * K + 1));
#pragma omp parallel
    {
        std::vector<cplx> row(2 * K + 1);
#pragma omp for
        for (int i = 0; i < n; ++i) {
            mask_harmonics(mask, rule.rho[i], K, grid.n_azimuthal, row);
            std::copy(row.begin(), row.end(), tk.begin() + size_t(i) * (2 * K + 1));
        }
    }

    ModeCoupling c(basis);
    int np = basis.p_max + 1;
    int nm = basis.n_m();
    int pairs = nm * nm;
#pragma omp parallel for
    for (int pair = 0; pair < pairs; ++pair) {
        int m = pair / nm - basis.m_max;
        int m2 = pair % nm - basis.m_max;
        int k = m - m2;
        const double* ra = radial[std::abs(m)].data();
        const double* rb = radial[std::abs(m2)].data();
        for (int p = 0; p < np; ++p)
            for (int p2 = 0; p2 < np; ++p2) {
                cplx acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += rule.w[i] * ra[size_t(p) * n + i] * rb[size_t(p2) * n + i] *
                           tk[size_t(i) * (2 * K + 1) + (k + K)];
                c.entry(m, m2, p, p2) = acc;
            }
    }
    return c;
}

// Decomposes an arbitrary transformed source field onto the basis, one source
// mode at a time: azimuthal DFT per radial node, then radial quadrature.
ModeCoupling assemble_remap(const std::function<cplx(int m, int p, double rho, double phi)>& source,
                            const BasisSpec& basis, const PolarGrid& grid) {
    RadialRule rule = radial_rule(grid, basis.w0, {});
    int n = int(rule.rho.size());
    auto radial = tabulate_radials(basis, rule.rho);
    int np = basis.p_max + 1;
    int nm = basis.n_m();
    int n_phi = grid.n_azimuthal;
    double dphi = 2.0 * kPi / n_phi;

    // cis[m'][j] = e^{-i m' phi_j} for the target projection
    std::vector<std::vector<cplx>> cis(nm, std::vector<cplx>(n_phi));
    for (int mi = 0; mi < nm; ++mi)
        for (int j = 0; j < n_phi; ++j)
            cis[mi][j] = std::exp(cplx(0.0, -(mi - basis.m_max) * dphi * j));

    ModeCoupling c(basis);
    int sources = nm * np;
#pragma omp parallel
    {
        std::vector<cplx> ring(n_phi);
        std::vector<cplx> g(size_t(n) * nm);
#pragma omp for
        for (int src = 0; src < sources; ++src) {
            int m = src / np - basis.m_max;
            int p = src % np;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n_phi; ++j) ring[j] = source(m, p, rule.rho[i], dphi * j);
                for (int mi = 0; mi < nm; ++mi) {
                    cplx acc = 0.0;
                    for (int j = 0; j < n_phi; ++j) acc += ring[j] * cis[mi][j];
                    g[size_t(i) * nm + mi] = acc * dphi;
                }
            }
            for (int mi = 0; mi < nm; ++mi) {
                int m2 = mi - basis.m_max;
                const double* rb = radial[std::abs(m2)].data();
                for (int p2 = 0; p2 < np; ++p2) {
                    cplx acc = 0.0;
                    for (int i = 0; i < n; ++i)
                        acc += rule.w[i] * rb[size_t(p2) * n + i] * g[size_t(i) * nm + mi];
                    c.entry(m, m2, p, p2) = acc;
                }
            }
        }
    }
    return c;
}

}  // namespace

ModeCoupling mask_coupling(const MaskSpec& mask, const BasisSpec& basis, const PolarGrid& grid) {
    if (const auto* el = std::get_if<EllipticalScaling>(&mask)) {
        if (!(el->ratio > 0.0)) throw std::domain_error("mask_coupling: elliptical ratio must be > 0");
        double a = el->ratio, beta = el->orientation, w0 = basis.w0;
        auto source = [a, beta, w0](int m, int p, double rho, double phi) -> cplx {
            double xi = rho * std::cos(phi - beta);
            double eta = rho * std::sin(phi - beta);
            double xs = a * xi, ys = eta / a;
            double rs = std::hypot(xs, ys);
            double ps = std::atan2(ys, xs) + beta;
            return lg_field(p, m, rs, ps, w0);
        };
        return assemble_remap(source, basis, grid);
    }
    return assemble_multiplicative(mask, basis, grid);
}

ModeCoupling displacement_coupling(double delta, double theta_d, const BasisSpec& basis,
                                   const PolarGrid& grid) {
    if (delta < 0.0) throw std::domain_error("displacement_coupling: delta must be >= 0");
    double dx = delta * std::cos(theta_d), dy = delta * std::sin(theta_d);
    double w0 = basis.w0;
    auto source = [dx, dy, w0](int m, int p, double rho, double phi) -> cplx {
        double x = rho * std::cos(phi) - dx;
        double y = rho * std::sin(phi) - dy;
        return lg_field(p, m, std::hypot(x, y), std::atan2(y, x), w0);
    };
    return assemble_remap(source, basis, grid);
}

}  // namespace rotq
