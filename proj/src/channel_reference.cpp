#include "rotq/channel_reference.hpp"

#include <cmath>

namespace rotq {

namespace {

ModeCoupling decompose_entrywise(const std::function<ScalarField(int m, int p)>& source,
                                 const BasisSpec& basis, const PolarGrid& grid) {
    ModeCoupling c(basis);
    for (int m = -basis.m_max; m <= basis.m_max; ++m)
        for (int p = 0; p <= basis.p_max; ++p) {
            ScalarField src = source(m, p);
            for (int m2 = -basis.m_max; m2 <= basis.m_max; ++m2)
                for (int p2 = 0; p2 <= basis.p_max; ++p2) {
                    ScalarField target{[=, &basis](double rho, double phi) {
                        return lg_field(p2, m2, rho, phi, basis.w0);
                    }};
                    c.entry(m, m2, p, p2) = overlap(target, src, grid, basis.w0);
                }
        }
    return c;
}

}  // namespace

ModeCoupling mask_coupling_reference(const MaskSpec& mask, const BasisSpec& basis,
                                     const PolarGrid& grid) {
    if (const auto* el = std::get_if<EllipticalScaling>(&mask)) {
        double a = el->ratio, beta = el->orientation, w0 = basis.w0;
        auto source = [=](int m, int p) {
            return ScalarField{[=](double rho, double phi) -> cplx {
                double xi = rho * std::cos(phi - beta);
                double eta = rho * std::sin(phi - beta);
                double xs = a * xi, ys = eta / a;
                return lg_field(p, m, std::hypot(xs, ys), std::atan2(ys, xs) + beta, w0);
            }};
        };
        return decompose_entrywise(source, basis, grid);
    }
    double w0 = basis.w0;
    auto source = [&mask, w0](int m, int p) {
        return ScalarField{[&mask, w0, m, p](double rho, double phi) {
            return mask_transmission(mask, rho, phi) * lg_field(p, m, rho, phi, w0);
        }};
    };
    return decompose_entrywise(source, basis, grid);
}

ModeCoupling displacement_coupling_reference(double delta, double theta_d,
                                             const BasisSpec& basis, const PolarGrid& grid) {
    double dx = delta * std::cos(theta_d), dy = delta * std::sin(theta_d);
    double w0 = basis.w0;
    auto source = [=](int m, int p) {
        return ScalarField{[=](double rho, double phi) -> cplx {
            double x = rho * std::cos(phi) - dx;
            double y = rho * std::sin(phi) - dy;
            return lg_field(p, m, std::hypot(x, y), std::atan2(y, x), w0);
        }};
    };
    return decompose_entrywise(source, basis, grid);
}

}  // namespace rotq
