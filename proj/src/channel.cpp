#include "rotq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rotq/csvfmt.hpp"

namespace rotq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// Couplings
// ---------------------------------------------------------------------------

ModeCoupling identity_coupling(const BasisSpec& basis) {
    ModeCoupling c(basis);
    int d = basis.spatial_dim();
    for (int i = 0; i < d; ++i) c.mat[size_t(i) * d + i] = 1.0;
    return c;
}

ModeCoupling efficiency_coupling(double power_factor, const BasisSpec& basis) {
    if (power_factor < 0.0 || power_factor > 1.0)
        throw std::domain_error("efficiency_coupling: power factor must lie in [0, 1]");
    ModeCoupling c = identity_coupling(basis);
    double f = std::sqrt(power_factor);
    for (cplx& v : c.mat) v *= f;
    return c;
}

ModeCoupling propagation_coupling(double zeta, const BasisSpec& basis) {
    ModeCoupling c(basis);
    for (int m = -basis.m_max; m <= basis.m_max; ++m)
        for (int p = 0; p <= basis.p_max; ++p)
            c.entry(m, m, p, p) = std::exp(cplx(0.0, -(2.0 * p + std::abs(m) + 1.0) * zeta));
    return c;
}

ModeCoupling compose(const ModeCoupling& second, const ModeCoupling& first) {
    if (!(second.basis == first.basis)) throw std::invalid_argument("compose: basis mismatch");
    if (second.pol_action != PolAction::identity || first.pol_action != PolAction::identity)
        throw std::invalid_argument("compose: only identity pol_action couplings compose as matrices");
    ModeCoupling out(first.basis);
    int d = first.basis.spatial_dim();
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            cplx s = second.mat[size_t(i) * d + k];
            if (s == cplx(0.0)) continue;
            for (int j = 0; j < d; ++j) out.mat[size_t(i) * d + j] += s * first.mat[size_t(k) * d + j];
        }
    return out;
}

SpinOrbitState apply_coupling(const SpinOrbitState& s, const ModeCoupling& c) {
    if (!(s.basis == c.basis)) throw std::invalid_argument("apply_coupling: basis mismatch");
    const BasisSpec& b = s.basis;
    int d = b.spatial_dim();
    SpinOrbitState out(b);

    if (c.pol_action == PolAction::identity) {
        for (Pol pol : {Pol::L, Pol::R}) {
            int base = static_cast<int>(pol) * d;
            for (int i = 0; i < d; ++i) {
                cplx acc = 0.0;
                const cplx* row = &c.mat[size_t(i) * d];
                for (int j = 0; j < d; ++j) acc += row[j] * s.amp[base + j];
                out.amp[base + i] = acc;
            }
        }
        return out;
    }

    // q-plate branch: L inputs shift m -> m+1 and land in R; R inputs shift
    // m -> m-1 and land in L. Components shifted past m_max are dropped.
    for (int m = -b.m_max; m <= b.m_max; ++m) {
        for (int p = 0; p <= b.p_max; ++p) {
            cplx al = s.at(Pol::L, m, p);
            if (al != cplx(0.0) && m + 1 <= b.m_max)
                for (int p2 = 0; p2 <= b.p_max; ++p2)
                    out.at(Pol::R, m + 1, p2) += c.entry(m, m + 1, p, p2) * al;
            cplx ar = s.at(Pol::R, m, p);
            if (ar != cplx(0.0) && m - 1 >= -b.m_max)
                for (int p2 = 0; p2 <= b.p_max; ++p2)
                    out.at(Pol::L, m - 1, p2) += c.entry(m, m - 1, p, p2) * ar;
        }
    }
    return out;
}

InvarianceReport check_invariance(const ModeCoupling& c, double tol) {
    if (c.basis.m_max < 1)
        throw std::invalid_argument("check_invariance: coupling must include the m = +-1 blocks");
    double max_mag = 0.0;
    for (const cplx& v : c.mat) max_mag = std::max(max_mag, std::abs(v));
    double dev = 0.0;
    for (int p = 0; p <= c.basis.p_max; ++p)
        for (int p2 = 0; p2 <= c.basis.p_max; ++p2)
            dev = std::max(dev, std::abs(c.entry(-1, -1, p, p2) - c.entry(+1, +1, p, p2)));
    InvarianceReport rep;
    rep.max_dev = dev / std::max(1.0, max_mag);
    rep.holds = rep.max_dev <= tol;
    return rep;
}

double transmitted_fraction(const ModeCoupling& c, const SpinOrbitState& probe) {
    double in = probe.norm2();
    if (in <= 0.0) throw std::invalid_argument("transmitted_fraction: zero probe");
    return apply_coupling(probe, c).norm2() / in;
}

void write_coupling_csv(std::ostream& os, const ModeCoupling& c) {
    os << "m,m_prime,p,p_prime,re,im\n";
    const BasisSpec& b = c.basis;
    for (int m = -b.m_max; m <= b.m_max; ++m)
        for (int m2 = -b.m_max; m2 <= b.m_max; ++m2)
            for (int p = 0; p <= b.p_max; ++p)
                for (int p2 = 0; p2 <= b.p_max; ++p2) {
                    const cplx& v = c.entry(m, m2, p, p2);
                    os << m << ',' << m2 << ',' << p << ',' << p2 << ','
                       << fmt_sig12(v.real()) << ',' << fmt_sig12(v.imag()) << '\n';
                }
}

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

cplx mask_transmission(const MaskSpec& mask, double rho, double phi) {
    return std::visit(
        [&](const auto& m) -> cplx {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CircularAperture>) {
                double x = rho * std::cos(phi) - m.offset_x;
                double y = rho * std::sin(phi) - m.offset_y;
                return (x * x + y * y <= m.radius * m.radius) ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, KnifeEdge>) {
                double xr = rho * std::cos(phi - m.orientation);
                return xr > m.edge_position ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, PhaseScreen>) {
                return std::exp(cplx(0.0, m.phase(rho, phi)));
            } else if constexpr (std::is_same_v<T, ArbitraryMultiplicative>) {
                return m.t(rho, phi);
            } else {
                throw std::invalid_argument(
                    "mask_transmission: elliptical scaling is a remap, not a multiplicative factor");
            }
        },
        mask);
}

MaskSpec tilt_screen(double gamma, double eta, double k) {
    if (gamma < 0.0 || gamma >= kPi / 2)
        throw std::domain_error("tilt_screen: gamma must lie in [0, pi/2)");
    double alpha = k * std::sin(gamma);
    return PhaseScreen{[alpha, eta](double rho, double phi) {
        return alpha * rho * std::cos(phi - eta);
    }};
}

// ---------------------------------------------------------------------------
// Analytic coefficients
// ---------------------------------------------------------------------------

namespace {

// \int_0^{8 w0} rho^3 e^{-2 rho^2 / w0^2} drho, the shared unperturbed normalizer.
double unperturbed_norm_integral(double w0) {
    return integrate_adaptive(
               [w0](double r) -> cplx { return r * r * r * std::exp(-2.0 * r * r / (w0 * w0)); },
               0.0, 8.0 * w0, 1e-13)
        .real();
}

void require_logical_m(int m, const char* who) {
    if (m != 1 && m != -1) throw std::domain_error(std::string(who) + ": m must be +1 or -1");
}

}  // namespace

double displacement_coeff_analytic(double delta, int m, double w0) {
    require_logical_m(m, "displacement_coeff_analytic");
    if (delta < 0.0) throw std::domain_error("displacement_coeff_analytic: delta must be >= 0");
    if (delta == 0.0) return 1.0;
    double w2 = w0 * w0;
    auto integrand = [&](double r) -> cplx {
        double z = 2.0 * r * delta / w2;
        auto i01 = bessel_i_mod_all(1, z);
        return r * r * (r * i01[0] - delta * i01[1]) * std::exp(-2.0 * r * r / w2);
    };
    double num = integrate_adaptive(integrand, 0.0, 8.0 * w0, 1e-13).real();
    return std::exp(-delta * delta / w2) * num / unperturbed_norm_integral(w0);
}

ScalarField displaced_lg1_field(double delta, double theta_d, int m, double w0) {
    require_logical_m(m, "displaced_lg1_field");
    if (delta < 0.0) throw std::domain_error("displaced_lg1_field: delta must be >= 0");
    double s = m > 0 ? 1.0 : -1.0;
    double pref = std::sqrt(2.0 / kPi) * std::sqrt(2.0) / (w0 * w0);
    double w2 = w0 * w0;
    return ScalarField{[=](double rho, double phi) -> cplx {
        cplx u = rho * std::exp(cplx(0.0, s * phi)) - delta * std::exp(cplx(0.0, s * theta_d));
        double g = std::exp(-(rho * rho + delta * delta - 2.0 * rho * delta * std::cos(phi - theta_d)) / w2);
        return pref * u * g;
    }};
}

double tilt_coeff_analytic(double gamma, double k, double w0) {
    if (gamma < 0.0 || gamma >= kPi / 2)
        throw std::domain_error("tilt_coeff_analytic: gamma must lie in [0, pi/2)");
    if (gamma == 0.0) return 1.0;
    double alpha = k * std::sin(gamma);
    auto integrand = [&](double r) -> cplx {
        return r * r * r * std::exp(-2.0 * r * r / (w0 * w0)) * bessel_j(0, alpha * r);
    };
    double num = integrate_adaptive(integrand, 0.0, 8.0 * w0, 1e-13).real();
    return num / unperturbed_norm_integral(w0);
}

cplx combined_coeff_analytic(double delta, double theta_d, double gamma, double eta, int m,
                             double k, double w0, int n_sum, double* tail_magnitude) {
    require_logical_m(m, "combined_coeff_analytic");
    if (delta < 0.0) throw std::domain_error("combined_coeff_analytic: delta must be >= 0");
    if (gamma < 0.0 || gamma >= kPi / 2)
        throw std::domain_error("combined_coeff_analytic: gamma must lie in [0, pi/2)");
    double alpha = k * std::sin(gamma);
    double w2 = w0 * w0;
    double psi = theta_d - eta + kPi / 2;
    double tail = 0.0;

    auto integrand = [&](double r) -> cplx {
        double z = 2.0 * r * delta / w2;  // modified-Bessel argument
        double x = alpha * r;             // Bessel-J argument
        int i_max = n_sum + std::abs(m);
        auto iv = bessel_i_mod_all(i_max, z);
        auto jv = bessel_j_all(n_sum, x);
        cplx s0 = 0.0, s1 = 0.0;
        for (int n = -n_sum; n <= n_sum; ++n) {
            double jn = jv[std::abs(n)];
            if (n < 0 && (n & 1)) jn = -jn;  // J_{-n} = (-1)^n J_n
            cplx ph = std::exp(cplx(0.0, n * psi));
            s0 += iv[std::abs(n)] * jn * ph;
            s1 += iv[std::abs(n - m)] * jn * ph;
        }
        tail = std::max(tail, std::abs(iv[n_sum] * jv[n_sum]));
        return r * r * (r * s0 - delta * s1) * std::exp(-2.0 * r * r / w2);
    };

    cplx num = integrate_adaptive(integrand, 0.0, 8.0 * w0, 1e-12);
    if (tail_magnitude) *tail_magnitude = tail;
    return std::exp(-delta * delta / w2) * num / unperturbed_norm_integral(w0);
}

// ---------------------------------------------------------------------------
// q-plate
// ---------------------------------------------------------------------------

double QPlateSpec::q(int abs_m_in, int abs_m_out, int p_in, int p_out) const {
    int np = basis.p_max + 1;
    if (abs_m_out == abs_m_in + 1) return q_up[abs_m_in][size_t(p_in) * np + p_out];
    if (abs_m_out == abs_m_in - 1) return q_up[abs_m_out][size_t(p_out) * np + p_in];
    throw std::invalid_argument("QPlateSpec::q: |m'| must be |m| +- 1");
}

QPlateSpec qplate_radial_coeffs(const BasisSpec& basis) {
    QPlateSpec qp;
    qp.basis = basis;
    int np = basis.p_max + 1;
    qp.q_up.assign(basis.m_max, std::vector<double>(size_t(np) * np, 0.0));
    // Q_{a,a+1;p,p'} = 2*pi \int R_{p',a+1} R_{p,a} rho drho: the e^{+-i phi}
    // q-plate phase shifts the azimuthal content exactly; only the radial
    // profiles re-overlap. Independent of the signs of m, m' by construction.
    for (int a = 0; a < basis.m_max; ++a) {
        for (int p = 0; p < np; ++p) {
            for (int p2 = 0; p2 < np; ++p2) {
                auto f = [&](double r) -> cplx {
                    return r * lg_radial(p2, a + 1, r, basis.w0) * lg_radial(p, a, r, basis.w0);
                };
                qp.q_up[a][size_t(p) * np + p2] =
                    2.0 * kPi * integrate_adaptive(f, 0.0, 8.0 * basis.w0, 1e-13).real();
            }
        }
    }
    return qp;
}

SpinOrbitState qplate_apply(const SpinOrbitState& s, const QPlateSpec& qp) {
    if (!(s.basis == qp.basis)) throw std::invalid_argument("qplate_apply: basis mismatch");
    const BasisSpec& b = s.basis;
    SpinOrbitState out(b);
    for (int m = -b.m_max; m <= b.m_max; ++m) {
        for (int p = 0; p <= b.p_max; ++p) {
            cplx al = s.at(Pol::L, m, p);
            if (al != cplx(0.0) && m + 1 <= b.m_max) {
                for (int p2 = 0; p2 <= b.p_max; ++p2)
                    out.at(Pol::R, m + 1, p2) += qp.q(std::abs(m), std::abs(m + 1), p, p2) * al;
            }
            cplx ar = s.at(Pol::R, m, p);
            if (ar != cplx(0.0) && m - 1 >= -b.m_max) {
                for (int p2 = 0; p2 <= b.p_max; ++p2)
                    out.at(Pol::L, m - 1, p2) += qp.q(std::abs(m), std::abs(m - 1), p, p2) * ar;
            }
        }
    }
    return out;
}

ModeCoupling qplate_as_coupling(const QPlateSpec& qp) {
    const BasisSpec& b = qp.basis;
    ModeCoupling c(b, PolAction::swap_with_oam_shift);
    for (int m = -b.m_max; m <= b.m_max; ++m)
        for (int p = 0; p <= b.p_max; ++p)
            for (int shift : {+1, -1}) {
                int m2 = m + shift;
                if (m2 < -b.m_max || m2 > b.m_max) continue;
                for (int p2 = 0; p2 <= b.p_max; ++p2)
                    c.entry(m, m2, p, p2) = qp.q(std::abs(m), std::abs(m2), p, p2);
            }
    return c;
}

SpinOrbitState encode(const PolarizationQubit& q, const QPlateSpec& qp) {
    return qplate_apply(fundamental_state(q, qp.basis), qp);
}

DecodeResult decode(const SpinOrbitState& s, const QPlateSpec& qp) {
    ProjectionResult pr = project_fundamental(qplate_apply(s, qp));
    return DecodeResult{pr.qubit, pr.survival, pr.defined};
}

std::array<cplx, 2> decode_amplitudes(const SpinOrbitState& s, const QPlateSpec& qp) {
    SpinOrbitState d = qplate_apply(s, qp);
    return {d.at(Pol::R, 0, 0), d.at(Pol::L, 0, 0)};
}

SpinOrbitState free_propagate(const SpinOrbitState& s, double zeta) {
    SpinOrbitState out(s.basis);
    for (Pol pol : {Pol::L, Pol::R})
        for (int m = -s.basis.m_max; m <= s.basis.m_max; ++m) {
            for (int p = 0; p <= s.basis.p_max; ++p) {
                cplx phase = std::exp(cplx(0.0, -(2.0 * p + std::abs(m) + 1.0) * zeta));
                out.at(pol, m, p) = phase * s.at(pol, m, p);
            }
        }
    return out;
}

SpinOrbitState erase_polarization(const SpinOrbitState& s, double polarizer_angle) {
    // |lin(a)> = (e^{ia}|R> + e^{-ia}|L>)/sqrt(2); projector applied per spatial mode
    cplx er = std::exp(cplx(0.0, polarizer_angle)) / std::sqrt(2.0);
    cplx el = std::exp(cplx(0.0, -polarizer_angle)) / std::sqrt(2.0);
    SpinOrbitState out(s.basis);
    for (int m = -s.basis.m_max; m <= s.basis.m_max; ++m)
        for (int p = 0; p <= s.basis.p_max; ++p) {
            cplx c = std::conj(er) * s.at(Pol::R, m, p) + std::conj(el) * s.at(Pol::L, m, p);
            out.at(Pol::R, m, p) = c * er;
            out.at(Pol::L, m, p) = c * el;
        }
    return out;
}

OamQubit make_oam_qubit(cplx c_plus, cplx c_minus) {
    double n = std::sqrt(std::norm(c_plus) + std::norm(c_minus));
    if (n < 1e-300) throw std::domain_error("make_oam_qubit: zero vector");
    return OamQubit{c_plus / n, c_minus / n};
}

OamDecodeResult oam_decode(const SpinOrbitState& s, const OamQubit& reference) {
    // rho restricted to span{(+1,0), (-1,0)}, polarization traced out
    cplx rpp = 0.0, rmm = 0.0, rpm = 0.0;
    for (Pol pol : {Pol::L, Pol::R}) {
        cplx vp = s.at(pol, +1, 0);
        cplx vm = s.at(pol, -1, 0);
        rpp += std::conj(vp) * vp;
        rmm += std::conj(vm) * vm;
        rpm += vp * std::conj(vm);  // <plus| rho |minus>
    }
    OamDecodeResult res;
    res.survival = rpp.real() + rmm.real();
    if (res.survival < 1e-12) return res;
    // F = <ref| rho |ref> / tr(rho), with rpm = rho_{+,-}
    cplx a = reference.c_plus, b = reference.c_minus;
    double f = (std::conj(a) * a * rpp + std::conj(b) * b * rmm + std::conj(a) * b * rpm +
                std::conj(b) * a * std::conj(rpm))
                   .real();
    res.fidelity = f / res.survival;
    res.defined = true;
    return res;
}

}  // namespace rotq
