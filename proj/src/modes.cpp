#include "rotq/modes.hpp"

#include <cmath>
#include <stdexcept>

namespace rotq {

BasisSpec make_basis(int m_max, int p_max, double w0, double k) {
    if (m_max < 1) throw std::domain_error("make_basis: m_max must be >= 1 (logical subspace m = +-1)");
    if (p_max < 0) throw std::domain_error("make_basis: p_max must be >= 0");
    if (!(w0 > 0.0)) throw std::domain_error("make_basis: w0 must be positive");
    if (!(k > 0.0)) throw std::domain_error("make_basis: k must be positive");
    return BasisSpec{m_max, p_max, w0, k};
}

double SpinOrbitState::norm2() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return s;
}

PolarizationQubit make_qubit(cplx alpha, cplx beta) {
    double n = std::sqrt(std::norm(alpha) + std::norm(beta));
    if (n < 1e-300) throw std::domain_error("make_qubit: zero vector");
    return PolarizationQubit{alpha / n, beta / n};
}

PolarizationQubit logical_amplitudes(LogicalState s) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (s) {
        case LogicalState::Zero: return PolarizationQubit{1.0, 0.0};
        case LogicalState::One: return PolarizationQubit{0.0, 1.0};
        case LogicalState::Plus: return PolarizationQubit{r, r};
        case LogicalState::Minus: return PolarizationQubit{r, -r};
        case LogicalState::PlusI: return PolarizationQubit{r, cplx(0.0, 1.0) * r};
        case LogicalState::MinusI: return PolarizationQubit{r, cplx(0.0, -1.0) * r};
    }
    throw std::logic_error("logical_amplitudes: bad label");
}

SpinOrbitState fundamental_state(const PolarizationQubit& q, const BasisSpec& basis) {
    SpinOrbitState s(basis);
    s.at(Pol::R, 0, 0) = q.alpha;
    s.at(Pol::L, 0, 0) = q.beta;
    return s;
}

SpinOrbitState rotate_frame(const SpinOrbitState& s, double theta) {
    SpinOrbitState out(s.basis);
    for (Pol pol : {Pol::L, Pol::R}) {
        int sigma = pol_sigma(pol);
        for (int m = -s.basis.m_max; m <= s.basis.m_max; ++m) {
            cplx phase = std::exp(cplx(0.0, -(sigma + m) * theta));
            for (int p = 0; p <= s.basis.p_max; ++p)
                out.at(pol, m, p) = phase * s.at(pol, m, p);
        }
    }
    return out;
}

cplx inner_product(const SpinOrbitState& a, const SpinOrbitState& b) {
    if (!(a.basis == b.basis)) throw std::invalid_argument("inner_product: basis mismatch");
    cplx s = 0.0;
    for (size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s;
}

ProjectionResult project_fundamental(const SpinOrbitState& s) {
    cplx cr = s.at(Pol::R, 0, 0);
    cplx cl = s.at(Pol::L, 0, 0);
    ProjectionResult res;
    res.survival = std::norm(cr) + std::norm(cl);
    if (res.survival < 1e-12) return res;  // undefined qubit, complete heralded loss
    double n = std::sqrt(res.survival);
    res.qubit = PolarizationQubit{cr / n, cl / n};
    res.defined = true;
    return res;
}

double qubit_fidelity(const PolarizationQubit& a, const PolarizationQubit& b) {
    return std::norm(std::conj(a.alpha) * b.alpha + std::conj(a.beta) * b.beta);
}

}  // namespace rotq
