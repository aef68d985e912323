#include "rotq/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rotq {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

using Vec2 = std::array<cplx, 2>;

// Logical 2-vector of a label: coefficients on {|0>, |1>}.
Vec2 logical_vec(LogicalState s) {
    PolarizationQubit q = logical_amplitudes(s);
    return {q.alpha, q.beta};
}

// Polarization qubit (R/L amplitudes) realizing c0|H> + c1|V>, with
// H = (R+L)/sqrt(2) and V = i(R-L)/sqrt(2).
PolarizationQubit hv_to_circular(const Vec2& c) {
    return PolarizationQubit{(c[0] + cplx(0, 1) * c[1]) * kInvSqrt2,
                             (c[0] - cplx(0, 1) * c[1]) * kInvSqrt2};
}

Vec2 circular_to_hv(cplx v_r, cplx v_l) {
    return {(v_r + v_l) * kInvSqrt2, cplx(0, -1) * (v_r - v_l) * kInvSqrt2};
}

CMat outer2(const Vec2& v) {
    CMat m(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
}

void validate_density(const TwoQubitDensityMatrix& d, const char* who) {
    const CMat& r = d.rho;
    if (r.n != 4 || r.m != 4) throw std::invalid_argument(std::string(who) + ": 4x4 matrix required");
    if (std::abs(r.trace() - cplx(1.0)) > 1e-9)
        throw std::invalid_argument(std::string(who) + ": trace must be 1");
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (std::abs(r(i, j) - std::conj(r(j, i))) > 1e-9)
                throw std::invalid_argument(std::string(who) + ": matrix not Hermitian");
}

}  // namespace

SimContext make_context(const BasisSpec& basis, const PolarGrid& grid) {
    return SimContext{basis, grid, qplate_radial_coeffs(basis)};
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double key_fraction(double qber_z, double qber_x) {
    if (qber_z < 0.0 || qber_z > 0.5 || qber_x < 0.0 || qber_x > 0.5)
        throw std::domain_error("key_fraction: QBER arguments must lie in [0, 0.5]");
    return std::max(0.0, 1.0 - binary_entropy(qber_z) - binary_entropy(qber_x));
}

// ---------------------------------------------------------------------------
// Single-photon transmission
// ---------------------------------------------------------------------------

StateOutcome transmit_state(const SimContext& ctx, const Pipeline& channel, double theta,
                            Encoding enc, LogicalState label) {
    Vec2 c = logical_vec(label);
    StateOutcome out;

    if (enc == Encoding::hybrid) {
        SpinOrbitState s = encode(PolarizationQubit{c[0], c[1]}, ctx.qplate);
        s = rotate_frame(channel.apply(s), theta);
        auto [vr, vl] = decode_amplitudes(s, ctx.qplate);
        Vec2 v{vr, vl};
        out.survival = std::norm(v[0]) + std::norm(v[1]);
        if (out.survival < 1e-12) return out;
        out.rho = cplx(1.0 / out.survival) * outer2(v);
        out.defined = true;
        return out;
    }

    if (enc == Encoding::polarization) {
        SpinOrbitState s = fundamental_state(hv_to_circular(c), ctx.basis);
        s = rotate_frame(channel.apply(s), theta);
        Vec2 v = circular_to_hv(s.at(Pol::R, 0, 0), s.at(Pol::L, 0, 0));
        out.survival = std::norm(v[0]) + std::norm(v[1]);
        if (out.survival < 1e-12) return out;
        out.rho = cplx(1.0 / out.survival) * outer2(v);
        out.defined = true;
        return out;
    }

    // pure OAM qubit in o1 = {m=-1 (logical 0), m=+1 (logical 1)} at p = 0,
    // carried on a fixed linear polarization
    SpinOrbitState s(ctx.basis);
    s.at(Pol::R, -1, 0) = c[0] * kInvSqrt2;
    s.at(Pol::L, -1, 0) = c[0] * kInvSqrt2;
    s.at(Pol::R, +1, 0) = c[1] * kInvSqrt2;
    s.at(Pol::L, +1, 0) = c[1] * kInvSqrt2;
    s = rotate_frame(channel.apply(s), theta);
    CMat rho(2, 2);
    double tr = 0.0;
    for (Pol pol : {Pol::L, Pol::R}) {
        Vec2 v{s.at(pol, -1, 0), s.at(pol, +1, 0)};
        rho = rho + outer2(v);
    }
    tr = (rho(0, 0) + rho(1, 1)).real();
    out.survival = tr;
    if (tr < 1e-12) return out;
    out.rho = cplx(1.0 / tr) * rho;
    out.defined = true;
    return out;
}

namespace {

double outcome_fidelity(const StateOutcome& o, LogicalState label) {
    Vec2 e = logical_vec(label);
    cplx f = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) f += std::conj(e[i]) * o.rho(i, j) * e[j];
    return f.real();
}

Bb84Report report_from_outcomes(const std::array<StateOutcome, 4>& outs) {
    static const LogicalState labels[4] = {LogicalState::Zero, LogicalState::One,
                                           LogicalState::Plus, LogicalState::Minus};
    Bb84Report rep;
    for (int i = 0; i < 4; ++i) {
        if (!outs[i].defined)
            throw std::runtime_error("bb84_run: complete heralded loss, qubit undefined");
        rep.fidelity[i] = outcome_fidelity(outs[i], labels[i]);
        rep.survival[i] = outs[i].survival;
    }
    rep.qber_z = 1.0 - 0.5 * (rep.fidelity[0] + rep.fidelity[1]);
    rep.qber_x = 1.0 - 0.5 * (rep.fidelity[2] + rep.fidelity[3]);
    rep.avg_fidelity = 0.25 * (rep.fidelity[0] + rep.fidelity[1] + rep.fidelity[2] + rep.fidelity[3]);
    double qz = std::clamp(rep.qber_z, 0.0, 0.5);
    double qx = std::clamp(rep.qber_x, 0.0, 0.5);
    rep.key_fraction = (rep.qber_z <= 0.5 && rep.qber_x <= 0.5) ? key_fraction(qz, qx) : 0.0;
    rep.secure = rep.avg_fidelity >= 0.89;
    return rep;
}

}  // namespace

Bb84Report bb84_run(const SimContext& ctx, const Pipeline& channel, double theta, Encoding enc) {
    return bb84_run_per_state(ctx, channel, {theta, theta, theta, theta}, enc);
}

Bb84Report bb84_run_per_state(const SimContext& ctx, const Pipeline& channel,
                              const std::array<double, 4>& thetas, Encoding enc) {
    static const LogicalState labels[4] = {LogicalState::Zero, LogicalState::One,
                                           LogicalState::Plus, LogicalState::Minus};
    std::array<StateOutcome, 4> outs;
    for (int i = 0; i < 4; ++i) outs[i] = transmit_state(ctx, channel, thetas[i], enc, labels[i]);
    return report_from_outcomes(outs);
}

Bb84Report bb84_run_mixed(const SimContext& ctx, const Pipeline& channel,
                          const std::vector<double>& thetas, Encoding enc) {
    if (thetas.empty()) throw std::invalid_argument("bb84_run_mixed: empty angle list");
    static const LogicalState labels[4] = {LogicalState::Zero, LogicalState::One,
                                           LogicalState::Plus, LogicalState::Minus};
    std::array<StateOutcome, 4> mixed;
    for (int i = 0; i < 4; ++i) {
        CMat acc(2, 2);
        double wsum = 0.0;
        for (double th : thetas) {
            StateOutcome o = transmit_state(ctx, channel, th, enc, labels[i]);
            if (!o.defined) continue;
            acc = acc + cplx(o.survival) * o.rho;
            wsum += o.survival;
        }
        mixed[i].survival = wsum / thetas.size();
        if (wsum < 1e-12) continue;
        mixed[i].rho = cplx(1.0 / wsum) * acc;
        mixed[i].defined = true;
    }
    return report_from_outcomes(mixed);
}

double mub_average_fidelity(const SimContext& ctx, const Pipeline& channel, double theta,
                            Encoding enc) {
    return mub_report(ctx, channel, theta, enc).fidelity;
}

MubReport mub_report(const SimContext& ctx, const Pipeline& channel, double theta, Encoding enc) {
    static const LogicalState labels[6] = {LogicalState::Zero, LogicalState::One,
                                           LogicalState::Plus, LogicalState::Minus,
                                           LogicalState::PlusI, LogicalState::MinusI};
    MubReport rep;
    for (LogicalState l : labels) {
        StateOutcome o = transmit_state(ctx, channel, theta, enc, l);
        if (!o.defined) throw std::runtime_error("mub_report: complete heralded loss");
        rep.fidelity += outcome_fidelity(o, l) / 6.0;
        rep.mean_survival += o.survival / 6.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Two-photon layer
// ---------------------------------------------------------------------------

TwoPhotonPureState bell_state_logical(const SimContext& ctx) {
    TwoPhotonPureState tp;
    SpinOrbitState e0 = encode(PolarizationQubit{1.0, 0.0}, ctx.qplate);
    SpinOrbitState e1 = encode(PolarizationQubit{0.0, 1.0}, ctx.qplate);
    tp.terms.push_back({kInvSqrt2, e0, e0});
    tp.terms.push_back({-kInvSqrt2, e1, e1});
    return tp;
}

TwoPhotonPureState bell_state_polarization(const SimContext& ctx) {
    TwoPhotonPureState tp;
    SpinOrbitState r = fundamental_state(PolarizationQubit{1.0, 0.0}, ctx.basis);
    SpinOrbitState l = fundamental_state(PolarizationQubit{0.0, 1.0}, ctx.basis);
    tp.terms.push_back({kInvSqrt2, r, r});
    tp.terms.push_back({-kInvSqrt2, l, l});
    return tp;
}

namespace {

Vec2 arm_decode(const SimContext& ctx, const SpinOrbitState& s, Encoding enc) {
    if (enc == Encoding::hybrid) {
        auto [vr, vl] = decode_amplitudes(s, ctx.qplate);
        return {vr, vl};
    }
    if (enc == Encoding::polarization)
        return circular_to_hv(s.at(Pol::R, 0, 0), s.at(Pol::L, 0, 0));
    throw std::invalid_argument("apply_local: two-photon layer supports hybrid or polarization");
}

}  // namespace

TwoQubitOutcome apply_local(const SimContext& ctx, const TwoPhotonPureState& tp,
                            const Pipeline& chan_a, const Pipeline& chan_b, double theta_a,
                            double theta_b, Encoding enc) {
    std::array<cplx, 4> psi{};
    for (const auto& term : tp.terms) {
        Vec2 va = arm_decode(ctx, rotate_frame(chan_a.apply(term.a), theta_a), enc);
        Vec2 vb = arm_decode(ctx, rotate_frame(chan_b.apply(term.b), theta_b), enc);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) psi[2 * i + j] += term.coeff * va[i] * vb[j];
    }
    TwoQubitOutcome out;
    double n2 = 0.0;
    for (const cplx& v : psi) n2 += std::norm(v);
    out.survival = n2;
    if (n2 < 1e-12) return out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.rho.rho(i, j) = psi[i] * std::conj(psi[j]) / n2;
    out.defined = true;
    return out;
}

double concurrence(const TwoQubitDensityMatrix& d) {
    validate_density(d, "concurrence");
    const CMat& rho = d.rho;

    // sqrt(rho) from its eigendecomposition, tiny negatives clipped
    HermitianEig er = hermitian_eig(rho);
    CMat sq(4, 4);
    for (int k = 0; k < 4; ++k) {
        double lam = std::sqrt(std::max(0.0, er.values[k]));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                sq(i, j) += lam * er.vectors(i, k) * std::conj(er.vectors(j, k));
    }

    // rho~ = (Y x Y) conj(rho) (Y x Y)
    CMat yy(4, 4);
    const cplx y[2][2] = {{0.0, cplx(0, -1)}, {cplx(0, 1), 0.0}};
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    yy(2 * i1 + i2, 2 * j1 + j2) = y[i1][j1] * y[i2][j2];
    CMat conj_rho(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) conj_rho(i, j) = std::conj(rho(i, j));
    CMat tilde = yy * conj_rho * yy;

    HermitianEig em = hermitian_eig(sq * tilde * sq);
    double c = std::sqrt(std::max(0.0, em.values[3]));
    for (int k = 0; k < 3; ++k) c -= std::sqrt(std::max(0.0, em.values[k]));
    return std::max(0.0, c);
}

// ---------------------------------------------------------------------------
// Tomography
// ---------------------------------------------------------------------------

namespace {

const std::array<Vec2, 6>& mub_states() {
    static const std::array<Vec2, 6> v = {
        Vec2{1.0, 0.0},
        Vec2{0.0, 1.0},
        Vec2{kInvSqrt2, kInvSqrt2},
        Vec2{kInvSqrt2, -kInvSqrt2},
        Vec2{kInvSqrt2, cplx(0, 1) * kInvSqrt2},
        Vec2{kInvSqrt2, cplx(0, -1) * kInvSqrt2},
    };
    return v;
}

// Bloch vectors (1, n) of the six states, Pauli order {I, X, Y, Z}.
const double kBloch[6][4] = {
    {1, 0, 0, 1}, {1, 0, 0, -1}, {1, 1, 0, 0}, {1, -1, 0, 0}, {1, 0, 1, 0}, {1, 0, -1, 0},
};

CMat pauli(int mu) {
    CMat s(2, 2);
    switch (mu) {
        case 0: s(0, 0) = 1; s(1, 1) = 1; break;
        case 1: s(0, 1) = 1; s(1, 0) = 1; break;
        case 2: s(0, 1) = cplx(0, -1); s(1, 0) = cplx(0, 1); break;
        case 3: s(0, 0) = 1; s(1, 1) = -1; break;
    }
    return s;
}

}  // namespace

std::array<double, 36> tomography_probs(const TwoQubitDensityMatrix& d) {
    validate_density(d, "tomography_probs");
    const auto& states = mub_states();
    std::array<double, 36> probs{};
    for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) {
            cplx p = 0.0;
            for (int i1 = 0; i1 < 2; ++i1)
                for (int i2 = 0; i2 < 2; ++i2)
                    for (int j1 = 0; j1 < 2; ++j1)
                        for (int j2 = 0; j2 < 2; ++j2)
                            p += std::conj(states[j][i1] * states[k][i2]) *
                                 d.rho(2 * i1 + i2, 2 * j1 + j2) * states[j][j1] * states[k][j2];
            probs[6 * j + k] = p.real();
        }
    return probs;
}

TwoQubitDensityMatrix tomography_reconstruct(const std::array<double, 36>& probs) {
    // p(j,k) = (1/4) sum_{mu,nu} r_{mu nu} a^j_mu a^k_nu  -> least squares for r
    std::vector<std::vector<double>> gram(16, std::vector<double>(16, 0.0));
    std::vector<double> rhs(16, 0.0);
    for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) {
            double row[16];
            for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu) row[4 * mu + nu] = 0.25 * kBloch[j][mu] * kBloch[k][nu];
            for (int u = 0; u < 16; ++u) {
                rhs[u] += row[u] * probs[6 * j + k];
                for (int v = 0; v < 16; ++v) gram[u][v] += row[u] * row[v];
            }
        }
    std::vector<double> r;
    try {
        r = solve_real(gram, rhs);  // full rank for the fixed 36-projector set
    } catch (const std::runtime_error&) {
        throw std::runtime_error("tomography_reconstruct: projector set is rank-deficient");
    }

    CMat rho(4, 4);
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            CMat smu = pauli(mu), snu = pauli(nu);
            for (int i1 = 0; i1 < 2; ++i1)
                for (int i2 = 0; i2 < 2; ++i2)
                    for (int j1 = 0; j1 < 2; ++j1)
                        for (int j2 = 0; j2 < 2; ++j2)
                            rho(2 * i1 + i2, 2 * j1 + j2) +=
                                0.25 * r[4 * mu + nu] * smu(i1, j1) * snu(i2, j2);
        }

    // PSD repair: clip negative eigenvalues, renormalize the trace
    HermitianEig er = hermitian_eig(rho);
    bool needs_clip = er.values[0] < 0.0;
    if (needs_clip) {
        CMat fixed(4, 4);
        double tr = 0.0;
        for (int k = 0; k < 4; ++k) {
            double lam = std::max(0.0, er.values[k]);
            tr += lam;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    fixed(i, j) += lam * er.vectors(i, k) * std::conj(er.vectors(j, k));
        }
        rho = cplx(1.0 / tr) * fixed;
    }
    TwoQubitDensityMatrix out;
    out.rho = rho;
    return out;
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

namespace {

// Measurement bases: Alice {0/1} and {+/-}; Bob the same two rotated by pi/8.
void chsh_bases(std::array<std::array<Vec2, 2>, 2>& alice, std::array<std::array<Vec2, 2>, 2>& bob) {
    double c = std::cos(3.14159265358979323846 / 8), s = std::sin(3.14159265358979323846 / 8);
    alice[0] = {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    alice[1] = {Vec2{kInvSqrt2, kInvSqrt2}, Vec2{kInvSqrt2, -kInvSqrt2}};
    bob[0] = {Vec2{c, s}, Vec2{-s, c}};
    bob[1] = {Vec2{s, c}, Vec2{-c, s}};
}

double joint_prob(const TwoQubitDensityMatrix& d, const Vec2& a, const Vec2& b) {
    cplx p = 0.0;
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    p += std::conj(a[i1] * b[i2]) * d.rho(2 * i1 + i2, 2 * j1 + j2) * a[j1] * b[j2];
    return p.real();
}

void chsh_raw_correlators(const TwoQubitDensityMatrix& d, double e[2][2]) {
    std::array<std::array<Vec2, 2>, 2> alice, bob;
    chsh_bases(alice, bob);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double v = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    v += ((a + b) % 2 == 0 ? 1.0 : -1.0) * joint_prob(d, alice[x][a], bob[y][b]);
            e[x][y] = v;
        }
}

}  // namespace

double chsh_S(const TwoQubitDensityMatrix& d) {
    validate_density(d, "chsh_S");
    double e[2][2];
    chsh_raw_correlators(d, e);
    // fixed labeling: outcomes flipped on Alice x=1 and Bob y=1
    const double sa[2] = {+1.0, -1.0};
    const double sb[2] = {+1.0, -1.0};
    return std::abs(sa[0] * sb[0] * e[0][0] + sa[1] * sb[0] * e[1][0] + sa[0] * sb[1] * e[0][1] -
                    sa[1] * sb[1] * e[1][1]);
}

double chsh_S_best_labeling(const TwoQubitDensityMatrix& d, std::array<int, 4>* signs) {
    validate_density(d, "chsh_S_best_labeling");
    double e[2][2];
    chsh_raw_correlators(d, e);
    double best = -1.0;
    for (int bits = 0; bits < 16; ++bits) {
        double sa0 = (bits & 1) ? -1.0 : 1.0;
        double sa1 = (bits & 2) ? -1.0 : 1.0;
        double sb0 = (bits & 4) ? -1.0 : 1.0;
        double sb1 = (bits & 8) ? -1.0 : 1.0;
        double s = std::abs(sa0 * sb0 * e[0][0] + sa1 * sb0 * e[1][0] + sa0 * sb1 * e[0][1] -
                            sa1 * sb1 * e[1][1]);
        if (s > best + 1e-15) {
            best = s;
            if (signs) *signs = {int(sa0), int(sa1), int(sb0), int(sb1)};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Reference states
// ---------------------------------------------------------------------------

TwoQubitDensityMatrix phi_minus_matrix() {
    std::array<cplx, 4> psi{kInvSqrt2, 0.0, 0.0, -kInvSqrt2};
    TwoQubitDensityMatrix d;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) d.rho(i, j) = psi[i] * std::conj(psi[j]);
    return d;
}

TwoQubitDensityMatrix werner_state(double p) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("werner_state: p outside [0, 1]");
    TwoQubitDensityMatrix d = phi_minus_matrix();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            d.rho(i, j) *= p;
            if (i == j) d.rho(i, j) += (1.0 - p) * 0.25;
        }
    return d;
}

double density_fidelity(const TwoQubitDensityMatrix& a, const TwoQubitDensityMatrix& b) {
    // Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2
    HermitianEig ea = hermitian_eig(a.rho);
    CMat sq(4, 4);
    for (int k = 0; k < 4; ++k) {
        double lam = std::sqrt(std::max(0.0, ea.values[k]));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                sq(i, j) += lam * ea.vectors(i, k) * std::conj(ea.vectors(j, k));
    }
    HermitianEig em = hermitian_eig(sq * b.rho * sq);
    double t = 0.0;
    for (double v : em.values) t += std::sqrt(std::max(0.0, v));
    return t * t;
}

}  // namespace rotq
