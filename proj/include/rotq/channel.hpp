#ifndef ROTQ_CHANNEL_HPP
#define ROTQ_CHANNEL_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "rotq/modes.hpp"
#include "rotq/numerics.hpp"

namespace rotq {

// ---------------------------------------------------------------------------
// Mode couplings
// ---------------------------------------------------------------------------

// Whether an element leaves polarization alone (spatial perturbations) or
// exchanges L/R while shifting the OAM index (q-plate).
enum class PolAction { identity, swap_with_oam_shift };

// Coefficient tensor C_{m,m';p,p'} of a linear spatial-mode transformation
// |m,p> -> sum C_{m,m';p,p'} |m',p'>, stored as a dense matrix over the
// spatial index (row = target mode, column = source mode). Immutable after
// construction and safe to share across sweep threads.
struct ModeCoupling {
    BasisSpec basis;
    PolAction pol_action = PolAction::identity;
    std::vector<cplx> mat;  // spatial_dim x spatial_dim, row-major

    explicit ModeCoupling(const BasisSpec& b, PolAction action = PolAction::identity)
        : basis(b), pol_action(action), mat(size_t(b.spatial_dim()) * b.spatial_dim(), cplx(0.0)) {}

    cplx& entry(int m_from, int m_to, int p_from, int p_to) {
        return mat[size_t(basis.spatial_index(m_to, p_to)) * basis.spatial_dim() +
                   basis.spatial_index(m_from, p_from)];
    }
    const cplx& entry(int m_from, int m_to, int p_from, int p_to) const {
        return mat[size_t(basis.spatial_index(m_to, p_to)) * basis.spatial_dim() +
                   basis.spatial_index(m_from, p_from)];
    }
};

ModeCoupling identity_coupling(const BasisSpec& basis);

// Uniform power attenuation (e.g. device transmission): amplitudes scaled by
// sqrt(power_factor). Scales survival, never fidelity.
ModeCoupling efficiency_coupling(double power_factor, const BasisSpec& basis);

// Free propagation parametrized by the accumulated Gouy phase zeta: each mode
// picks up e^{-i (2p + |m| + 1) zeta}.
ModeCoupling propagation_coupling(double zeta, const BasisSpec& basis);

// second o first as a single coupling (matrix product over the truncated space).
ModeCoupling compose(const ModeCoupling& second, const ModeCoupling& first);

// Linear contraction of the state with the coupling. Identity pol_action acts
// on each polarization block separately; swap_with_oam_shift implements the
// q-plate branch structure (L: m -> m+1, R: m -> m-1, polarization exchanged).
// Amplitudes shifted outside the basis are dropped (counted as loss).
SpinOrbitState apply_coupling(const SpinOrbitState& s, const ModeCoupling& c);

struct InvarianceReport {
    bool holds = false;
    double max_dev = 0.0;
};

// The fidelity-invariance condition: C_{-1,-1;p,p'} = C_{+1,+1;p,p'} for all
// p, p'. max_dev is normalized by max(1, largest tensor magnitude).
InvarianceReport check_invariance(const ModeCoupling& c, double tol);

// Power transmitted through a coupling for a given probe state.
double transmitted_fraction(const ModeCoupling& c, const SpinOrbitState& probe);

// Coefficient-table export: columns m, m_prime, p, p_prime, re, im.
void write_coupling_csv(std::ostream& os, const ModeCoupling& c);

// ---------------------------------------------------------------------------
// Masks and perturbations
// ---------------------------------------------------------------------------

struct CircularAperture {
    double radius = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;
};

// Transmits the half-plane x' > edge_position, where x' is measured along the
// direction at `orientation` from the x axis.
struct KnifeEdge {
    double edge_position = 0.0;
    double orientation = 0.0;
};

struct PhaseScreen {
    std::function<double(double rho, double phi)> phase;
};

// Area-preserving anamorphic scaling: stretch by `ratio` along the axis at
// `orientation`, compress by 1/ratio across it.
struct EllipticalScaling {
    double ratio = 1.0;
    double orientation = 0.0;
};

struct ArbitraryMultiplicative {
    std::function<cplx(double rho, double phi)> t;  // |t| <= 1
};

using MaskSpec = std::variant<CircularAperture, KnifeEdge, PhaseScreen, EllipticalScaling,
                              ArbitraryMultiplicative>;

// Pointwise transmission factor of a multiplicative mask (throws for
// EllipticalScaling, which is a coordinate remap rather than a factor).
cplx mask_transmission(const MaskSpec& mask, double rho, double phi);

// C_{m,m';p,p'} = <lg(p',m') | mask | lg(p,m)> over the whole truncated basis.
// Aperture and knife-edge azimuthal integrals are done in closed form over the
// transmitting arcs with the radial quadrature split at the geometric
// breakpoints, so the tensors are stable under grid refinement.
ModeCoupling mask_coupling(const MaskSpec& mask, const BasisSpec& basis, const PolarGrid& grid);

// Rigid beam translation by (delta, theta_d) in polar form.
ModeCoupling displacement_coupling(double delta, double theta_d, const BasisSpec& basis,
                                   const PolarGrid& grid);

// Tilt by angle gamma about the axis at azimuth eta, as the thin phase screen
// e^{i k sin(gamma) rho cos(phi - eta)}.
MaskSpec tilt_screen(double gamma, double eta, double k);

// ---------------------------------------------------------------------------
// Analytic perturbation coefficients for the LG(0, +-1) pair, each normalized
// so that the unperturbed case gives exactly 1. An independent 2D quadrature
// over the perturbed fields reproduces these (see tests).
// ---------------------------------------------------------------------------

// C_{m,m;0,0} for a beam displaced by delta; independent of the sign of m.
double displacement_coeff_analytic(double delta, int m, double w0);

// The displaced LG(0, m=+-1) field itself, pointwise.
ScalarField displaced_lg1_field(double delta, double theta_d, int m, double w0);

// C_{m,m;0,0} for a tilted beam, alpha = k sin(gamma); azimuth-independent.
double tilt_coeff_analytic(double gamma, double k, double w0);

// Combined displacement + tilt. Complex in general; equal for m = +-1 exactly
// when theta_d = eta (mod pi). The Bessel sums run over |n| <= n_sum; if
// tail_magnitude is given it receives the largest dropped-term estimate.
cplx combined_coeff_analytic(double delta, double theta_d, double gamma, double eta, int m,
                             double k, double w0, int n_sum = 40,
                             double* tail_magnitude = nullptr);

// ---------------------------------------------------------------------------
// q-plate (topological charge 1/2, tuned)
// ---------------------------------------------------------------------------

// Acts as polarization exchange with an e^{+-i phi} azimuthal phase. The
// radial redistribution coefficients Q_{|m|,|m'|;p,p'} are overlap integrals
// between same-waist radial profiles and depend only on |m|, |m'|.
struct QPlateSpec {
    BasisSpec basis;
    // q_up[a] holds Q_{a,a+1;p,p'} as an (p_max+1)^2 row-major block.
    std::vector<std::vector<double>> q_up;

    double q(int abs_m_in, int abs_m_out, int p_in, int p_out) const;
};

QPlateSpec qplate_radial_coeffs(const BasisSpec& basis);

SpinOrbitState qplate_apply(const SpinOrbitState& s, const QPlateSpec& qp);

// The same device as a swap_with_oam_shift ModeCoupling (the m -> m+1 entries
// feed the L branch, m -> m-1 the R branch).
ModeCoupling qplate_as_coupling(const QPlateSpec& qp);

// Polarization qubit -> rotation-invariant hybrid state in the m = +-1 manifolds.
SpinOrbitState encode(const PolarizationQubit& q, const QPlateSpec& qp);

struct DecodeResult {
    PolarizationQubit qubit{1.0, 0.0};
    double survival = 0.0;
    bool defined = false;
};

// Second q-plate pass followed by the single-mode-fiber projection. The qubit
// is conditional on detection; survival is the heralded transmission probability.
DecodeResult decode(const SpinOrbitState& s, const QPlateSpec& qp);

// Unnormalized (c_R, c_L) fundamental-mode amplitudes after the decoding
// q-plate; used to assemble two-photon states coherently.
std::array<cplx, 2> decode_amplitudes(const SpinOrbitState& s, const QPlateSpec& qp);

SpinOrbitState free_propagate(const SpinOrbitState& s, double zeta);

// Projection onto the linear polarization at polarizer_angle (0 = horizontal);
// erases polarization content, leaving a pure-OAM-encoded photon.
SpinOrbitState erase_polarization(const SpinOrbitState& s, double polarizer_angle);

// Qubit in the two-dimensional OAM subspace {m=+1, m=-1} at p = 0.
struct OamQubit {
    cplx c_plus;   // m = +1
    cplx c_minus;  // m = -1
};

OamQubit make_oam_qubit(cplx c_plus, cplx c_minus);

struct OamDecodeResult {
    double fidelity = 0.0;
    double survival = 0.0;
    bool defined = false;
};

// Projects onto the OAM qubit subspace (p = 0, m = +-1), tracing out
// polarization, and compares with the reference state.
OamDecodeResult oam_decode(const SpinOrbitState& s, const OamQubit& reference);

// ---------------------------------------------------------------------------
// Channel pipelines
// ---------------------------------------------------------------------------

using StateOp = std::function<SpinOrbitState(const SpinOrbitState&)>;

struct Pipeline {
    std::vector<StateOp> ops;
    SpinOrbitState apply(SpinOrbitState s) const {
        for (const auto& op : ops) s = op(s);
        return s;
    }
};

}  // namespace rotq

#endif
