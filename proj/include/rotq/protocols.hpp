#ifndef ROTQ_PROTOCOLS_HPP
#define ROTQ_PROTOCOLS_HPP

#include <array>
#include <vector>

#include "rotq/channel.hpp"
#include "rotq/linalg.hpp"
#include "rotq/modes.hpp"

namespace rotq {

// Shared state for protocol runs: basis, quadrature grid and the q-plate
// coefficients (built once, reused across sweep points).
struct SimContext {
    BasisSpec basis;
    PolarGrid grid;
    QPlateSpec qplate;
};

SimContext make_context(const BasisSpec& basis, const PolarGrid& grid = PolarGrid{});

enum class Encoding { hybrid, polarization, oam };

// h(x) = -x log2 x - (1-x) log2(1-x), h(0) = h(1) = 0.
double binary_entropy(double x);

// Asymptotic BB84 secret-key fraction r = max(0, 1 - h(qz) - h(qx)).
double key_fraction(double qber_z, double qber_x);

// ---------------------------------------------------------------------------
// Single-photon protocols
// ---------------------------------------------------------------------------

// Conditional logical-qubit output for one prepared state sent through the
// channel with the receiving stage rotated by theta. rho is the 2x2 density
// matrix conditioned on detection.
struct StateOutcome {
    CMat rho{2, 2};
    double survival = 0.0;
    bool defined = false;
};

StateOutcome transmit_state(const SimContext& ctx, const Pipeline& channel, double theta,
                            Encoding enc, LogicalState label);

struct Bb84Report {
    std::array<double, 4> fidelity{};  // Zero, One, Plus, Minus
    std::array<double, 4> survival{};
    double qber_z = 0.0;
    double qber_x = 0.0;
    double avg_fidelity = 0.0;
    double key_fraction = 0.0;
    bool secure = false;
};

Bb84Report bb84_run(const SimContext& ctx, const Pipeline& channel, double theta, Encoding enc);

// Misalignment varying from photon to photon: one angle per prepared state.
Bb84Report bb84_run_per_state(const SimContext& ctx, const Pipeline& channel,
                              const std::array<double, 4>& thetas, Encoding enc);

// Session statistics with the angle uniformly mixed over the given list:
// per-state conditional distributions are mixed (survival-weighted) before
// the fidelities are derived.
Bb84Report bb84_run_mixed(const SimContext& ctx, const Pipeline& channel,
                          const std::vector<double>& thetas, Encoding enc);

// Mean conditional fidelity over the six eigenstates of the three MUBs.
double mub_average_fidelity(const SimContext& ctx, const Pipeline& channel, double theta,
                            Encoding enc);

struct MubReport {
    double fidelity = 0.0;
    double mean_survival = 0.0;
};

MubReport mub_report(const SimContext& ctx, const Pipeline& channel, double theta, Encoding enc);

// ---------------------------------------------------------------------------
// Two-photon layer
// ---------------------------------------------------------------------------

// 4x4 density matrix over {|00>, |01>, |10>, |11>} of the logical two-qubit space.
struct TwoQubitDensityMatrix {
    CMat rho{4, 4};
};

// Schmidt-form two-photon pure state; arm states live in the single-photon basis.
struct TwoPhotonPureState {
    struct Term {
        cplx coeff;
        SpinOrbitState a;
        SpinOrbitState b;
    };
    std::vector<Term> terms;
};

// |phi-> = (|0_L 0_L> - |1_L 1_L>)/sqrt(2) with q-plate-encoded arms.
TwoPhotonPureState bell_state_logical(const SimContext& ctx);

// The bare polarization-entangled pair (|RR> - |LL>)/sqrt(2) in the
// fundamental spatial mode (the no-logical-protection baseline).
TwoPhotonPureState bell_state_polarization(const SimContext& ctx);

struct TwoQubitOutcome {
    TwoQubitDensityMatrix rho;
    double survival = 0.0;
    bool defined = false;
};

// Per arm: channel, frame rotation, decode; the Schmidt terms are then
// recombined coherently into the (renormalized) logical two-qubit matrix.
TwoQubitOutcome apply_local(const SimContext& ctx, const TwoPhotonPureState& tp,
                            const Pipeline& chan_a, const Pipeline& chan_b, double theta_a,
                            double theta_b, Encoding enc);

// Standard spin-flip concurrence.
double concurrence(const TwoQubitDensityMatrix& rho);

// Projection probabilities onto the 36 joint MUB-eigenstate pairs.
std::array<double, 36> tomography_probs(const TwoQubitDensityMatrix& rho);

// Linear inversion back to the unique Hermitian unit-trace matrix, followed by
// projection to the PSD cone (eigenvalue clipping + trace renormalization).
TwoQubitDensityMatrix tomography_reconstruct(const std::array<double, 36>& probs);

// CHSH parameter with the fixed measurement bases
//   Alice: {|0>,|1>} and {|+>,|->};
//   Bob:   the same pair rotated by pi/8.
// Outcome labels are flipped on Alice's x=1 and Bob's y=1 settings: this is
// the relabeling (found by exhaustive search over all 16) that makes the
// ideal |phi-> state saturate the Tsirelson bound with these bases.
double chsh_S(const TwoQubitDensityMatrix& rho);

// Exhaustive search over the 16 outcome relabelings; returns the maximal S.
// Used to pin down the labeling convention above.
double chsh_S_best_labeling(const TwoQubitDensityMatrix& rho, std::array<int, 4>* signs = nullptr);

// Convenience states for tests and the CLI.
TwoQubitDensityMatrix phi_minus_matrix();
TwoQubitDensityMatrix werner_state(double p);
double density_fidelity(const TwoQubitDensityMatrix& a, const TwoQubitDensityMatrix& b);

}  // namespace rotq

#endif
