#ifndef ROTQ_MODES_HPP
#define ROTQ_MODES_HPP

#include <complex>
#include <optional>
#include <vector>

#include "rotq/numerics.hpp"

namespace rotq {

// Circular polarization. |L> carries spin angular momentum +hbar (sigma = +1),
// |R> carries -hbar. The matching OAM convention pairs |R> with m = +1 and
// |L> with m = -1 so that both logical states have zero total angular momentum.
// This is the one place the sign convention is fixed; everything else uses
// pol_sigma() and the logical_* helpers below.
enum class Pol : int { L = 0, R = 1 };

inline int pol_sigma(Pol p) { return p == Pol::L ? +1 : -1; }

// Truncated spin-orbit basis: OAM index m in [-m_max, m_max], radial index
// p in [0, p_max], beam waist w0 and wavenumber k.
struct BasisSpec {
    int m_max = 5;
    int p_max = 8;
    double w0 = 1.0;
    double k = 7.9e3;

    int n_m() const { return 2 * m_max + 1; }
    int n_p() const { return p_max + 1; }
    int spatial_dim() const { return n_m() * n_p(); }
    int dim() const { return 2 * spatial_dim(); }
    int spatial_index(int m, int p) const { return (m + m_max) * n_p() + p; }
    int index(Pol pol, int m, int p) const {
        return static_cast<int>(pol) * spatial_dim() + spatial_index(m, p);
    }
    bool contains(int m, int p) const {
        return m >= -m_max && m <= m_max && p >= 0 && p <= p_max;
    }
    bool operator==(const BasisSpec&) const = default;
};

// Validated constructor. The logical subspace m = +-1 must exist.
BasisSpec make_basis(int m_max = 5, int p_max = 8, double w0 = 1.0, double k = 7.9e3);

// Single-photon state |P, m, p>: dense complex amplitudes over the truncated
// basis. Operations return new states; instances are safe to share.
struct SpinOrbitState {
    BasisSpec basis;
    std::vector<cplx> amp;

    explicit SpinOrbitState(const BasisSpec& b) : basis(b), amp(b.dim(), cplx(0.0)) {}

    cplx& at(Pol pol, int m, int p) { return amp[basis.index(pol, m, p)]; }
    const cplx& at(Pol pol, int m, int p) const { return amp[basis.index(pol, m, p)]; }
    double norm2() const;
};

// Polarization qubit alpha|R> + beta|L>.
struct PolarizationQubit {
    cplx alpha;  // |R>
    cplx beta;   // |L>
};

// Normalizes on construction; rejects the zero vector.
PolarizationQubit make_qubit(cplx alpha, cplx beta);

// The four BB84 logical states plus the circular pair used for MUB averages.
// Zero encodes to the |L, m=-1> manifold, One to |R, m=+1>.
enum class LogicalState { Zero, One, Plus, Minus, PlusI, MinusI };

// Input-qubit amplitudes (alpha, beta) whose encoding yields the given label.
PolarizationQubit logical_amplitudes(LogicalState s);

// State of the photon before encoding: the qubit in the fundamental m=0, p=0 mode.
SpinOrbitState fundamental_state(const PolarizationQubit& q, const BasisSpec& basis);

// Physical rotation of the transverse frame by theta: amplitude(pol, m, p)
// picks up e^{-i (sigma + m) theta}. Norm preserved exactly.
SpinOrbitState rotate_frame(const SpinOrbitState& s, double theta);

// Conjugate-linear in a, linear in b. Throws on basis mismatch.
cplx inner_product(const SpinOrbitState& a, const SpinOrbitState& b);

struct ProjectionResult {
    PolarizationQubit qubit{1.0, 0.0};
    double survival = 0.0;
    bool defined = false;  // false when survival < 1e-12 (heralded loss)
};

// Single-mode-fiber filter: keeps only the m = 0, p = 0 amplitudes.
ProjectionResult project_fundamental(const SpinOrbitState& s);

// |<a|b>|^2 for normalized qubits.
double qubit_fidelity(const PolarizationQubit& a, const PolarizationQubit& b);

}  // namespace rotq

#endif
