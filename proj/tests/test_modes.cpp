#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "rotq/modes.hpp"

using namespace rotq;

namespace {
constexpr double kPi = 3.14159265358979323846;

SpinOrbitState random_logical_support_state(const BasisSpec& b) {
    // supported only on {(L,-1,p)} u {(R,+1,p)}
    SpinOrbitState s(b);
    for (int p = 0; p <= b.p_max; ++p) {
        s.at(Pol::L, -1, p) = oracle::random_phase_amp();
        s.at(Pol::R, +1, p) = oracle::random_phase_amp();
    }
    double n = std::sqrt(s.norm2());
    for (auto& a : s.amp) a /= n;
    return s;
}
}  // namespace

TEST_CASE("make_basis validation and dimensions") {
    BasisSpec b = make_basis(5, 8, 1.0, 7.9e3);
    CHECK(b.dim() == 198);  // 2 * 11 * 9
    BasisSpec small = make_basis(1, 0, 1.0, 1.0);
    CHECK(small.dim() == 6);
    CHECK(small.contains(1, 0));
    CHECK(small.contains(-1, 0));

    CHECK_THROWS_AS(make_basis(0, 0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(make_basis(5, -1, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(make_basis(5, 8, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(make_basis(5, 8, 1.0, -2.0), std::domain_error);
}

TEST_CASE("rotate_frame: phases, composition, norm") {
    BasisSpec b = make_basis(3, 4, 1.0, 7.9e3);

    SUBCASE("logical-support states acquire no phase at all") {
        SpinOrbitState s = random_logical_support_state(b);
        SpinOrbitState r = rotate_frame(s, 0.6458);
        for (size_t i = 0; i < s.amp.size(); ++i)
            CHECK(std::abs(r.amp[i] - s.amp[i]) < 1e-14);
    }

    SUBCASE("|R> in the fundamental mode picks up e^{+i theta}") {
        SpinOrbitState s = fundamental_state(PolarizationQubit{1.0, 0.0}, b);
        double th = 0.7;
        SpinOrbitState r = rotate_frame(s, th);
        CHECK(std::abs(r.at(Pol::R, 0, 0) - std::exp(cplx(0.0, th))) < 1e-15);
    }

    SUBCASE("linear polarization rotates with the frame: H -> V at theta = pi/2") {
        double inv = 1.0 / std::sqrt(2.0);
        PolarizationQubit h{inv, inv};
        PolarizationQubit v{cplx(0, 1) * inv, cplx(0, -1) * inv};
        SpinOrbitState s = rotate_frame(fundamental_state(h, b), kPi / 2);
        ProjectionResult pr = project_fundamental(s);
        REQUIRE(pr.defined);
        CHECK(qubit_fidelity(pr.qubit, v) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qubit_fidelity(pr.qubit, h) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }

    SUBCASE("composition is exact and norm is preserved") {
        SpinOrbitState s(b);
        for (auto& a : s.amp) a = oracle::random_phase_amp();
        double n0 = s.norm2();
        SpinOrbitState r1 = rotate_frame(rotate_frame(s, 0.31), -1.7);
        SpinOrbitState r2 = rotate_frame(s, 0.31 - 1.7);
        for (size_t i = 0; i < s.amp.size(); ++i) CHECK(std::abs(r1.amp[i] - r2.amp[i]) < 1e-13);
        CHECK(std::abs(r1.norm2() - n0) < 1e-14 * n0);
    }

    SUBCASE("rotation invariance of the logical subspace, many random states") {
        for (int trial = 0; trial < 50; ++trial) {
            SpinOrbitState s = random_logical_support_state(b);
            double th = oracle::uniform(0.0, 2.0 * kPi);
            cplx ip = inner_product(s, rotate_frame(s, th));
            CHECK(std::abs(ip - cplx(1.0)) < 1e-12);
        }
    }
}

TEST_CASE("inner_product: sesquilinearity and basis mismatch") {
    BasisSpec b = make_basis(2, 3, 1.0, 7.9e3);
    SpinOrbitState s = random_logical_support_state(b);
    CHECK(std::abs(inner_product(s, s) - cplx(1.0)) < 1e-13);

    // orthogonality of the two logical profiles
    SpinOrbitState zero_prof(b), one_prof(b);
    for (int p = 0; p <= b.p_max; ++p) {
        zero_prof.at(Pol::L, -1, p) = oracle::random_phase_amp();
        one_prof.at(Pol::R, +1, p) = oracle::random_phase_amp();
    }
    CHECK(std::abs(inner_product(zero_prof, one_prof)) < 1e-15);

    SpinOrbitState t = random_logical_support_state(b);
    cplx lambda(0.3, -1.2);
    SpinOrbitState scaled = t;
    for (auto& a : scaled.amp) a *= lambda;
    CHECK(std::abs(inner_product(s, scaled) - lambda * inner_product(s, t)) < 1e-13);
    CHECK(std::abs(inner_product(scaled, s) - std::conj(lambda) * inner_product(t, s)) < 1e-13);

    BasisSpec other = make_basis(3, 3, 1.0, 7.9e3);
    SpinOrbitState o(other);
    CHECK_THROWS_AS(inner_product(s, o), std::invalid_argument);
}

TEST_CASE("project_fundamental: survival accounting and heralded loss") {
    BasisSpec b = make_basis(2, 2, 1.0, 7.9e3);

    SpinOrbitState r00 = fundamental_state(PolarizationQubit{1.0, 0.0}, b);
    ProjectionResult pr = project_fundamental(r00);
    CHECK(pr.defined);
    CHECK(pr.survival == doctest::Approx(1.0));
    CHECK(qubit_fidelity(pr.qubit, PolarizationQubit{1.0, 0.0}) == doctest::Approx(1.0));

    SpinOrbitState vortex(b);
    vortex.at(Pol::R, +1, 0) = 1.0;
    ProjectionResult pv = project_fundamental(vortex);
    CHECK_FALSE(pv.defined);
    CHECK(pv.survival == 0.0);

    // survival + rejected norm = total norm
    SpinOrbitState mixed(b);
    for (auto& a : mixed.amp) a = 0.2 * oracle::random_phase_amp();
    ProjectionResult pm = project_fundamental(mixed);
    double rejected = 0.0;
    for (Pol pol : {Pol::L, Pol::R})
        for (int m = -b.m_max; m <= b.m_max; ++m)
            for (int p = 0; p <= b.p_max; ++p)
                if (!(m == 0 && p == 0)) rejected += std::norm(mixed.at(pol, m, p));
    CHECK(pm.survival + rejected == doctest::Approx(mixed.norm2()).epsilon(1e-12));
}

TEST_CASE("qubit_fidelity basics") {
    PolarizationQubit a{1.0, 0.0}, bq{0.0, 1.0};
    double inv = 1.0 / std::sqrt(2.0);
    PolarizationQubit c{inv, inv};
    CHECK(qubit_fidelity(a, a) == doctest::Approx(1.0));
    CHECK(qubit_fidelity(a, bq) == doctest::Approx(0.0));
    CHECK(qubit_fidelity(a, c) == doctest::Approx(0.5));
    CHECK_THROWS_AS(make_qubit(0.0, 0.0), std::domain_error);
}

TEST_CASE("logical labels are orthonormal where required") {
    PolarizationQubit z = logical_amplitudes(LogicalState::Zero);
    PolarizationQubit o = logical_amplitudes(LogicalState::One);
    PolarizationQubit p = logical_amplitudes(LogicalState::Plus);
    PolarizationQubit m = logical_amplitudes(LogicalState::Minus);
    CHECK(qubit_fidelity(z, o) == doctest::Approx(0.0));
    CHECK(qubit_fidelity(p, m) == doctest::Approx(0.0));
    CHECK(qubit_fidelity(z, p) == doctest::Approx(0.5));
}
