#ifndef ROTQ_LINALG_HPP
#define ROTQ_LINALG_HPP

#include <complex>
#include <vector>

#include "rotq/numerics.hpp"

namespace rotq {

// Minimal dense complex matrix, just enough for the 2x2 arm maps, 4x4
// density-matrix algebra and the fixed 16-parameter tomography solve.
struct CMat {
    int n = 0, m = 0;
    std::vector<cplx> a;

    CMat() = default;
    CMat(int rows, int cols) : n(rows), m(cols), a(size_t(rows) * cols, cplx(0.0)) {}
    static CMat identity(int k);

    cplx& operator()(int i, int j) { return a[size_t(i) * m + j]; }
    const cplx& operator()(int i, int j) const { return a[size_t(i) * m + j]; }

    CMat adjoint() const;
    cplx trace() const;
};

CMat operator*(const CMat& x, const CMat& y);
CMat operator+(const CMat& x, const CMat& y);
CMat operator-(const CMat& x, const CMat& y);
CMat operator*(cplx s, const CMat& x);

std::vector<cplx> operator*(const CMat& x, const std::vector<cplx>& v);

struct HermitianEig {
    std::vector<double> values;  // ascending
    CMat vectors;                // columns are eigenvectors
};

// Cyclic Jacobi for complex Hermitian matrices. Sizes here are tiny (4x4),
// so robustness beats speed.
HermitianEig hermitian_eig(const CMat& h);

// Solve a real square system by Gaussian elimination with partial pivoting.
std::vector<double> solve_real(std::vector<std::vector<double>> a, std::vector<double> b);

}  // namespace rotq

#endif
