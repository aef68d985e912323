#include "rotq/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace rotq {

CMat CMat::identity(int k) {
    CMat out(k, k);
    for (int i = 0; i < k; ++i) out(i, i) = 1.0;
    return out;
}

CMat CMat::adjoint() const {
    CMat out(m, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

cplx CMat::trace() const {
    cplx t = 0.0;
    for (int i = 0; i < std::min(n, m); ++i) t += (*this)(i, i);
    return t;
}

CMat operator*(const CMat& x, const CMat& y) {
    if (x.m != y.n) throw std::invalid_argument("CMat: dimension mismatch in product");
    CMat out(x.n, y.m);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.m; ++k) {
            cplx xv = x(i, k);
            if (xv == cplx(0.0)) continue;
            for (int j = 0; j < y.m; ++j) out(i, j) += xv * y(k, j);
        }
    return out;
}

CMat operator+(const CMat& x, const CMat& y) {
    CMat out = x;
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
    return out;
}

CMat operator-(const CMat& x, const CMat& y) {
    CMat out = x;
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] -= y.a[i];
    return out;
}

CMat operator*(cplx s, const CMat& x) {
    CMat out = x;
    for (cplx& v : out.a) v *= s;
    return out;
}

std::vector<cplx> operator*(const CMat& x, const std::vector<cplx>& v) {
    if (size_t(x.m) != v.size()) throw std::invalid_argument("CMat: dimension mismatch in apply");
    std::vector<cplx> out(x.n, cplx(0.0));
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.m; ++j) out[i] += x(i, j) * v[j];
    return out;
}

HermitianEig hermitian_eig(const CMat& h) {
    if (h.n != h.m) throw std::invalid_argument("hermitian_eig: square matrix required");
    int n = h.n;
    CMat a = h;
    CMat v = CMat::identity(n);

    auto offdiag = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return s;
    };

    for (int sweep = 0; sweep < 100 && offdiag() > 1e-30; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cplx apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = a(p, p).real();
                double aqq = a(q, q).real();
                // unitary 2x2 rotation that zeroes a(p,q)
                double absapq = std::abs(apq);
                cplx phase = apq / absapq;
                double tau = (aqq - app) / (2.0 * absapq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                cplx sp = s * phase;
                for (int k = 0; k < n; ++k) {
                    cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(sp) * akq;
                    a(k, q) = sp * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sp * aqk;
                    a(q, k) = std::conj(sp) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(sp) * vkq;
                    v(k, q) = sp * vkp + c * vkq;
                }
            }
        }
    }

    HermitianEig out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = a(i, i).real();
    out.vectors = v;
    // sort ascending, reordering eigenvector columns alongside
    for (int i = 0; i < n - 1; ++i) {
        int mn = i;
        for (int j = i + 1; j < n; ++j)
            if (out.values[j] < out.values[mn]) mn = j;
        if (mn != i) {
            std::swap(out.values[i], out.values[mn]);
            for (int k = 0; k < n; ++k) std::swap(out.vectors(k, i), out.vectors(k, mn));
        }
    }
    return out;
}

std::vector<double> solve_real(std::vector<std::vector<double>> a, std::vector<double> b) {
    int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14)
            throw std::runtime_error("solve_real: singular system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

}  // namespace rotq
