// Hermitian eigendecomposition without external LAPACK.
//
// A K x K Hermitian matrix is embedded as the real symmetric 2K x 2K matrix
// [[Re A, -Im A], [Im A, Re A]] and diagonalised by cyclic Jacobi rotations.
// Every complex eigenpair appears twice in the embedding ((u;v) and (-v;u)),
// so eigenvalues are grouped into clusters and one complex representative per
// pair is extracted with pivoted Gram-Schmidt inside each cluster, followed by
// a global orthonormalisation polish.  The returned decomposition is validated
// (residual and orthonormality <= 1e-8 * ||A||_F) before being handed back.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "jcas/complex_matrix.hpp"
#include "jcas/error.hpp"

namespace jcas {

struct HermitianEig {
    std::vector<double> eigenvalues; // descending
    ComplexMatrix eigenvectors;      // column i belongs to eigenvalues[i], unit norm
};

namespace detail {

// Cyclic Jacobi on a dense symmetric matrix (row-major, n x n).  Rotations are
// accumulated into v (initialised to identity).  Converges when the
// off-diagonal Frobenius mass falls below tol_off.
inline void jacobi_symmetric(std::vector<double>& s, std::vector<double>& v, std::size_t n,
                             double tol_off) {
    auto off_norm = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * s[i * n + j] * s[i * n + j];
        return std::sqrt(acc);
    };

    for (int sweep = 0; sweep < 60; ++sweep) {
        if (off_norm() <= tol_off) return;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s[p * n + q];
                if (apq == 0.0) continue;
                const double app = s[p * n + p];
                const double aqq = s[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;

                s[p * n + p] = app - t * apq;
                s[q * n + q] = aqq + t * apq;
                s[p * n + q] = 0.0;
                s[q * n + p] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double skp = s[k * n + p];
                    const double skq = s[k * n + q];
                    s[k * n + p] = c * skp - sn * skq;
                    s[p * n + k] = s[k * n + p];
                    s[k * n + q] = sn * skp + c * skq;
                    s[q * n + k] = s[k * n + q];
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p];
                    const double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() > tol_off) throw NumericalError("hermitian_eig: Jacobi failed to converge");
}

} // namespace detail

inline HermitianEig hermitian_eig(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw DomainError("hermitian_eig: matrix not square");
    const std::size_t k = a.rows();
    if (k == 0) throw DomainError("hermitian_eig: empty matrix");
    if (!all_finite(a)) throw DomainError("hermitian_eig: non-finite input");
    const double scale = frobenius_norm(a);
    if (hermitian_deviation(a) > 1e-9 * std::max(1.0, max_abs(a)))
        throw DomainError("hermitian_eig: input is not Hermitian");

    // Real symmetric embedding.
    const std::size_t n = 2 * k;
    std::vector<double> s(n * n, 0.0), v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double re = a(i, j).real();
            const double im = a(i, j).imag();
            s[i * n + j] = re;
            s[i * n + (k + j)] = -im;
            s[(k + i) * n + j] = im;
            s[(k + i) * n + (k + j)] = re;
        }

    detail::jacobi_symmetric(s, v, n, 1e-13 * std::max(scale, 1e-300));

    // Sort the 2K real eigenpairs by descending eigenvalue.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return s[x * n + x] > s[y * n + y]; });

    // Complexify every real eigenvector: (u; v) -> u + i v.
    std::vector<std::vector<cplx>> cand(n);
    std::vector<double> lam(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t col = order[c];
        lam[c] = s[col * n + col];
        cand[c].resize(k);
        for (std::size_t r = 0; r < k; ++r) cand[c][r] = {v[r * n + col], v[(k + r) * n + col]};
    }

    // Group paired eigenvalues; each cluster of 2m real pairs yields m complex
    // eigenvectors picked by pivoted Gram-Schmidt.
    const double cluster_tol = 1e-9 * scale + 1e-300;
    HermitianEig out;
    out.eigenvalues.reserve(k);
    out.eigenvectors = ComplexMatrix(k, k);
    std::vector<std::vector<cplx>> picked;
    picked.reserve(k);

    std::size_t lo = 0;
    while (lo < n) {
        std::size_t hi = lo + 1;
        while (hi < n && lam[hi - 1] - lam[hi] <= cluster_tol) ++hi;
        const std::size_t m2 = hi - lo;
        if (m2 % 2 != 0) throw NumericalError("hermitian_eig: eigenvalue pairing failed");
        const std::size_t m = m2 / 2;

        std::vector<std::vector<cplx>> pool(cand.begin() + lo, cand.begin() + hi);
        for (std::size_t pick = 0; pick < m; ++pick) {
            std::size_t best = 0;
            double best_norm = -1.0;
            for (std::size_t c = 0; c < pool.size(); ++c) {
                const double nn = norm2(pool[c]);
                if (nn > best_norm) {
                    best_norm = nn;
                    best = c;
                }
            }
            if (best_norm < 1e-6) throw NumericalError("hermitian_eig: degenerate pair basis");
            std::vector<cplx> z = pool[best];
            const double inv = 1.0 / norm2(z);
            for (cplx& e : z) e *= inv;
            for (auto& c : pool) {
                const cplx proj = dotc(z, c);
                for (std::size_t r = 0; r < k; ++r) c[r] -= proj * z[r];
            }
            out.eigenvalues.push_back(0.5 * (lam[lo + 2 * pick] + lam[lo + 2 * pick + 1]));
            picked.push_back(std::move(z));
        }
        lo = hi;
    }
    if (picked.size() != k) throw NumericalError("hermitian_eig: wrong eigenvector count");

    // Global polish: two-pass modified Gram-Schmidt across clusters.
    for (std::size_t i = 0; i < k; ++i) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < i; ++j) {
                const cplx proj = dotc(picked[j], picked[i]);
                for (std::size_t r = 0; r < k; ++r) picked[i][r] -= proj * picked[j][r];
            }
        const double nn = norm2(picked[i]);
        if (nn < 1e-6) throw NumericalError("hermitian_eig: orthogonalisation collapse");
        const double inv = 1.0 / nn;
        for (std::size_t r = 0; r < k; ++r) out.eigenvectors(r, i) = picked[i][r] * inv;
    }

    // Validate the decomposition before returning it.
    const double tol = 1e-8 * std::max(scale, 1e-300);
    for (std::size_t i = 0; i < k; ++i) {
        double resid = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            cplx az{};
            for (std::size_t c = 0; c < k; ++c) az += a(r, c) * out.eigenvectors(c, i);
            resid += std::norm(az - out.eigenvalues[i] * out.eigenvectors(r, i));
        }
        if (std::sqrt(resid) > tol) throw NumericalError("hermitian_eig: residual check failed");
        for (std::size_t j = 0; j <= i; ++j) {
            cplx g{};
            for (std::size_t r = 0; r < k; ++r)
                g += std::conj(out.eigenvectors(r, j)) * out.eigenvectors(r, i);
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(g - want) > 1e-8)
                throw NumericalError("hermitian_eig: orthonormality check failed");
        }
    }
    return out;
}

} // namespace jcas
