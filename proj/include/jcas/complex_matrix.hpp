// Dense row-major complex matrix plus the few linear-algebra helpers the
// library needs (norms, products, Hermitian checks, 1-D least squares).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "jcas/error.hpp"

namespace jcas {

using cplx = std::complex<double>;

class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), v_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return v_.size(); }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return v_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return v_[r * cols_ + c]; }

    cplx* data() noexcept { return v_.data(); }
    const cplx* data() const noexcept { return v_.data(); }

    std::span<cplx> row(std::size_t r) noexcept { return {v_.data() + r * cols_, cols_}; }
    std::span<const cplx> row(std::size_t r) const noexcept { return {v_.data() + r * cols_, cols_}; }

    bool operator==(const ComplexMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> v_;
};

inline double frobenius_norm(const ComplexMatrix& m) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += std::norm(m.data()[i]);
    return std::sqrt(s);
}

inline double max_abs(const ComplexMatrix& m) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s = std::max(s, std::abs(m.data()[i]));
    return s;
}

inline bool all_finite(const ComplexMatrix& m) noexcept {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
    return true;
}

// max_ij |A_ij - conj(A_ji)|; zero for exactly Hermitian input.
inline double hermitian_deviation(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw DomainError("hermitian_deviation: matrix not square");
    double dev = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            dev = std::max(dev, std::abs(m(i, j) - std::conj(m(j, i))));
    return dev;
}

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw DomainError("matmul: inner dimensions differ");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const cplx ail = a(i, l);
            if (ail == cplx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += ail * b(l, j);
        }
    return out;
}

inline std::vector<cplx> matvec(const ComplexMatrix& a, std::span<const cplx> x) {
    if (a.cols() != x.size()) throw DomainError("matvec: dimension mismatch");
    std::vector<cplx> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx s{};
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        out[i] = s;
    }
    return out;
}

// Unconjugated dot product sum_k a_k * b_k.
inline cplx dotu(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw DomainError("dotu: length mismatch");
    cplx s{};
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// Conjugated dot product sum_k conj(a_k) * b_k.
inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw DomainError("dotc: length mismatch");
    cplx s{};
    for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
    return s;
}

inline double norm2(std::span<const cplx> a) noexcept {
    double s = 0.0;
    for (const cplx& z : a) s += std::norm(z);
    return std::sqrt(s);
}

// Least-squares scalar for b ~ psi * a: psi = (a^H b) / (a^H a).
// Errors out when a has zero energy (the fit is undefined).
inline cplx least_squares_1d(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw DomainError("least_squares_1d: length mismatch");
    if (a.empty()) throw DomainError("least_squares_1d: empty input");
    cplx num{};
    double den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += std::conj(a[k]) * b[k];
        den += std::norm(a[k]);
    }
    if (den == 0.0) throw DomainError("least_squares_1d: reference vector has zero energy");
    return num / den;
}

} // namespace jcas
