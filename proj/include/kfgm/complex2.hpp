#pragma once

// Exact 2x2 complex matrix / 2-vector arithmetic for the Feshbach-Villars
// two-component formalism. Everything here is a plain value type; no
// allocation, no state.

#include <cmath>
#include <complex>

namespace kfgm {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

struct Complex2Vector {
    cplx c1{0.0, 0.0};
    cplx c2{0.0, 0.0};
};

struct Complex2x2 {
    cplx a11{0.0, 0.0};
    cplx a12{0.0, 0.0};
    cplx a21{0.0, 0.0};
    cplx a22{0.0, 0.0};

    static Complex2x2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Complex2x2 zero() { return {}; }
};

inline Complex2x2 operator*(const Complex2x2& a, const Complex2x2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

inline Complex2Vector operator*(const Complex2x2& a, const Complex2Vector& v) {
    return {a.a11 * v.c1 + a.a12 * v.c2, a.a21 * v.c1 + a.a22 * v.c2};
}

inline Complex2x2 operator*(const cplx& s, const Complex2x2& a) {
    return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}

inline Complex2Vector operator*(const cplx& s, const Complex2Vector& v) {
    return {s * v.c1, s * v.c2};
}

inline Complex2x2 operator+(const Complex2x2& a, const Complex2x2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}

inline Complex2x2 operator-(const Complex2x2& a, const Complex2x2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

inline Complex2Vector operator+(const Complex2Vector& a, const Complex2Vector& b) {
    return {a.c1 + b.c1, a.c2 + b.c2};
}

inline Complex2Vector operator-(const Complex2Vector& a, const Complex2Vector& b) {
    return {a.c1 - b.c1, a.c2 - b.c2};
}

inline Complex2x2 adjoint(const Complex2x2& a) {
    return {std::conj(a.a11), std::conj(a.a21), std::conj(a.a12), std::conj(a.a22)};
}

inline Complex2x2 transpose(const Complex2x2& a) {
    return {a.a11, a.a21, a.a12, a.a22};
}

inline Complex2x2 conjugate(const Complex2x2& a) {
    return {std::conj(a.a11), std::conj(a.a12), std::conj(a.a21), std::conj(a.a22)};
}

inline cplx det(const Complex2x2& a) { return a.a11 * a.a22 - a.a12 * a.a21; }

inline cplx trace(const Complex2x2& a) { return a.a11 + a.a22; }

/// Max-absolute-entry norm; the norm used by every matrix predicate here.
inline double max_abs(const Complex2x2& a) {
    return std::max(std::max(std::abs(a.a11), std::abs(a.a12)),
                    std::max(std::abs(a.a21), std::abs(a.a22)));
}

inline double max_abs(const Complex2Vector& v) {
    return std::max(std::abs(v.c1), std::abs(v.c2));
}

// Pauli matrices in the convention used throughout: tau1 = sigma_x,
// tau2 = sigma_y, tau3 = sigma_z.
inline Complex2x2 tau1() { return {0.0, 1.0, 1.0, 0.0}; }
inline Complex2x2 tau2() { return {0.0, -kI, kI, 0.0}; }
inline Complex2x2 tau3() { return {1.0, 0.0, 0.0, -1.0}; }

/// tau3 + i*tau2 = [[1,1],[-1,-1]]; nilpotent, annihilates [1,-1]^T.
/// Projects a two-component state onto its scalar (phi1+phi2) content.
inline Complex2x2 tau3_plus_i_tau2() { return {1.0, 1.0, -1.0, -1.0}; }

inline bool is_unitary(const Complex2x2& m, double tol) {
    return max_abs(adjoint(m) * m - Complex2x2::identity()) <= tol;
}

inline bool is_symmetric(const Complex2x2& m, double tol) {
    return max_abs(m - transpose(m)) <= tol;
}

/// Pointwise indefinite pairing u^dag tau3 v; the integrand of the
/// tau3-space inner product. Satisfies pairing(u,v) = conj(pairing(v,u)).
inline cplx tau3_pairing(const Complex2Vector& u, const Complex2Vector& v) {
    return std::conj(u.c1) * v.c1 - std::conj(u.c2) * v.c2;
}

}  // namespace kfgm
