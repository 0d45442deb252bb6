#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kfgm/complex2.hpp"

using namespace kfgm;

namespace {

std::mt19937_64 gen(1234);

double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

cplx rand_c() { return {2.0 * u01() - 1.0, 2.0 * u01() - 1.0}; }

Complex2x2 rand_m() { return {rand_c(), rand_c(), rand_c(), rand_c()}; }

Complex2Vector rand_v() { return {rand_c(), rand_c()}; }

}  // namespace

TEST_CASE("pauli constants square to identity exactly") {
    const Complex2x2 id = Complex2x2::identity();
    CHECK(max_abs(tau1() * tau1() - id) == 0.0);
    CHECK(max_abs(tau2() * tau2() - id) == 0.0);
    CHECK(max_abs(tau3() * tau3() - id) == 0.0);
}

TEST_CASE("pauli products") {
    CHECK(max_abs(Complex2x2::identity() * tau1() - tau1()) == 0.0);
    // tau1 tau2 = i tau3
    CHECK(max_abs(tau1() * tau2() - kI * tau3()) == 0.0);
    // tau3 + i tau2 is nilpotent
    const Complex2x2 w = tau3_plus_i_tau2();
    CHECK(max_abs(w * w) == 0.0);
}

TEST_CASE("matrix product is associative over seeded random matrices") {
    for (int i = 0; i < 200; ++i) {
        const Complex2x2 a = rand_m(), b = rand_m(), c = rand_m();
        CHECK(max_abs((a * b) * c - a * (b * c)) < 1e-14);
    }
}

TEST_CASE("det is multiplicative and involutions hold") {
    for (int i = 0; i < 200; ++i) {
        const Complex2x2 a = rand_m(), b = rand_m();
        CHECK(std::abs(det(a * b) - det(a) * det(b)) < 1e-14);
        CHECK(max_abs(adjoint(adjoint(a)) - a) == 0.0);
        CHECK(max_abs(transpose(transpose(a)) - a) == 0.0);
    }
}

TEST_CASE("unitarity predicate") {
    CHECK(is_unitary(Complex2x2::identity(), 1e-14));
    CHECK(is_unitary(tau1(), 1e-14));
    CHECK(is_unitary(tau2(), 1e-14));
    // diag(2, 1): M^dag M - 1 has max entry 3
    const Complex2x2 m{2.0, 0.0, 0.0, 1.0};
    CHECK_FALSE(is_unitary(m, 1e-6));
    CHECK(max_abs(adjoint(m) * m - Complex2x2::identity()) == doctest::Approx(3.0));
}

TEST_CASE("symmetry predicate") {
    CHECK(is_symmetric(tau1(), 0.0));
    CHECK(is_symmetric(tau3(), 0.0));
    CHECK_FALSE(is_symmetric(tau2(), 1e-6));  // antisymmetric
}

TEST_CASE("tau3 pairing values and conjugate symmetry") {
    CHECK(tau3_pairing({1.0, 0.0}, {1.0, 0.0}) == cplx{1.0, 0.0});
    CHECK(tau3_pairing({0.0, 1.0}, {0.0, 1.0}) == cplx{-1.0, 0.0});
    CHECK(tau3_pairing({1.0, 1.0}, {1.0, 1.0}) == cplx{0.0, 0.0});
    for (int i = 0; i < 100; ++i) {
        const Complex2Vector u = rand_v(), v = rand_v();
        CHECK(std::abs(tau3_pairing(u, v) - std::conj(tau3_pairing(v, u))) < 1e-15);
    }
}
