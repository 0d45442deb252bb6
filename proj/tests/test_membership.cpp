#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "kfgm/bc_families.hpp"

using namespace kfgm;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLen = 2.0 * kPi;

std::mt19937_64 gen(505);
double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
double upm() { return 2.0 * u01() - 1.0; }

using Vec4 = std::array<cplx, 4>;

cplx dot4(const Vec4& a, const Vec4& b) {
    cplx s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// Kernel of the two relation rows for a given (lambda, U): complete the
// conjugated rows to an orthonormal basis of C^4 and keep the complement.
BoundarySubspace relation_kernel(double lambda, const Complex2x2& u) {
    std::array<Vec4, 2> rows{};
    for (int col = 0; col < 4; ++col) {
        Vec4 e{};
        e[col] = 1.0;
        const Complex2Vector pp{e[0] + kI * lambda * e[2], e[1] - kI * lambda * e[3]};
        const Complex2Vector pm{e[0] - kI * lambda * e[2], e[1] + kI * lambda * e[3]};
        const Complex2Vector r = pm - u * pp;
        rows[0][col] = std::conj(r.c1);
        rows[1][col] = std::conj(r.c2);
    }
    std::vector<Vec4> basis;
    auto push = [&](Vec4 z) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : basis) {
                const cplx c = dot4(e, z);
                for (int i = 0; i < 4; ++i) z[i] -= c * e[i];
            }
        double n = 0.0;
        for (const auto& c : z) n += std::norm(c);
        n = std::sqrt(n);
        if (n > 1e-9) {
            for (auto& c : z) c /= n;
            basis.push_back(z);
        }
    };
    push(rows[0]);
    push(rows[1]);
    REQUIRE(basis.size() == 2);
    for (int col = 0; col < 4; ++col) {
        Vec4 e{};
        e[col] = 1.0;
        push(e);
    }
    REQUIRE(basis.size() == 4);
    return {{basis[2], basis[3]}};
}

Complex2x2 family_u(double theta, double n0, double n1, double n3) {
    const cplx ph{std::cos(theta), std::sin(theta)};
    return {ph * cplx{n0, -n3}, ph * cplx{0.0, -n1}, ph * cplx{0.0, -n1}, ph * cplx{n0, n3}};
}

}  // namespace

TEST_CASE("periodic relation is a family member with the component swap") {
    const auto res = kfg_family_membership(periodic_phi_subspace(), kLen);
    REQUIRE(res.has_value());
    CHECK(res->residual < 1e-10);
    CHECK(is_unitary(res->u_matrix, 1e-10));
    CHECK(std::abs(res->params.n2) < 1e-10);
    CHECK(res->params.theta == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(res->params.n1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(res->params.n0) < 1e-9);
    CHECK(std::abs(res->params.n3) < 1e-9);
    CHECK(res->params.norm_defect() < 1e-9);
}

TEST_CASE("antiperiodic relation is a family member") {
    const auto res = kfg_family_membership(antiperiodic_phi_subspace(), kLen);
    REQUIRE(res.has_value());
    CHECK(res->residual < 1e-10);
    CHECK(std::abs(res->params.n2) < 1e-10);
    CHECK(res->params.n1 == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("value-pinning relation is a family member with minus identity") {
    const auto res = kfg_family_membership(dirichlet_phi_subspace(), kLen);
    REQUIRE(res.has_value());
    CHECK(res->residual < 1e-10);
    CHECK(max_abs(res->u_matrix - cplx{-1.0, 0.0} * Complex2x2::identity()) < 1e-9);
    CHECK(res->params.n0 == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(res->params.theta == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fully pinned walls are rejected by the dimension test") {
    // Everything zero at both ends: the zero subspace, dimension 0 != 2.
    CHECK(subspace_dimension(dirichlet_neumann_phi_subspace()) == 0);
    CHECK_FALSE(kfg_family_membership(dirichlet_neumann_phi_subspace(), kLen).has_value());
}

TEST_CASE("wrong-dimension subspaces are rejected immediately") {
    BoundarySubspace one{{{cplx{1}, cplx{1}, cplx{0}, cplx{0}}}};
    CHECK(subspace_dimension(one) == 1);
    CHECK_FALSE(kfg_family_membership(one, kLen).has_value());

    BoundarySubspace three{{{cplx{1}, cplx{0}, cplx{0}, cplx{0}},
                            {cplx{0}, cplx{1}, cplx{0}, cplx{0}},
                            {cplx{0}, cplx{0}, cplx{1}, cplx{0}}}};
    CHECK(subspace_dimension(three) == 3);
    CHECK_FALSE(kfg_family_membership(three, kLen).has_value());
}

TEST_CASE("round trip: kernels of random family relations are recognised") {
    for (int trial = 0; trial < 20; ++trial) {
        // Random symmetric unitary with n2 = 0 and a random length scale.
        double n0 = upm(), n1 = upm(), n3 = upm();
        const double norm = std::sqrt(n0 * n0 + n1 * n1 + n3 * n3);
        if (norm < 1e-2) continue;
        n0 /= norm;
        n1 /= norm;
        n3 /= norm;
        const double theta = kPi * u01() * (1.0 - 1e-6);
        const double lambda = (upm() > 0 ? 1.0 : -1.0) * kLen * std::pow(10.0, -2.0 + 3.0 * u01());
        const Complex2x2 u = family_u(theta, n0, n1, n3);
        REQUIRE(is_unitary(u, 1e-12));

        const BoundarySubspace kernel = relation_kernel(lambda, u);
        const auto res = kfg_family_membership(kernel, kLen);
        REQUIRE(res.has_value());
        CHECK(res->residual < 1e-10);
        CHECK(std::abs(res->params.n2) < 1e-8);

        // The reconstructed relation must carve the same subspace: its rows
        // annihilate the kernel vectors (checked by the solver residual),
        // and the recovered matrix is again symmetric unitary.
        CHECK(is_unitary(res->u_matrix, 1e-8));
        CHECK(is_symmetric(res->u_matrix, 1e-8));
    }
}

TEST_CASE("non-member relations are rejected") {
    // phi(b) = 2 phi(a), phi'(b) = phi'(a)/3: no unitary structure.
    BoundarySubspace sub{{{cplx{2}, cplx{1}, cplx{0}, cplx{0}},
                          {cplx{0}, cplx{0}, cplx{1.0 / 3.0}, cplx{1}}}};
    CHECK(subspace_dimension(sub) == 2);
    CHECK_FALSE(kfg_family_membership(sub, kLen).has_value());
}

TEST_CASE("non-finite input raises the invalid-input signal") {
    BoundarySubspace sub{{{cplx{std::nan("")}, cplx{0}, cplx{0}, cplx{0}}}};
    CHECK_THROWS_AS(subspace_dimension(sub), std::invalid_argument);
    CHECK_THROWS_AS(kfg_family_membership(sub, kLen), std::invalid_argument);
}

TEST_CASE("classification of raw subspaces") {
    CHECK(classify_bc(periodic_phi_subspace(), kLen).kind == BcKind::GeneralPseudoSelfAdjoint);
    CHECK(classify_bc(dirichlet_phi_subspace(), kLen).kind ==
          BcKind::GeneralPseudoSelfAdjoint);
    CHECK(classify_bc(dirichlet_neumann_phi_subspace(), kLen).kind ==
          BcKind::ConfiningSeparated);
    BoundarySubspace bad{{{cplx{2}, cplx{1}, cplx{0}, cplx{0}},
                          {cplx{0}, cplx{0}, cplx{1.0 / 3.0}, cplx{1}}}};
    CHECK(classify_bc(bad, kLen).kind == BcKind::NotPseudoSelfAdjoint);
}
