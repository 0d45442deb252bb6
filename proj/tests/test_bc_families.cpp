#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kfgm/bc_families.hpp"
#include "kfgm/errors.hpp"

using namespace kfgm;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937_64 gen(77);

double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double upm() { return 2.0 * u01() - 1.0; }

NMatrixParams random_params(double m1_floor = 0.0) {
    while (true) {
        double m0 = upm(), m1 = upm(), m3 = upm();
        const double r = std::sqrt(m0 * m0 + m1 * m1 + m3 * m3);
        if (r < 1e-3) continue;
        NMatrixParams p{kPi * u01() * (1.0 - 1e-9), m0 / r, m1 / r, m3 / r};
        if (std::abs(p.m1) >= m1_floor) return p;
    }
}

cplx rand_c() { return {upm(), upm()}; }

}  // namespace

TEST_CASE("boundary matrix construction: axis cases") {
    // mu = 0, m0 = 1 gives the identity
    CHECK(max_abs(build_n_matrix({0.0, 1.0, 0.0, 0.0}) - Complex2x2::identity()) == 0.0);
    // mu = pi/2, m1 = 1 gives the component swap
    CHECK(max_abs(build_n_matrix({kPi / 2, 0.0, 1.0, 0.0}) - tau1()) < 1e-15);
}

TEST_CASE("boundary matrix rejects off-sphere parameters") {
    CHECK_THROWS_AS(build_n_matrix({0.3, 0.9, 0.9, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_n_matrix({-0.1, 1.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("boundary matrix family is unitary and symmetric with phase determinant") {
    for (int i = 0; i < 500; ++i) {
        const NMatrixParams p = random_params();
        const Complex2x2 n = build_n_matrix(p);
        CHECK(is_unitary(n, 1e-12));
        CHECK(is_symmetric(n, 1e-12));
        CHECK(std::abs(det(n) - cplx{std::cos(2 * p.mu), std::sin(2 * p.mu)}) < 1e-12);
    }
}

TEST_CASE("transfer form at mu = pi/2 collapses to +-identity") {
    // m1 = +1 is the lower (periodic) branch, m1 = -1 the upper one.
    const TransferMatrixV plus = n_to_transfer({kPi / 2, 0.0, 1.0, 0.0});
    CHECK(max_abs(plus.matrix - Complex2x2::identity()) < 1e-14);
    REQUIRE(plus.branch.has_value());
    CHECK(*plus.branch == Branch::Lower);

    const TransferMatrixV minus = n_to_transfer({kPi / 2, 0.0, -1.0, 0.0});
    CHECK(max_abs(minus.matrix - cplx{-1.0, 0.0} * Complex2x2::identity()) < 1e-14);
    REQUIRE(minus.branch.has_value());
    CHECK(*minus.branch == Branch::Upper);
}

TEST_CASE("transfer form reproduces the N-relation on random boundary data") {
    for (int i = 0; i < 200; ++i) {
        const NMatrixParams p = random_params(0.05);
        const Complex2x2 n = build_n_matrix(p);
        const TransferMatrixV v = n_to_transfer(p);
        CHECK(std::abs(det(v.matrix) - 1.0) < 1e-12);

        // Free data (phi2(b), phi1(a)); the N-relation fixes the rest.
        const Complex2Vector free{rand_c(), rand_c()};
        const Complex2Vector dep = n * free;  // (phi1(b), phi2(a))
        const Complex2Vector at_b{dep.c1, free.c1};
        const Complex2Vector at_a{free.c2, dep.c2};
        CHECK(max_abs(at_b - v.matrix * at_a) < 1e-12 * (1.0 + max_abs(at_b)));
    }
}

TEST_CASE("separated branch is flagged, not silently inverted") {
    CHECK_THROWS_AS(n_to_transfer({0.3, 1.0, 0.0, 0.0}), SeparatedBranchError);
}

TEST_CASE("flux balance residual") {
    TransferMatrixV ident;
    CHECK(flux_balance_residual(ident) == 0.0);
    CHECK(flux_balance_residual(flux_balanced_transfer(1.0, Branch::Upper)) < 1e-12);
    CHECK(flux_balance_residual(flux_balanced_transfer(1.0, Branch::Lower)) < 1e-12);

    // Generic member of the momentum family fails wall balance badly.
    const double mu = 1.0, m3 = 0.5, m0 = -std::cos(mu);
    const double m1 = std::sqrt(1.0 - m0 * m0 - m3 * m3);
    CHECK(flux_balance_residual(n_to_transfer({mu, m0, m1, m3})) > 0.1);
}

TEST_CASE("flux constraint closed form and numeric root agree") {
    const auto sols = solve_flux_constraint({kPi / 3, kPi / 2, 2.0});
    REQUIRE(sols.size() == 6);
    for (const auto& s : sols) {
        CHECK(s.params.m3 == 0.0);
        CHECK(std::abs(s.params.m0 + std::cos(s.mu)) < 1e-15);
        CHECK(s.unit_norm_defect < 1e-15);
        CHECK(s.closed_form_residual < 1e-12);
        CHECK(s.numeric_gap < 1e-6);
        CHECK(std::abs(det(s.transfer.matrix) - 1.0) < 1e-12);
    }
    // pi/3: m0 = -1/2, m1 = -+ sqrt(3)/2
    CHECK(sols[0].params.m0 == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(sols[0].params.m1 == doctest::Approx(-std::sqrt(3.0) / 2).epsilon(1e-12));
    CHECK(sols[1].params.m1 == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
    // pi/2: the +-identity pair
    CHECK(max_abs(sols[2].transfer.matrix - cplx{-1.0, 0.0} * Complex2x2::identity()) < 1e-14);
    CHECK(max_abs(sols[3].transfer.matrix - Complex2x2::identity()) < 1e-14);
}

TEST_CASE("flux constraint rejects the singular family angles") {
    CHECK_THROWS_AS(solve_flux_constraint({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_flux_constraint({kPi}), std::invalid_argument);
}

TEST_CASE("parity constraint has the single root pi/2 with +-identity survivors") {
    const ParitySolution sol = solve_parity_constraint();
    CHECK(std::abs(sol.mu - kPi / 2) < 1e-12);
    CHECK(sol.worst_residual < 1e-12);
    REQUIRE(sol.matrices.size() == 2);
    CHECK(max_abs(sol.matrices[0].matrix - cplx{-1.0, 0.0} * Complex2x2::identity()) < 1e-12);
    CHECK(max_abs(sol.matrices[1].matrix - Complex2x2::identity()) < 1e-12);

    // A candidate away from the root is rejected loudly.
    CHECK(parity_constraint_residual(kPi / 4) > 0.5);
    const Complex2x2 v = flux_balanced_transfer(kPi / 4, Branch::Upper).matrix;
    CHECK(max_abs(v * v - Complex2x2::identity()) > 0.5);
}

TEST_CASE("separated branch analysis") {
    const SeparatedBranchResult res = separated_branch_analysis();
    CHECK(res.impenetrable);

    const auto& plus = res.branches[0];
    CHECK(plus.params.m0_sign == 1);
    CHECK(plus.kfg_bc == SeparatedKfgBc::TimeDerivativeDirichletNeumann);
    CHECK(max_abs(plus.wall_b - Complex2x2{1.0, -1.0, 0.0, 0.0}) == 0.0);
    CHECK(max_abs(plus.wall_a - Complex2x2{0.0, 0.0, 1.0, -1.0}) == 0.0);
    CHECK_FALSE(plus.in_general_kfg_family);

    const auto& minus = res.branches[1];
    CHECK(minus.params.m0_sign == -1);
    CHECK(minus.kfg_bc == SeparatedKfgBc::DirichletNeumann);
    CHECK(max_abs(minus.wall_b - Complex2x2{1.0, 1.0, 0.0, 0.0}) == 0.0);
    CHECK_FALSE(minus.in_general_kfg_family);
}

TEST_CASE("classification of transfer relations") {
    CHECK(classify_bc(Complex2x2::identity()).kind == BcKind::Periodic);
    CHECK(classify_bc(cplx{-1.0, 0.0} * Complex2x2::identity()).kind == BcKind::Antiperiodic);

    const BcClass fam = classify_bc(flux_balanced_transfer(0.7, Branch::Upper));
    CHECK(fam.kind == BcKind::FluxBalanced);
    CHECK(fam.mu == doctest::Approx(0.7).epsilon(1e-9));
    REQUIRE(fam.branch.has_value());
    CHECK(*fam.branch == Branch::Upper);

    // Generic momentum-family member: pseudo self-adjoint but not balanced.
    const double mu = 1.1, m3 = 0.4, m0 = 0.2;
    const double m1 = std::sqrt(1.0 - m0 * m0 - m3 * m3);
    CHECK(classify_bc(n_to_transfer({mu, m0, m1, m3})).kind ==
          BcKind::GeneralPseudoSelfAdjoint);

    // Random non-unitary relation.
    const Complex2x2 bad{cplx{1.7, 0.2}, cplx{0.1, 0.0}, cplx{0.0, 0.3}, cplx{0.4, 0.0}};
    CHECK(classify_bc(bad).kind == BcKind::NotPseudoSelfAdjoint);
}

TEST_CASE("classification is representation independent") {
    for (int i = 0; i < 100; ++i) {
        const NMatrixParams p = random_params(0.05);
        const TransferMatrixV tagged = n_to_transfer(p);
        const BcClass via_tagged = classify_bc(tagged);
        const BcClass via_raw = classify_bc(tagged.matrix);  // no metadata attached
        CHECK(via_tagged.kind == via_raw.kind);
        if (via_tagged.kind == BcKind::FluxBalanced)
            CHECK(via_tagged.mu == doctest::Approx(via_raw.mu).epsilon(1e-9));
    }
}

TEST_CASE("transfer inversion recovers the generating parameters") {
    for (int i = 0; i < 100; ++i) {
        const NMatrixParams p = random_params(0.05);
        const auto q = transfer_to_n(n_to_transfer(p).matrix);
        REQUIRE(q.has_value());
        CHECK(max_abs(build_n_matrix(*q) - build_n_matrix(p)) < 1e-9);
    }
}

TEST_CASE("Schroedinger baseline keeps exactly the phases 0 and pi") {
    const auto phases = schrodinger_parity_restriction();
    REQUIRE(phases.size() == 2);
    CHECK(std::abs(phases[0]) < 1e-12);
    CHECK(std::abs(phases[1] - kPi) < 1e-12);
    // pi/3 is rejected: e^{2 i theta} is far from 1 there.
    CHECK(std::abs(cplx{std::cos(2 * kPi / 3), std::sin(2 * kPi / 3)} - cplx{1.0, 0.0}) > 1.0);
}
