#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfgm/solvers.hpp"
#include "kfgm/states.hpp"

using namespace kfgm;

namespace {

constexpr double kPi = std::numbers::pi;
const UnitsConfig kUnits{};
const Grid kGrid{0.0, 2.0 * kPi, 257};  // odd n: the midpoint sample exists

std::vector<cplx> sampled(const Grid& g, auto&& f) {
    std::vector<cplx> out(g.n);
    for (int i = 0; i < g.n; ++i) out[i] = f(g.x(i));
    return out;
}

double state_distance(const FvState& a, const FvState& b) {
    double worst = 0.0;
    for (int i = 0; i < a.grid.n; ++i)
        worst = std::max({worst, std::abs(a.phi1[i] - b.phi1[i]),
                          std::abs(a.phi2[i] - b.phi2[i])});
    return worst;
}

}  // namespace

TEST_CASE("one-sided stencils are exact on quadratics") {
    const Grid g(0.0, 1.0, 33);
    const auto f = sampled(g, [](double x) { return cplx{3.0 * x * x - x + 2.0, 0.0}; });
    const auto d1 = derivative(f, g, WrapKind::None);
    const auto d2 = second_derivative(f, g, WrapKind::None);
    for (int i : {0, 1, g.n / 2, g.n - 2, g.n - 1}) {
        CHECK(std::abs(d1[i] - cplx{6.0 * g.x(i) - 1.0, 0.0}) < 1e-11);
        CHECK(std::abs(d2[i] - cplx{6.0, 0.0}) < 1e-9);
    }
}

TEST_CASE("wraparound derivatives converge at second order on trig modes") {
    double prev = 0.0;
    for (int n : {65, 129, 257}) {
        const Grid g(0.0, 2.0 * kPi, n);
        const auto f = sampled(g, [](double x) { return cplx{std::cos(3.0 * x), 0.0}; });
        const auto d2 = second_derivative(f, g, WrapKind::Periodic);
        double err = 0.0;
        for (int i = 0; i < g.n; ++i)
            err = std::max(err, std::abs(d2[i] + 9.0 * std::cos(3.0 * g.x(i))));
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("charge conjugation: involution and Majorana fixed points") {
    const FvState st = random_state(5, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 3, kUnits);
    CHECK(state_distance(charge_conjugate(st), st) == 0.0);  // plus states are fixed
    CHECK(state_distance(charge_conjugate(charge_conjugate(st)), st) == 0.0);

    const FvState mn =
        random_state(6, kGrid, WrapKind::Periodic, MajoranaSign::Minus, 3, kUnits);
    FvState negated = mn;
    for (int i = 0; i < kGrid.n; ++i) {
        negated.phi1[i] = -negated.phi1[i];
        negated.phi2[i] = -negated.phi2[i];
    }
    CHECK(state_distance(charge_conjugate(mn), negated) == 0.0);
}

TEST_CASE("majorana enforcement") {
    const auto ones = sampled(kGrid, [](double) { return cplx{1.0, 0.0}; });
    const FvState st = enforce_majorana(kGrid, ones, MajoranaSign::Plus);
    for (int i = 0; i < kGrid.n; ++i) CHECK(st.phi2[i] == cplx{1.0, 0.0});

    const auto wave = sampled(kGrid, [](double x) { return cplx{std::cos(x), std::sin(x)}; });
    const FvState wv = enforce_majorana(kGrid, wave, MajoranaSign::Plus);
    for (int i = 0; i < kGrid.n; ++i) CHECK(wv.phi2[i] == std::conj(wv.phi1[i]));
}

TEST_CASE("parity transform geometry") {
    const FvState st =
        random_state(7, kGrid, WrapKind::Antiperiodic, MajoranaSign::Plus, 4, kUnits);
    const FvState p = parity_transform(st);
    CHECK(state_distance(parity_transform(p), st) == 0.0);          // involution
    CHECK(p.phi1[kGrid.n / 2] == st.phi1[kGrid.n / 2]);             // midpoint fixed
    CHECK(p.phi1.front() == st.phi1.back());                        // endpoint swap
    CHECK(p.phi1.back() == st.phi1.front());

    // (reflected)' = -(original)' mirrored, exactly on the stencils.
    const auto dp = derivative(p.phi1, kGrid, WrapKind::None);
    const auto d = derivative(st.phi1, kGrid, WrapKind::None);
    for (int i = 0; i < kGrid.n; ++i)
        CHECK(std::abs(dp[i] + d[kGrid.n - 1 - i]) < 1e-13);
}

TEST_CASE("parity commutes with Majorana enforcement") {
    const auto wave =
        sampled(kGrid, [](double x) { return cplx{std::cos(2 * x), std::sin(x)}; });
    auto reversed = wave;
    std::reverse(reversed.begin(), reversed.end());
    const FvState a = parity_transform(enforce_majorana(kGrid, wave, MajoranaSign::Minus));
    const FvState b = enforce_majorana(kGrid, reversed, MajoranaSign::Minus);
    CHECK(state_distance(a, b) == 0.0);
}

TEST_CASE("two-component map from the one-component state") {
    KfgState kfg;
    kfg.grid = kGrid;
    kfg.sign = MajoranaSign::Plus;
    kfg.wrap = WrapKind::Periodic;
    kfg.phi = sampled(kGrid, [](double x) { return cplx{std::cos(x), 0.0}; });
    kfg.phi_dot.assign(kGrid.n, cplx{});
    const FvState fv = fv_from_kfg(kfg, kUnits);
    for (int i = 0; i < kGrid.n; ++i) {
        CHECK(fv.phi1[i] == 0.5 * kfg.phi[i]);
        CHECK(fv.phi2[i] == fv.phi1[i]);
    }

    // Round trip through the scalar content.
    const auto phi = kfg_from_fv(fv);
    for (int i = 0; i < kGrid.n; ++i) CHECK(std::abs(phi[i] - kfg.phi[i]) < 1e-15);
}

TEST_CASE("stationary mode weights: phi1 carries (1 + E/mc^2)/2") {
    const double k = 2.0;
    const double e = dispersion_energy(k, kUnits);
    KfgState kfg;
    kfg.grid = kGrid;
    kfg.wrap = WrapKind::Periodic;
    kfg.phi = sampled(kGrid, [&](double x) { return cplx{std::cos(k * x), std::sin(k * x)}; });
    kfg.phi_dot.resize(kGrid.n);
    for (int i = 0; i < kGrid.n; ++i)
        kfg.phi_dot[i] = -kI * (e / kUnits.hbar) * kfg.phi[i];  // E phi = E phi
    const FvState fv = fv_from_kfg(kfg, kUnits);
    const double eta = e / kUnits.rest_energy();
    for (int i = 0; i < kGrid.n; i += 37)
        CHECK(std::abs(fv.phi1[i] - 0.5 * (1.0 + eta) * kfg.phi[i]) < 1e-14);
}

TEST_CASE("round trip with the rate recovered from the component split") {
    const FvState st =
        random_state(11, kGrid, WrapKind::Antiperiodic, MajoranaSign::Plus, 4, kUnits);
    // phi1 - phi2 = i hbar phi_dot / (m c^2)
    KfgState back;
    back.grid = kGrid;
    back.sign = st.sign;
    back.wrap = st.wrap;
    back.phi = kfg_from_fv(st);
    back.phi_dot.resize(kGrid.n);
    const cplx f = kUnits.rest_energy() / (kI * kUnits.hbar);
    for (int i = 0; i < kGrid.n; ++i) back.phi_dot[i] = f * (st.phi1[i] - st.phi2[i]);
    CHECK(state_distance(fv_from_kfg(back, kUnits), st) < 1e-13);
}

TEST_CASE("reality classes of the scalar content are exact") {
    const FvState plus =
        random_state(21, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    for (const auto& v : kfg_from_fv(plus)) CHECK(v.imag() == 0.0);
    const FvState minus =
        random_state(22, kGrid, WrapKind::Periodic, MajoranaSign::Minus, 4, kUnits);
    for (const auto& v : kfg_from_fv(minus)) CHECK(v.real() == 0.0);
}

TEST_CASE("momentum operator: constants, plane waves, linearity") {
    const auto ones = sampled(kGrid, [](double) { return cplx{1.0, 0.0}; });
    FvState st = enforce_majorana(kGrid, ones, MajoranaSign::Plus, WrapKind::Periodic);
    const FvState p = apply_momentum(st, kUnits);
    for (int i = 0; i < kGrid.n; ++i) CHECK(std::abs(p.phi1[i]) < 1e-13);

    // e^{ikx} eigenfunction within O(h^2), verified by a convergence sweep.
    double prev = 0.0;
    for (int n : {65, 129, 257}) {
        const Grid g(0.0, 2.0 * kPi, n);
        FvState wave;
        wave.grid = g;
        wave.wrap = WrapKind::Periodic;
        wave.phi1 = sampled(g, [](double x) { return cplx{std::cos(2 * x), std::sin(2 * x)}; });
        wave.phi2 = wave.phi1;
        const FvState pw = apply_momentum(wave, kUnits);
        double err = 0.0;
        for (int i = 0; i < g.n; ++i)
            err = std::max(err, std::abs(pw.phi1[i] - 2.0 * kUnits.hbar * wave.phi1[i]));
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }

    const FvState a = random_state(31, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    const FvState b = random_state(32, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    FvState sum = a;
    for (int i = 0; i < kGrid.n; ++i) {
        sum.phi1[i] = a.phi1[i] + 2.0 * b.phi1[i];
        sum.phi2[i] = a.phi2[i] + 2.0 * b.phi2[i];
    }
    const FvState pa = apply_momentum(a, kUnits);
    const FvState pb = apply_momentum(b, kUnits);
    const FvState ps = apply_momentum(sum, kUnits);
    double worst = 0.0;
    for (int i = 0; i < kGrid.n; ++i)
        worst = std::max(worst, std::abs(ps.phi1[i] - pa.phi1[i] - 2.0 * pb.phi1[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("hamiltonian on constant spinors") {
    const double rest = kUnits.rest_energy();
    const auto ones = sampled(kGrid, [](double) { return cplx{1.0, 0.0}; });
    const auto zeros = sampled(kGrid, [](double) { return cplx{0.0, 0.0}; });

    FvState up;
    up.grid = kGrid;
    up.phi1 = ones;
    up.phi2 = zeros;
    const FvState hu = apply_fv_hamiltonian(up, kUnits);
    for (int i = 0; i < kGrid.n; ++i) {
        CHECK(std::abs(hu.phi1[i] - rest) < 1e-12);
        CHECK(std::abs(hu.phi2[i]) < 1e-12);
    }

    FvState down;
    down.grid = kGrid;
    down.phi1 = zeros;
    down.phi2 = ones;
    const FvState hd = apply_fv_hamiltonian(down, kUnits);
    for (int i = 0; i < kGrid.n; ++i) {
        CHECK(std::abs(hd.phi1[i]) < 1e-12);
        CHECK(std::abs(hd.phi2[i] + rest) < 1e-12);
    }
}

TEST_CASE("hamiltonian eigenpair residual shrinks at second order") {
    double prev = 0.0;
    for (int n : {65, 129, 257}) {
        const Grid g(0.0, 2.0 * kPi, n);
        const double k = 2.0;
        const double e = dispersion_energy(k, kUnits);
        KfgState kfg;
        kfg.grid = g;
        kfg.wrap = WrapKind::Periodic;
        kfg.phi = sampled(g, [&](double x) { return cplx{std::cos(k * x), std::sin(k * x)}; });
        kfg.phi_dot.resize(g.n);
        for (int i = 0; i < g.n; ++i) kfg.phi_dot[i] = -kI * (e / kUnits.hbar) * kfg.phi[i];
        const FvState mode = fv_from_kfg(kfg, kUnits);
        const FvState h = apply_fv_hamiltonian(mode, kUnits);
        double err = 0.0;
        for (int i = 0; i < g.n; ++i)
            err = std::max({err, std::abs(h.phi1[i] - e * mode.phi1[i]),
                            std::abs(h.phi2[i] - e * mode.phi2[i])});
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("domain check distinguishes matching and mismatched relations") {
    const FvState per =
        random_state(41, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    const Complex2x2 id = Complex2x2::identity();
    const DomainResiduals ok = hamiltonian_domain_check(per, id);
    CHECK(ok.value < 1e-12);
    CHECK(ok.derivative < 1e-12);

    const FvState anti =
        random_state(42, kGrid, WrapKind::Antiperiodic, MajoranaSign::Plus, 4, kUnits);
    const DomainResiduals bad = hamiltonian_domain_check(anti, id);
    CHECK(bad.value > 1e-3);
}

TEST_CASE("seeded state factory: determinism and construction guarantees") {
    const FvState a = random_state(99, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    const FvState b = random_state(99, kGrid, WrapKind::Periodic, MajoranaSign::Plus, 4, kUnits);
    CHECK(state_distance(a, b) == 0.0);  // bit identical

    for (int i = 0; i < kGrid.n; ++i)
        CHECK(std::norm(a.phi1[i]) - std::norm(a.phi2[i]) == 0.0);  // rho = 0 samplewise

    CHECK_THROWS_AS(
        random_state(1, kGrid, WrapKind::None, MajoranaSign::Plus, 4, kUnits),
        std::invalid_argument);

    // max-amplitude normalisation of the scalar content
    double peak = 0.0;
    for (const auto& v : kfg_from_fv(a)) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid(1.0, 0.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(Grid(0.0, 1.0, 8), std::invalid_argument);
    CHECK(Grid(0.0, 1.0, 17).spacing() == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("the energy image of a domain state satisfies the same relation") {
    const KfgState st =
        random_kfg_state(55, kGrid, WrapKind::Antiperiodic, MajoranaSign::Plus, 4, kUnits);
    const Complex2x2 v = cplx{-1.0, 0.0} * Complex2x2::identity();

    // Stationary-style route: E Phi = i hbar Phi_dot from the on-shell rate.
    FvState e_st = fv_from_kfg(exact_rate_state(st, WrapKind::Antiperiodic, kUnits), kUnits);
    for (int i = 0; i < kGrid.n; ++i) {
        e_st.phi1[i] *= kI * kUnits.hbar;
        e_st.phi2[i] *= kI * kUnits.hbar;
    }
    const DomainResiduals exact_route = hamiltonian_domain_check(e_st, v);
    CHECK(exact_route.value < 1e-10);
    CHECK(exact_route.derivative < 1e-10);

    // History route: centred time difference across exact snapshots.
    const double dt = 1e-3;
    const KfgState fwd = evolve_spectral_exact(st, dt, WrapKind::Antiperiodic, kUnits);
    const KfgState bwd = evolve_spectral_exact(st, -dt, WrapKind::Antiperiodic, kUnits);
    FvState diff;
    diff.grid = kGrid;
    diff.wrap = WrapKind::Antiperiodic;
    diff.phi1.resize(kGrid.n);
    diff.phi2.resize(kGrid.n);
    const FvState f_fwd = fv_from_kfg(fwd, kUnits);
    const FvState f_bwd = fv_from_kfg(bwd, kUnits);
    for (int i = 0; i < kGrid.n; ++i) {
        diff.phi1[i] = kI * kUnits.hbar * (f_fwd.phi1[i] - f_bwd.phi1[i]) / (2.0 * dt);
        diff.phi2[i] = kI * kUnits.hbar * (f_fwd.phi2[i] - f_bwd.phi2[i]) / (2.0 * dt);
    }
    const DomainResiduals history_route = hamiltonian_domain_check(diff, v);
    CHECK(history_route.value < 1e-10);
    CHECK(history_route.derivative < 1e-10);
}
