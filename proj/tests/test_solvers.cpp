#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kfgm/errors.hpp"
#include "kfgm/solvers.hpp"

using namespace kfgm;

namespace {

constexpr double kPi = std::numbers::pi;
const UnitsConfig kUnits{};
const Grid kGrid{0.0, 2.0 * kPi, 256};

}  // namespace

TEST_CASE("dispersion relation basics") {
    CHECK(dispersion_energy(0.0, kUnits) == kUnits.rest_energy());
    // Antiperiodic ground mode on a 2 pi interval: k = 1/2.
    const double e = dispersion_energy(0.5, kUnits);
    CHECK(e == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    CHECK(wavenumber_from_energy(e, kUnits) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("closed-form spectra") {
    const SpectrumResult per = analytic_spectrum(WrapKind::Periodic, 3, kGrid, kUnits);
    REQUIRE(per.entries.size() == 4);
    CHECK(per.entries[0].k == 0.0);
    CHECK(per.entries[0].e_plus == kUnits.rest_energy());
    CHECK(per.entries[0].e_minus == -kUnits.rest_energy());
    CHECK(per.entries[2].k == doctest::Approx(2.0).epsilon(1e-14));

    const SpectrumResult anti = analytic_spectrum(WrapKind::Antiperiodic, 3, kGrid, kUnits);
    CHECK(anti.entries[0].k == doctest::Approx(0.5).epsilon(1e-14));
    for (const auto& entry : anti.entries) {
        CHECK(entry.k > 0.0);  // no rest mode in the half-integer family
        CHECK(entry.e_plus == -entry.e_minus);
        CHECK(entry.e_plus >= kUnits.rest_energy());
        CHECK(entry.flux_residual < 1e-9);
        CHECK(entry.domain_residual < 1e-9);
    }
}

TEST_CASE("dense stencil oracle vs closed form, with convergence order") {
    for (WrapKind bc : {WrapKind::Periodic, WrapKind::Antiperiodic}) {
        double prev = 0.0;
        for (int n : {101, 201, 401}) {
            const Grid g(0.0, 2.0 * kPi, n);
            const auto eig = fd_eigensolver(bc, g);
            const SpectrumResult an = analytic_spectrum(bc, 2, g, kUnits);
            double worst = 0.0;
            // Compare the lowest 5 stencil eigenvalues against the closed
            // k^2 values, respecting the double degeneracy.
            std::vector<double> expected;
            for (const auto& e : an.entries) {
                expected.push_back(e.k * e.k);
                if (e.k > 0.0) expected.push_back(e.k * e.k);
            }
            std::sort(expected.begin(), expected.end());
            for (int i = 0; i < 5; ++i) {
                const double denom = std::max(1.0, expected[i]);
                worst = std::max(worst, std::abs(eig[i] - expected[i]) / denom);
            }
            if (n >= 401) CHECK(worst < 1e-3);  // the desk-scale accuracy target
            if (prev > 0.0) CHECK(std::log2(prev / worst) > 1.9);
            prev = worst;
        }
    }
    CHECK_THROWS_AS(fd_eigensolver(WrapKind::Periodic, Grid(0.0, 1.0, 601)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fd_eigensolver(WrapKind::None, kGrid), std::invalid_argument);
}

TEST_CASE("jacobi on a known matrix") {
    const auto eig = jacobi_eigenvalues({2.0, 1.0, 1.0, 2.0}, 2);
    CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("quantization probe separates the family angles") {
    // At the parity angle the periodic energies are exact kernel points.
    const double e1 = dispersion_energy(1.0, kUnits);
    const auto at_half_pi = quantization_residual(kPi / 2, Branch::Lower, e1, kGrid, kUnits);
    CHECK(std::abs(at_half_pi.determinant) < 1e-10);
    CHECK_FALSE(at_half_pi.evanescent);

    // The opposite branch rejects those energies...
    const auto mismatched = quantization_residual(kPi / 2, Branch::Upper, e1, kGrid, kUnits);
    CHECK(std::abs(mismatched.determinant) > 1e-3);

    // ...and a generic family angle rejects every propagating energy: its
    // transfer matrix is a defective Jordan block whose only eigenvector
    // the stationary two-component structure can never reach.
    double smallest = 1e300;
    for (double k = 0.05; k < 5.0; k += 0.05) {
        const auto probe =
            quantization_residual(1.0, Branch::Lower, dispersion_energy(k, kUnits), kGrid,
                                  kUnits);
        smallest = std::min(smallest, std::abs(probe.determinant));
    }
    CHECK(smallest > 1e-4);

    // Below the mass gap the hyperbolic basis is used and flagged.
    const auto evan = quantization_residual(1.0, Branch::Lower, 0.5, kGrid, kUnits);
    CHECK(evan.evanescent);
    CHECK(std::abs(evan.determinant) > 1e-6);
}

TEST_CASE("family solver reproduces the surviving spectra at the parity angle") {
    const double e_hi = dispersion_energy(4.6, kUnits);
    const SpectrumResult lower =
        solve_modes_family(kPi / 2, Branch::Lower, 0.5, e_hi, kGrid, kUnits);
    const SpectrumResult per = analytic_spectrum(WrapKind::Periodic, 4, kGrid, kUnits);
    REQUIRE(lower.entries.size() == per.entries.size());
    for (std::size_t i = 0; i < lower.entries.size(); ++i) {
        CHECK(std::abs(lower.entries[i].e_plus - per.entries[i].e_plus) < 1e-9);
        CHECK(lower.entries[i].flux_residual < 1e-9);
        CHECK(lower.entries[i].domain_residual < 1e-9);
        const auto probe = quantization_residual(kPi / 2, Branch::Lower,
                                                 lower.entries[i].e_plus, kGrid, kUnits);
        CHECK(std::abs(probe.determinant) < 1e-10);
    }

    const SpectrumResult upper =
        solve_modes_family(kPi / 2, Branch::Upper, 0.5, e_hi, kGrid, kUnits);
    const SpectrumResult anti = analytic_spectrum(WrapKind::Antiperiodic, 4, kGrid, kUnits);
    REQUIRE(upper.entries.size() == anti.entries.size());
    for (std::size_t i = 0; i < upper.entries.size(); ++i)
        CHECK(std::abs(upper.entries[i].e_plus - anti.entries[i].e_plus) < 1e-9);
}

TEST_CASE("family solver returns empty away from the parity angle") {
    const double e_hi = dispersion_energy(4.6, kUnits);
    for (double mu : {0.5, 1.0, 2.5}) {
        for (Branch br : {Branch::Upper, Branch::Lower}) {
            const SpectrumResult res = solve_modes_family(mu, br, 0.5, e_hi, kGrid, kUnits);
            CHECK(res.entries.empty());
        }
    }
    // An empty window is also just an empty result.
    CHECK(solve_modes_family(kPi / 2, Branch::Lower, 2.0, 1.0, kGrid, kUnits).entries.empty());
}

TEST_CASE("travelling modes carry the closed-form wall flux") {
    const double k = 2.0;
    const KfgState mode = traveling_mode(k, kGrid, kUnits, MajoranaSign::Plus);
    CHECK(mode.wrap == WrapKind::Periodic);
    const FvState fv = fv_from_kfg(mode, kUnits);
    const FvState rate = fv_rate_from_kfg(mode, kUnits);
    const ObservableField jen = energy_current_j_en(fv, rate, kUnits);
    const double w = dispersion_energy(k, kUnits) / kUnits.hbar;
    CHECK(jen.at_a().real() ==
          doctest::Approx(2.0 * kUnits.hbar * kUnits.hbar * k * w / kUnits.m).epsilon(1e-3));
}
