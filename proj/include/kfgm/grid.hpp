#pragma once

#include <stdexcept>
#include <vector>

namespace kfgm {

/// Physical constants carried symbolically through every formula.
/// Defaults are the natural desk units hbar = m = c = 1.
struct UnitsConfig {
    double hbar = 1.0;
    double m = 1.0;
    double c = 1.0;

    void validate() const {
        if (!(hbar > 0.0) || !(m > 0.0) || !(c > 0.0))
            throw std::invalid_argument("units: hbar, m, c must all be positive");
    }

    /// Rest energy m c^2.
    double rest_energy() const { return m * c * c; }
    /// Compton angular frequency m c^2 / hbar.
    double compton_frequency() const { return m * c * c / hbar; }
};

/// Closed uniform grid on [a, b]: both endpoints stored, spacing
/// (b-a)/(n-1). Endpoint samples are directly addressable because wall
/// observables are the central objects of this library.
struct Grid {
    double a = 0.0;
    double b = 1.0;
    int n = 16;

    Grid() = default;
    Grid(double a_, double b_, int n_) : a(a_), b(b_), n(n_) {
        if (!(b > a)) throw std::invalid_argument("grid: requires b > a");
        if (n < 16) throw std::invalid_argument("grid: requires n >= 16");
    }

    double length() const { return b - a; }
    double spacing() const { return (b - a) / static_cast<double>(n - 1); }
    double x(int i) const { return a + spacing() * static_cast<double>(i); }
    /// Number of distinct samples when the two endpoints are identified.
    int distinct() const { return n - 1; }

    bool operator==(const Grid&) const = default;
};

}  // namespace kfgm
