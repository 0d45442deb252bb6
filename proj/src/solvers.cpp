#include "kfgm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "kfgm/errors.hpp"
#include "kfgm/observables.hpp"

namespace kfgm {

namespace {

constexpr double kPi = std::numbers::pi;

// Real carrier of a Majorana one-component field: the real part for the
// plus class, the imaginary part for minus.
std::vector<double> carrier(const std::vector<cplx>& f, MajoranaSign sign) {
    std::vector<double> out(f.size());
    if (sign == MajoranaSign::Minus)
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].imag();
    else
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
    return out;
}

std::vector<cplx> uncarrier(const std::vector<double>& u, MajoranaSign sign) {
    std::vector<cplx> out(u.size());
    if (sign == MajoranaSign::Minus)
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = cplx{0.0, u[i]};
    else
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = cplx{u[i], 0.0};
    return out;
}

double wrap_sign(WrapKind w) { return w == WrapKind::Antiperiodic ? -1.0 : 1.0; }

WrapKind infer_wrap(double k, double length) {
    const double per = k * length / (2.0 * kPi);
    const double anti = (k * length / kPi - 1.0) / 2.0;
    if (std::abs(per - std::round(per)) < 1e-9) return WrapKind::Periodic;
    if (std::abs(anti - std::round(anti)) < 1e-9) return WrapKind::Antiperiodic;
    return WrapKind::None;
}

}  // namespace

double dispersion_energy(double k, const UnitsConfig& units) {
    const double rest = units.rest_energy();
    const double hck = units.hbar * units.c * k;
    return std::sqrt(rest * rest + hck * hck);
}

double wavenumber_from_energy(double e, const UnitsConfig& units) {
    const double rest = units.rest_energy();
    const double s = e * e - rest * rest;
    if (s <= 0.0) return 0.0;
    return std::sqrt(s) / (units.hbar * units.c);
}

KfgState traveling_mode(double k, const Grid& grid, const UnitsConfig& units, MajoranaSign sign) {
    units.validate();
    const double w = dispersion_energy(k, units) / units.hbar;
    KfgState s;
    s.grid = grid;
    s.sign = sign;
    s.wrap = infer_wrap(k, grid.length());
    s.phi.resize(grid.n);
    s.phi_dot.resize(grid.n);
    const bool imag = sign == MajoranaSign::Minus;
    for (int i = 0; i < grid.n; ++i) {
        const double ph = k * (grid.x(i) - grid.a);
        const double u = 2.0 * std::cos(ph);
        const double v = 2.0 * w * std::sin(ph);
        s.phi[i] = imag ? cplx{0.0, u} : cplx{u, 0.0};
        s.phi_dot[i] = imag ? cplx{0.0, v} : cplx{v, 0.0};
    }
    return s;
}

namespace {

// Wall residuals measured on the assembled travelling mode.
void attach_mode_residuals(SpectrumEntry& entry, const Grid& grid, const UnitsConfig& units,
                           const Complex2x2& v) {
    const KfgState mode = traveling_mode(entry.k, grid, units, MajoranaSign::Plus);
    const FvState state = fv_from_kfg(mode, units);
    const FvState rate = fv_rate_from_kfg(mode, units);
    const ObservableField jen = energy_current_j_en(state, rate, units);
    entry.flux_residual = std::abs(jen.at_b() - jen.at_a());
    const DomainResiduals dom = hamiltonian_domain_check(state, v);
    entry.domain_residual = std::max(dom.value, dom.derivative);
}

}  // namespace

SpectrumResult analytic_spectrum(WrapKind bc, int n_max, const Grid& grid,
                                 const UnitsConfig& units) {
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument("analytic spectrum: bc must be periodic or antiperiodic");
    if (n_max < 1) throw std::invalid_argument("analytic spectrum: n_max must be >= 1");
    const double sign = wrap_sign(bc);
    const Complex2x2 v = cplx{sign, 0.0} * Complex2x2::identity();
    SpectrumResult res;
    for (int n = 0; n <= n_max; ++n) {
        SpectrumEntry e;
        e.n = n;
        e.k = bc == WrapKind::Periodic ? 2.0 * kPi * n / grid.length()
                                       : (2.0 * n + 1.0) * kPi / grid.length();
        e.e_plus = dispersion_energy(e.k, units);
        e.e_minus = -e.e_plus;
        attach_mode_residuals(e, grid, units, v);
        res.entries.push_back(e);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Quantization under the flux-balanced family
// ---------------------------------------------------------------------------

namespace {

struct BasisValues {
    // boundary data of the two spatial basis functions
    cplx f_a[2], f_b[2], df_a[2], df_b[2];
    double deriv_scale;
};

BasisValues stationary_basis(double e, const Grid& grid, const UnitsConfig& units,
                             bool& evanescent) {
    const double rest = units.rest_energy();
    const double L = grid.length();
    BasisValues b{};
    evanescent = std::abs(e) <= rest;
    if (!evanescent) {
        const double k = wavenumber_from_energy(e, units);
        b.f_a[0] = 1.0;
        b.f_b[0] = std::cos(k * L);
        b.df_a[0] = 0.0;
        b.df_b[0] = -k * std::sin(k * L);
        b.f_a[1] = 0.0;
        b.f_b[1] = std::sin(k * L);
        b.df_a[1] = k;
        b.df_b[1] = k * std::cos(k * L);
        b.deriv_scale = std::max(k, 1.0 / L);
    } else {
        const double kappa =
            std::sqrt(std::max(0.0, rest * rest - e * e)) / (units.hbar * units.c);
        if (kappa * L < 1e-12) {
            // Degenerate |E| = mc^2 point: constant and linear shapes.
            b.f_a[0] = 1.0; b.f_b[0] = 1.0; b.df_a[0] = 0.0; b.df_b[0] = 0.0;
            b.f_a[1] = 0.0; b.f_b[1] = 1.0; b.df_a[1] = 1.0 / L; b.df_b[1] = 1.0 / L;
            b.deriv_scale = 1.0 / L;
        } else {
            b.f_a[0] = 1.0; b.f_b[0] = std::cosh(kappa * L);
            b.df_a[0] = 0.0; b.df_b[0] = kappa * std::sinh(kappa * L);
            b.f_a[1] = 0.0; b.f_b[1] = std::sinh(kappa * L);
            b.df_a[1] = kappa; b.df_b[1] = kappa * std::cosh(kappa * L);
            b.deriv_scale = std::max(kappa, 1.0 / L);
        }
    }
    return b;
}

}  // namespace

QuantizationProbe quantization_residual(double mu, Branch branch, double e, const Grid& grid,
                                        const UnitsConfig& units) {
    units.validate();
    const Complex2x2 v = flux_balanced_transfer(mu, branch).matrix;
    bool evanescent = false;
    const BasisValues bs = stationary_basis(e, grid, units, evanescent);

    // Stationary two-component structure: Phi = phi(x) * w with
    // w = ((1+eta)/2, (1-eta)/2), eta = E / mc^2; normalised for scaling.
    const double eta = e / units.rest_energy();
    Complex2Vector w{0.5 * (1.0 + eta), 0.5 * (1.0 - eta)};
    const double wn = std::sqrt(std::norm(w.c1) + std::norm(w.c2));
    w = (1.0 / wn) * w;
    const Complex2Vector vw = v * w;

    // Four scalar conditions on the two basis coefficients: rows 0,1 from
    // the value relation, rows 2,3 (derivative-scaled) from the slope one.
    cplx m[4][2];
    for (int c = 0; c < 2; ++c) {
        const Complex2Vector value = bs.f_b[c] * w - bs.f_a[c] * vw;
        const Complex2Vector slope =
            (1.0 / bs.deriv_scale) * (bs.df_b[c] * w - bs.df_a[c] * vw);
        m[0][c] = value.c1;
        m[1][c] = value.c2;
        m[2][c] = slope.c1;
        m[3][c] = slope.c2;
    }
    // Gram determinant of the 4x2 system: zero exactly when the two basis
    // coefficients admit a nontrivial kernel, i.e. at a true eigenvalue.
    cplx g11 = 0.0, g12 = 0.0, g22 = 0.0;
    for (int r = 0; r < 4; ++r) {
        g11 += std::conj(m[r][0]) * m[r][0];
        g12 += std::conj(m[r][0]) * m[r][1];
        g22 += std::conj(m[r][1]) * m[r][1];
    }
    return {g11 * g22 - std::conj(g12) * g12, evanescent};
}

SpectrumResult solve_modes_family(double mu, Branch branch, double e_lo, double e_hi,
                                  const Grid& grid, const UnitsConfig& units) {
    units.validate();
    const double rest = units.rest_energy();
    const double L = grid.length();
    const Complex2x2 v = flux_balanced_transfer(mu, branch).matrix;
    SpectrumResult res;
    if (!(e_hi > e_lo)) return res;

    // Reduced scalar condition on the (tau3 + i tau2)-projected content:
    // the upper branch forces antiperiodic phi, the lower periodic phi,
    // independent of mu. Its roots are simple sign changes; the full
    // boundary system then accepts or rejects each candidate.
    const double gamma = branch == Branch::Upper ? -1.0 : 1.0;
    auto reduced = [&](double e) {
        const double k = wavenumber_from_energy(e, units);
        return gamma > 0.0 ? std::sin(0.5 * k * L) : std::cos(0.5 * k * L);
    };
    auto accept = [&](double e_root) {
        const QuantizationProbe probe = quantization_residual(mu, branch, e_root, grid, units);
        if (std::abs(probe.determinant) > 1e-10) return;
        SpectrumEntry entry;
        entry.k = wavenumber_from_energy(e_root, units);
        if (!res.entries.empty() &&
            std::abs(res.entries.back().k - entry.k) < 1e-6 * kPi / L)
            return;  // same root touched twice by the scan
        entry.n = gamma > 0.0 ? static_cast<int>(std::round(entry.k * L / (2.0 * kPi)))
                              : static_cast<int>(std::round((entry.k * L / kPi - 1.0) / 2.0));
        entry.e_plus = e_root;
        entry.e_minus = -e_root;
        attach_mode_residuals(entry, grid, units, v);
        res.entries.push_back(entry);
    };

    // Rest mode: only the periodic-type reduction admits k = 0.
    if (gamma > 0.0 && e_lo <= rest && rest <= e_hi) accept(rest);

    const double step = 0.1 * units.hbar * units.c * kPi / L;
    double e0 = std::max(e_lo, rest * (1.0 + 1e-12));
    double f0 = reduced(e0);
    for (double e = e0 + step; e0 < e_hi; e += step) {
        const double e1 = std::min(e, e_hi);
        const double f1 = reduced(e1);
        if (f0 == 0.0) {
            accept(e0);
        } else if (f0 * f1 < 0.0) {
            double lo = e0, hi = e1, flo = f0;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const double fm = reduced(mid);
                if (flo * fm <= 0.0) hi = mid; else { lo = mid; flo = fm; }
            }
            // Newton polish to machine precision: the assembled mode's
            // wall residuals inherit the root accuracy directly.
            double root = 0.5 * (lo + hi);
            for (int it = 0; it < 4; ++it) {
                const double k = wavenumber_from_energy(root, units);
                if (k <= 0.0) break;
                const double f = reduced(root);
                const double dk_de = root / (units.hbar * units.hbar * units.c * units.c * k);
                const double df =
                    0.5 * L * dk_de *
                    (gamma > 0.0 ? std::cos(0.5 * k * L) : -std::sin(0.5 * k * L));
                if (df == 0.0) break;
                const double next = root - f / df;
                if (next > e_lo && next < e_hi * (1.0 + 1e-12)) root = next; else break;
            }
            accept(root);
        }
        e0 = e1;
        f0 = f1;
        if (e1 >= e_hi) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Time evolution
// ---------------------------------------------------------------------------

namespace {

// Second difference on the distinct samples with seam sign s.
void wrapped_accel(const std::vector<double>& u, std::vector<double>& out, double s,
                   double c2_over_h2, double mass_term) {
    const int n = static_cast<int>(u.size());
    for (int i = 0; i < n; ++i) {
        const double left = i == 0 ? s * u[n - 1] : u[i - 1];
        const double right = i + 1 == n ? s * u[0] : u[i + 1];
        out[i] = c2_over_h2 * (left - 2.0 * u[i] + right) - mass_term * u[i];
    }
}

Snapshot make_snapshot(double t, const std::vector<double>& u, const std::vector<double>& v,
                       MajoranaSign sign, double seam) {
    Snapshot s;
    s.t = t;
    std::vector<double> uc = u, vc = v;
    uc.push_back(seam * u[0]);
    vc.push_back(seam * v[0]);
    s.phi = uncarrier(uc, sign);
    s.phi_dot = uncarrier(vc, sign);
    return s;
}

}  // namespace

EvolutionRun evolve_leapfrog(const KfgState& initial, WrapKind bc, double dt, int steps,
                             int snapshot_stride, const UnitsConfig& units, double cfl_factor) {
    units.validate();
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument("evolve: bc must be periodic or antiperiodic");
    if (steps < 1 || snapshot_stride < 1)
        throw std::invalid_argument("evolve: steps and stride must be positive");
    const Grid& g = initial.grid;
    const double h = g.spacing();
    if (!(dt > 0.0) || dt > cfl_factor * h / units.c)
        throw CflViolationError("evolve: dt exceeds the CFL bound cfl * dx / c");

    const MajoranaSign sign =
        initial.sign == MajoranaSign::None ? MajoranaSign::Plus : initial.sign;
    const double seam = wrap_sign(bc);
    const int n = g.distinct();
    std::vector<double> u = carrier(initial.phi, sign);
    std::vector<double> v = carrier(initial.phi_dot, sign);
    u.resize(n);  // drop the duplicated endpoint sample
    v.resize(n);

    const double c2h2 = units.c * units.c / (h * h);
    const double mass = units.compton_frequency() * units.compton_frequency();
    std::vector<double> acc(n);

    EvolutionRun run;
    run.initial = initial;
    run.bc = bc;
    run.dt = dt;
    run.steps = steps;
    run.snapshot_stride = snapshot_stride;
    run.snapshots.push_back(make_snapshot(0.0, u, v, sign, seam));

    wrapped_accel(u, acc, seam, c2h2, mass);
    for (int step = 1; step <= steps; ++step) {
        for (int i = 0; i < n; ++i) v[i] += 0.5 * dt * acc[i];
        for (int i = 0; i < n; ++i) u[i] += dt * v[i];
        wrapped_accel(u, acc, seam, c2h2, mass);
        for (int i = 0; i < n; ++i) v[i] += 0.5 * dt * acc[i];
        if (step % snapshot_stride == 0 || step == steps)
            run.snapshots.push_back(make_snapshot(step * dt, u, v, sign, seam));
    }
    return run;
}

namespace {

struct ModeBasis {
    std::vector<double> k;
    std::vector<bool> has_sine;
};

ModeBasis exact_basis(WrapKind bc, double length, int distinct) {
    ModeBasis b;
    const int m_max = distinct / 2 - 1;
    if (bc == WrapKind::Periodic) {
        for (int m = 0; m <= m_max; ++m) {
            b.k.push_back(2.0 * kPi * m / length);
            b.has_sine.push_back(m > 0);
        }
    } else {
        for (int m = 0; m <= m_max; ++m) {
            b.k.push_back((2.0 * m + 1.0) * kPi / length);
            b.has_sine.push_back(true);
        }
    }
    return b;
}

}  // namespace

KfgState evolve_spectral_exact(const KfgState& initial, double t, WrapKind bc,
                               const UnitsConfig& units) {
    units.validate();
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument("exact evolve: bc must be periodic or antiperiodic");
    const Grid& g = initial.grid;
    const int n = g.distinct();
    const MajoranaSign sign =
        initial.sign == MajoranaSign::None ? MajoranaSign::Plus : initial.sign;
    const std::vector<double> u = carrier(initial.phi, sign);
    const std::vector<double> v = carrier(initial.phi_dot, sign);

    const ModeBasis basis = exact_basis(bc, g.length(), n);
    const double wm = units.compton_frequency();

    // Rectangle-rule projections over the distinct samples are exact for
    // band-limited fields on a uniform grid; compensated summation keeps
    // the oracle at rounding level.
    std::vector<double> uc(basis.k.size(), 0.0), us(basis.k.size(), 0.0);
    std::vector<double> vc(basis.k.size(), 0.0), vs(basis.k.size(), 0.0);
    auto kahan = [](double& sum, double& carry, double term) {
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    };
    for (std::size_t m = 0; m < basis.k.size(); ++m) {
        const double k = basis.k[m];
        double wcos = 2.0 / n, wsin = 2.0 / n;
        if (k == 0.0) wcos = 1.0 / n;
        double cuc = 0.0, cus = 0.0, cvc = 0.0, cvs = 0.0;
        for (int j = 0; j < n; ++j) {
            const double ph = k * (g.x(j) - g.a);
            kahan(uc[m], cuc, wcos * u[j] * std::cos(ph));
            kahan(vc[m], cvc, wcos * v[j] * std::cos(ph));
            if (basis.has_sine[m]) {
                kahan(us[m], cus, wsin * u[j] * std::sin(ph));
                kahan(vs[m], cvs, wsin * v[j] * std::sin(ph));
            }
        }
    }
    // Coefficients at the rounding floor are projection noise; the rotation
    // would amplify them by the mode frequency, so drop them outright.
    double field_scale = 0.0;
    for (int j = 0; j < n; ++j)
        field_scale = std::max({field_scale, std::abs(u[j]), std::abs(v[j])});
    const double floor = 1e-13 * field_scale;
    for (std::size_t m = 0; m < basis.k.size(); ++m) {
        if (std::abs(uc[m]) < floor) uc[m] = 0.0;
        if (std::abs(us[m]) < floor) us[m] = 0.0;
        if (std::abs(vc[m]) < floor) vc[m] = 0.0;
        if (std::abs(vs[m]) < floor) vs[m] = 0.0;
    }

    auto reconstruct = [&](double time) {
        std::vector<double> ru(n, 0.0), rv(n, 0.0);
        for (std::size_t m = 0; m < basis.k.size(); ++m) {
            const double k = basis.k[m];
            const double w = std::sqrt(wm * wm + units.c * units.c * k * k);
            const double cw = std::cos(w * time), sw = std::sin(w * time);
            const double ac = uc[m] * cw + vc[m] * sw / w;
            const double bc_t = basis.has_sine[m] ? us[m] * cw + vs[m] * sw / w : 0.0;
            const double acd = -uc[m] * w * sw + vc[m] * cw;
            const double bcd = basis.has_sine[m] ? -us[m] * w * sw + vs[m] * cw : 0.0;
            for (int j = 0; j < n; ++j) {
                const double ph = k * (g.x(j) - g.a);
                const double cph = std::cos(ph), sph = std::sin(ph);
                ru[j] += ac * cph + bc_t * sph;
                rv[j] += acd * cph + bcd * sph;
            }
        }
        return std::pair{ru, rv};
    };

    // Band-limit guard: the projection must reproduce the input exactly.
    {
        const auto [ru0, rv0] = reconstruct(0.0);
        double scale = 1e-300, err = 0.0;
        for (int j = 0; j < n; ++j) {
            scale = std::max({scale, std::abs(u[j]), std::abs(v[j])});
            err = std::max({err, std::abs(ru0[j] - u[j]), std::abs(rv0[j] - v[j])});
        }
        if (err > 1e-9 * scale)
            throw std::invalid_argument(
                "exact evolve: field is not band-limited on this grid (projection defect)");
    }

    auto [ru, rv] = reconstruct(t);
    const double seam = wrap_sign(bc);
    ru.push_back(seam * ru[0]);
    rv.push_back(seam * rv[0]);
    KfgState out;
    out.grid = g;
    out.sign = sign;
    out.wrap = bc;
    out.phi = uncarrier(ru, sign);
    out.phi_dot = uncarrier(rv, sign);
    return out;
}

std::vector<cplx> spectral_second_derivative(std::span<const cplx> f, const Grid& g,
                                             WrapKind bc) {
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument("spectral derivative: bc must wrap");
    const int n = g.distinct();
    const ModeBasis basis = exact_basis(bc, g.length(), n);

    std::vector<cplx> fc(basis.k.size()), fs(basis.k.size());
    for (std::size_t m = 0; m < basis.k.size(); ++m) {
        const double k = basis.k[m];
        const double w = (k == 0.0) ? 1.0 / n : 2.0 / n;
        cplx ac = 0.0, as = 0.0;
        for (int j = 0; j < n; ++j) {
            const double ph = k * (g.x(j) - g.a);
            ac += w * f[j] * std::cos(ph);
            if (basis.has_sine[m]) as += w * f[j] * std::sin(ph);
        }
        fc[m] = ac;
        fs[m] = as;
    }
    std::vector<cplx> out(g.n, cplx{});
    for (std::size_t m = 0; m < basis.k.size(); ++m) {
        const double k = basis.k[m];
        for (int j = 0; j < n; ++j) {
            const double ph = k * (g.x(j) - g.a);
            out[j] += -k * k * (fc[m] * std::cos(ph) +
                                (basis.has_sine[m] ? fs[m] * std::sin(ph) : cplx{}));
        }
    }
    out[g.n - 1] = wrap_sign(bc) * out[0];
    return out;
}

KfgState exact_rate_state(const KfgState& state, WrapKind bc, const UnitsConfig& units) {
    units.validate();
    const double wm = units.compton_frequency();
    const auto ddx = spectral_second_derivative(state.phi, state.grid, bc);
    KfgState rate;
    rate.grid = state.grid;
    rate.sign = state.sign;
    rate.wrap = bc;
    rate.phi = state.phi_dot;
    rate.phi_dot.resize(state.grid.n);
    for (int i = 0; i < state.grid.n; ++i)
        rate.phi_dot[i] = units.c * units.c * ddx[i] - wm * wm * state.phi[i];
    return rate;
}

double energy_integral(const KfgState& state, const UnitsConfig& units) {
    const FvState s = fv_from_kfg(state, units);
    const FvState r = fv_rate_from_kfg(state, units);
    return integrate(energy_density_rho_en(s, r, units)).real();
}

ConservationReport conservation_report(const EvolutionRun& run, const UnitsConfig& units) {
    if (run.snapshots.size() < 4)
        throw std::invalid_argument("conservation: need at least 4 snapshots");
    const Grid& g = run.initial.grid;
    std::vector<double> e, ts;
    for (const auto& snap : run.snapshots) {
        KfgState s;
        s.grid = g;
        s.sign = run.initial.sign;
        s.wrap = run.bc;
        s.phi = snap.phi;
        s.phi_dot = snap.phi_dot;
        e.push_back(energy_integral(s, units));
        ts.push_back(snap.t);
    }
    const double e0 = e.front();
    double tbar = 0.0, ebar = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) { tbar += ts[i]; ebar += e[i]; }
    tbar /= e.size();
    ebar /= e.size();
    double num = 0.0, den = 0.0, emin = e[0], emax = e[0];
    for (std::size_t i = 0; i < e.size(); ++i) {
        num += (ts[i] - tbar) * (e[i] - ebar);
        den += (ts[i] - tbar) * (ts[i] - tbar);
        emin = std::min(emin, e[i]);
        emax = std::max(emax, e[i]);
    }
    const double slope = den > 0.0 ? num / den : 0.0;
    ConservationReport rep;
    rep.initial_energy = e0;
    rep.secular_drift = std::abs(slope * (ts.back() - ts.front())) / std::abs(e0);
    rep.oscillation_amplitude = 0.5 * (emax - emin) / std::abs(e0);
    return rep;
}

double verify_fv_evolution(const EvolutionRun& run, const UnitsConfig& units,
                           MajoranaSign sign) {
    if (run.snapshots.size() < 3)
        throw std::invalid_argument("verify evolution: need at least 3 snapshots");
    const Grid& g = run.initial.grid;
    const double rest = units.rest_energy();
    const double ratio = units.hbar / rest;
    const double kin = -units.hbar * units.hbar / (2.0 * units.m);
    const double conj_sign = sign == MajoranaSign::Minus ? -1.0 : 1.0;

    // First component per snapshot.
    std::vector<std::vector<cplx>> phi1(run.snapshots.size());
    std::vector<double> times;
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        phi1[s].resize(g.n);
        for (int i = 0; i < g.n; ++i)
            phi1[s][i] =
                0.5 * (run.snapshots[s].phi[i] + kI * ratio * run.snapshots[s].phi_dot[i]);
        times.push_back(run.snapshots[s].t);
    }

    double worst = 0.0, scale = 1e-300;
    for (std::size_t s = 1; s + 1 < phi1.size(); ++s) {
        const double dtf = times[s + 1] - times[s];
        const double dtb = times[s] - times[s - 1];
        if (std::abs(dtf - dtb) > 1e-12 * std::max(dtf, dtb)) continue;  // uneven tail stride
        std::vector<cplx> combo(g.n);
        for (int i = 0; i < g.n; ++i)
            combo[i] = phi1[s][i] + conj_sign * std::conj(phi1[s][i]);
        const auto ddx = second_derivative(combo, g, run.bc);
        for (int i = 0; i < g.n; ++i) {
            const cplx lhs = kI * units.hbar * (phi1[s + 1][i] - phi1[s - 1][i]) / (dtf + dtb);
            const cplx rhs = kin * ddx[i] + rest * phi1[s][i];
            worst = std::max(worst, std::abs(lhs - rhs));
            scale = std::max({scale, std::abs(lhs), std::abs(rhs), rest * std::abs(phi1[s][i])});
        }
    }
    return worst / scale;
}

// ---------------------------------------------------------------------------
// Nonrelativistic limit
// ---------------------------------------------------------------------------

NrScalingReport nr_limit_experiment(const std::vector<double>& k_list, const UnitsConfig& units,
                                    MajoranaSign sign) {
    if (k_list.size() < 3)
        throw std::invalid_argument("nr limit: need at least three wavenumbers for a fit");
    units.validate();
    const double rest = units.rest_energy();
    const double wc = units.compton_frequency();
    const double mc = units.m * units.c;

    NrScalingReport rep;
    const int n_time = 256;
    const double period = 2.0 * kPi / wc;

    for (double k : k_list) {
        if (units.hbar * k > 0.1 * mc * (1.0 + 1e-12))
            throw std::invalid_argument("nr limit: hbar k must stay below 0.1 m c");
        NrPoint pt;
        pt.k = k;
        pt.x = units.hbar * k / mc;

        // One exactly evolved single mode on its own period-matched grid.
        const double L = k > 0.0 ? 2.0 * kPi / k : 2.0 * kPi;
        const Grid grid(0.0, L, 64);
        const KfgState initial = traveling_mode(k, grid, units, sign);

        // Rotating-frame bracket, Compton phase already folded in:
        //   e^{-i wc t} S chi = mc^2 phi1 - i hbar phi1_dot - (hbar^2/2m) phi1''
        // with spatial derivatives exact for the single mode.
        std::vector<double> mean_field(grid.n, 0.0);
        double term_scale = 1e-300, schrod = 0.0;
        for (int s = 0; s <= n_time; ++s) {
            const double t = period * s / n_time;
            const double wtrap = (s == 0 || s == n_time) ? 0.5 : 1.0;
            const KfgState st = evolve_spectral_exact(initial, t, initial.wrap, units);
            for (int i = 0; i < grid.n; ++i) {
                const cplx phi = st.phi[i];
                const cplx phid = st.phi_dot[i];
                const cplx phidd = units.c * units.c * (-k * k) * phi - wc * wc * phi;
                const cplx p1 = 0.5 * (phi + kI * phid / wc);
                const cplx p1d = 0.5 * (phid + kI * phidd / wc);
                const cplx p1xx = -k * k * p1;
                const cplx bracket =
                    rest * p1 - kI * units.hbar * p1d -
                    (units.hbar * units.hbar / (2.0 * units.m)) * p1xx;
                const double part =
                    sign == MajoranaSign::Minus ? bracket.imag() : bracket.real();
                mean_field[i] += wtrap * part / n_time;
                schrod = std::max(schrod, std::abs(bracket));
                // magnitudes of the two bracket terms in the rotating frame
                const cplx chi_dot = kI * wc * p1 + p1d;
                term_scale = std::max(
                    {term_scale, units.hbar * std::abs(chi_dot),
                     (units.hbar * units.hbar / (2.0 * units.m)) * std::abs(p1xx)});
            }
        }
        double mean_max = 0.0;
        for (double v : mean_field) mean_max = std::max(mean_max, std::abs(v));
        pt.averaged_residual = mean_max / term_scale;
        pt.schrodinger_residual = schrod / term_scale;
        rep.points.push_back(pt);
    }

    // Log-log fit over the k > 0 points.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (const auto& p : rep.points) {
        if (p.k <= 0.0 || p.averaged_residual <= 0.0) continue;
        const double lx = std::log(p.x), ly = std::log(p.averaged_residual);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++cnt;
    }
    if (cnt >= 2) rep.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return rep;
}

}  // namespace kfgm
