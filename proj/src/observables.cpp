#include "kfgm/observables.hpp"

#include <cmath>
#include <stdexcept>

#include "kfgm/errors.hpp"

namespace kfgm {

std::string to_string(ObservableKind k) {
    switch (k) {
        case ObservableKind::Rho: return "rho";
        case ObservableKind::RhoEn: return "rho_en";
        case ObservableKind::Current: return "j";
        case ObservableKind::EnergyCurrent: return "j_en";
        case ObservableKind::K00: return "K00";
        case ObservableKind::K10: return "K10";
        case ObservableKind::K01: return "K01";
        case ObservableKind::T00: return "T00";
        case ObservableKind::T10: return "T10";
        case ObservableKind::Custom: return "custom";
    }
    return "?";
}

double ObservableField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

double ObservableField::max_abs_imag() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v.imag()));
    return m;
}

cplx integrate(std::span<const cplx> values, const Grid& g) {
    cplx s = 0.5 * (values.front() + values.back());
    for (int i = 1; i + 1 < g.n; ++i) s += values[i];
    return s * g.spacing();
}

cplx integrate(const ObservableField& f) { return integrate(f.values, f.grid); }

ObservableField density_rho(const FvState& state) {
    ObservableField f{ObservableKind::Rho, state.grid, {}};
    f.values.resize(state.grid.n);
    for (int i = 0; i < state.grid.n; ++i)
        f.values[i] = std::norm(state.phi1[i]) - std::norm(state.phi2[i]);
    return f;
}

ObservableField energy_density_rho_en(const FvState& state, const FvState& state_dot,
                                      const UnitsConfig& units) {
    if (state.grid != state_dot.grid)
        throw std::invalid_argument("rho_en: state and rate live on different grids");
    ObservableField f{ObservableKind::RhoEn, state.grid, {}};
    f.values.resize(state.grid.n);
    const cplx ih = kI * units.hbar;
    for (int i = 0; i < state.grid.n; ++i)
        f.values[i] = ih * (std::conj(state.phi1[i]) * state_dot.phi1[i] -
                            std::conj(state.phi2[i]) * state_dot.phi2[i]);
    return f;
}

ObservableField current_j(const FvState& state, const UnitsConfig& units) {
    const auto phi = kfg_from_fv(state);
    const auto dphi = derivative(phi, state.grid, state.wrap);
    ObservableField f{ObservableKind::Current, state.grid, {}};
    f.values.resize(state.grid.n);
    const cplx pref = kI * units.hbar / (2.0 * units.m);
    for (int i = 0; i < state.grid.n; ++i)
        f.values[i] = pref * (std::conj(dphi[i]) * phi[i] - std::conj(phi[i]) * dphi[i]);
    return f;
}

ObservableField energy_current_j_en(const FvState& state, const FvState& state_dot,
                                    const UnitsConfig& units) {
    if (state.grid != state_dot.grid)
        throw std::invalid_argument("j_en: state and rate live on different grids");
    const Grid& g = state.grid;
    const double pref = -units.hbar * units.hbar / (2.0 * units.m);

    // Scalar route on phi = phi1 + phi2.
    const auto phi = kfg_from_fv(state);
    const auto phid = kfg_from_fv(state_dot);
    const auto dphi = derivative(phi, g, state.wrap);
    const auto dphid = derivative(phid, g, state.wrap);
    ObservableField f{ObservableKind::EnergyCurrent, g, {}};
    f.values.resize(g.n);
    for (int i = 0; i < g.n; ++i)
        f.values[i] = pref * (std::conj(dphi[i]) * phid[i] - std::conj(phi[i]) * dphid[i]);

    // Two-component route; must agree with the scalar one.
    const auto d1 = derivative(state.phi1, g, state.wrap);
    const auto d2 = derivative(state.phi2, g, state.wrap);
    const auto r1 = derivative(state_dot.phi1, g, state_dot.wrap);
    const auto r2 = derivative(state_dot.phi2, g, state_dot.wrap);
    const Complex2x2 w = tau3_plus_i_tau2();
    double worst = 0.0, scale = 1.0;
    for (int i = 0; i < g.n; ++i) {
        const Complex2Vector wp = w * state.at(i);
        const Complex2Vector wdp = w * Complex2Vector{d1[i], d2[i]};
        const Complex2Vector wr = w * state_dot.at(i);
        const Complex2Vector wdr = w * Complex2Vector{r1[i], r2[i]};
        const cplx matrix_form =
            pref * 0.5 *
            ((std::conj(wdp.c1) * wr.c1 + std::conj(wdp.c2) * wr.c2) -
             (std::conj(wp.c1) * wdr.c1 + std::conj(wp.c2) * wdr.c2));
        worst = std::max(worst, std::abs(matrix_form - f.values[i]));
        scale = std::max(scale, std::abs(f.values[i]));
    }
    if (worst > 1e-9 * scale)
        throw InternalConsistencyError("j_en: matrix and scalar forms disagree");
    return f;
}

cplx boundary_term_f(const Complex2Vector& psi_b, const Complex2Vector& psi_a,
                     const Complex2Vector& phi_b, const Complex2Vector& phi_a,
                     const UnitsConfig& units) {
    return kI * units.hbar * (tau3_pairing(psi_b, phi_b) - tau3_pairing(psi_a, phi_a));
}

cplx boundary_term_f(const FvState& psi, const FvState& phi, const UnitsConfig& units) {
    if (psi.grid != phi.grid) throw std::invalid_argument("boundary term: grid mismatch");
    return boundary_term_f(psi.at_b(), psi.at_a(), phi.at_b(), phi.at_a(), units);
}

cplx boundary_term_g_scalar(cplx psi_b, cplx psi_a, cplx dpsi_b, cplx dpsi_a, cplx phi_b,
                            cplx phi_a, cplx dphi_b, cplx dphi_a, const UnitsConfig& units) {
    const double pref = -units.hbar * units.hbar / (2.0 * units.m);
    const cplx at_b = std::conj(dpsi_b) * phi_b - std::conj(psi_b) * dphi_b;
    const cplx at_a = std::conj(dpsi_a) * phi_a - std::conj(psi_a) * dphi_a;
    return pref * (at_b - at_a);
}

cplx boundary_term_g(const FvState& psi, const FvState& phi, const UnitsConfig& units) {
    if (psi.grid != phi.grid) throw std::invalid_argument("boundary term: grid mismatch");
    const Grid& g = psi.grid;
    const double pref = -units.hbar * units.hbar / (2.0 * units.m);

    const auto sp = kfg_from_fv(psi);
    const auto fp = kfg_from_fv(phi);
    const auto dsp = derivative(sp, g, psi.wrap);
    const auto dfp = derivative(fp, g, phi.wrap);
    const cplx scalar = boundary_term_g_scalar(sp.back(), sp.front(), dsp.back(), dsp.front(),
                                               fp.back(), fp.front(), dfp.back(), dfp.front(),
                                               units);

    // Matrix route.
    const Complex2x2 w = tau3_plus_i_tau2();
    const auto p1 = derivative(psi.phi1, g, psi.wrap);
    const auto p2 = derivative(psi.phi2, g, psi.wrap);
    const auto q1 = derivative(phi.phi1, g, phi.wrap);
    const auto q2 = derivative(phi.phi2, g, phi.wrap);
    auto corner = [&](int i) {
        const Complex2Vector wps = w * psi.at(i);
        const Complex2Vector wph = w * phi.at(i);
        const Complex2Vector wdps = w * Complex2Vector{p1[i], p2[i]};
        const Complex2Vector wdph = w * Complex2Vector{q1[i], q2[i]};
        return (std::conj(wdps.c1) * wph.c1 + std::conj(wdps.c2) * wph.c2) -
               (std::conj(wps.c1) * wdph.c1 + std::conj(wps.c2) * wdph.c2);
    };
    const cplx matrix = pref * 0.5 * (corner(g.n - 1) - corner(0));

    const double scale = std::max(1.0, std::abs(scalar));
    if (std::abs(matrix - scalar) > 1e-9 * scale)
        throw InternalConsistencyError("boundary term g: matrix and scalar forms disagree");
    return scalar;
}

cplx indefinite_inner_product(const FvState& psi, const FvState& phi) {
    if (psi.grid != phi.grid) throw std::invalid_argument("inner product: grid mismatch");
    std::vector<cplx> integrand(psi.grid.n);
    for (int i = 0; i < psi.grid.n; ++i) integrand[i] = tau3_pairing(psi.at(i), phi.at(i));
    return integrate(integrand, psi.grid);
}

// ---------------------------------------------------------------------------
// Tensor suite on histories
// ---------------------------------------------------------------------------

namespace {

// Centred time derivative of level j from a history (first or second order
// derivative of the stored fields).
std::vector<cplx> dt_level(const KfgHistory& h, int j) {
    std::vector<cplx> out(h.grid.n);
    for (int i = 0; i < h.grid.n; ++i)
        out[i] = (h.levels[j + 1][i] - h.levels[j - 1][i]) / (2.0 * h.dt);
    return out;
}

std::vector<cplx> dtt_level(const KfgHistory& h, int j) {
    std::vector<cplx> out(h.grid.n);
    for (int i = 0; i < h.grid.n; ++i)
        out[i] =
            (h.levels[j + 1][i] - 2.0 * h.levels[j][i] + h.levels[j - 1][i]) / (h.dt * h.dt);
    return out;
}

}  // namespace

TensorSuite tensor_fields(const KfgHistory& history, const UnitsConfig& units) {
    if (history.n_levels() < 5)
        throw std::invalid_argument("tensor suite: need at least 5 time levels");
    units.validate();
    const Grid& g = history.grid;
    const int centre = history.n_levels() / 2;
    const double c = units.c;
    const double pref = units.hbar * units.hbar / (2.0 * units.m);
    const double mass2 = units.m * units.m * c * c / (units.hbar * units.hbar);

    // All time derivatives from the history; space derivatives wrap-aware.
    auto k_fields = [&](int j) {
        const auto& phi = history.levels[j];
        const auto dphi = derivative(phi, g, history.wrap);
        const auto dtphi = dt_level(history, j);
        const auto dttphi = dtt_level(history, j);
        const auto dtdx = derivative(dtphi, g, history.wrap);
        ObservableField k00{ObservableKind::K00, g, std::vector<cplx>(g.n)};
        ObservableField k10{ObservableKind::K10, g, std::vector<cplx>(g.n)};
        ObservableField k01{ObservableKind::K01, g, std::vector<cplx>(g.n)};
        for (int i = 0; i < g.n; ++i) {
            // K^0_0 = -(hbar^2/2mc^2)(phi* phi_tt - |phi_t|^2)
            k00.values[i] = -(pref / (c * c)) *
                            (std::conj(phi[i]) * dttphi[i] - std::conj(dtphi[i]) * dtphi[i]);
            // K^1_0 = (hbar^2/2mc)(phi* phi_tx - phi_x* phi_t)
            k10.values[i] =
                (pref / c) * (std::conj(phi[i]) * dtdx[i] - std::conj(dphi[i]) * dtphi[i]);
            // K^0_1 = -(hbar^2/2mc)(phi* phi_tx - phi_t* phi_x)
            k01.values[i] =
                -(pref / c) * (std::conj(phi[i]) * dtdx[i] - std::conj(dtphi[i]) * dphi[i]);
        }
        return std::array<ObservableField, 3>{k00, k10, k01};
    };

    const auto& phi = history.levels[centre];
    const auto dphi = derivative(phi, g, history.wrap);
    const auto dtphi = dt_level(history, centre);
    const auto dtdx = derivative(dtphi, g, history.wrap);

    TensorSuite suite{
        {ObservableKind::K00, g, std::vector<cplx>(g.n)},
        {ObservableKind::K10, g, std::vector<cplx>(g.n)},
        {ObservableKind::K01, g, std::vector<cplx>(g.n)},
        {ObservableKind::T00, g, std::vector<cplx>(g.n)},
        {ObservableKind::T10, g, std::vector<cplx>(g.n)},
        0.0,
        0.0,
    };
    const auto centre_k = k_fields(centre);
    suite.k00 = centre_k[0];
    suite.k10 = centre_k[1];
    suite.k01 = centre_k[2];

    // Scalar invariant (d^a phi*)(d_a phi) - m^2c^2/hbar^2 |phi|^2.
    std::vector<cplx> invariant(g.n);
    for (int i = 0; i < g.n; ++i) {
        invariant[i] = std::conj(dtphi[i]) * dtphi[i] / (c * c) -
                       std::conj(dphi[i]) * dphi[i] - mass2 * std::conj(phi[i]) * phi[i];
        suite.t00.values[i] =
            pref * (std::conj(dtphi[i]) * dtphi[i] / (c * c) + std::conj(dphi[i]) * dphi[i] +
                    mass2 * std::conj(phi[i]) * phi[i]);
        suite.t10.values[i] =
            -(pref / c) * (std::conj(dtphi[i]) * dphi[i] + std::conj(dphi[i]) * dtphi[i]);
    }

    // Link between the two tensors, nu = 0 components. The product-rule
    // terms are differenced discretely, so the defect is pure truncation.
    std::vector<cplx> prod0(g.n);  // d_0 of phi* d^0 phi, centred on the history
    std::vector<std::vector<cplx>> prod0_levels(3, std::vector<cplx>(g.n));
    for (int off = -1; off <= 1; ++off) {
        const int j = centre + off;
        const auto dt_j = dt_level(history, j);
        for (int i = 0; i < g.n; ++i)
            prod0_levels[off + 1][i] = std::conj(history.levels[j][i]) * dt_j[i] / c;
    }
    for (int i = 0; i < g.n; ++i)
        prod0[i] = (prod0_levels[2][i] - prod0_levels[0][i]) / (2.0 * history.dt) / c;
    const auto dprod1_dt = [&] {
        std::vector<std::vector<cplx>> lv(3, std::vector<cplx>(g.n));
        for (int off = -1; off <= 1; ++off) {
            const int j = centre + off;
            const auto dx_j = derivative(history.levels[j], g, history.wrap);
            for (int i = 0; i < g.n; ++i)
                lv[off + 1][i] = std::conj(history.levels[j][i]) * (-dx_j[i]);
        }
        std::vector<cplx> out(g.n);
        for (int i = 0; i < g.n; ++i)
            out[i] = (lv[2][i] - lv[0][i]) / (2.0 * history.dt) / c;
        return out;
    }();

    double rel = 0.0, scale = 0.0;
    for (int i = 1; i + 1 < g.n; ++i) {
        const cplx lhs00 = suite.k00.values[i];
        const cplx rhs00 = suite.t00.values[i] + pref * invariant[i] - pref * prod0[i];
        const cplx lhs10 = suite.k10.values[i];
        const cplx rhs10 = suite.t10.values[i] - pref * dprod1_dt[i];
        rel = std::max(rel, std::max(std::abs(lhs00 - rhs00), std::abs(lhs10 - rhs10)));
        scale = std::max(scale, std::abs(lhs00));
    }
    suite.relation_residual = rel / std::max(1e-300, scale);

    // Divergence d_mu K^mu_0 = 0 needs K at neighbouring levels.
    const auto km = k_fields(centre - 1);
    const auto kp = k_fields(centre + 1);
    const auto dx_k10 = derivative(suite.k10.values, g, history.wrap);
    double div = 0.0;
    for (int i = 1; i + 1 < g.n; ++i) {
        const cplx dt_k00 = (kp[0].values[i] - km[0].values[i]) / (2.0 * history.dt) / c;
        div = std::max(div, std::abs(dt_k00 + dx_k10[i]));
    }
    suite.divergence_residual = div / std::max(1e-300, scale);
    return suite;
}

double continuity_residual(const std::vector<std::vector<cplx>>& density_levels,
                           const std::vector<std::vector<cplx>>& current_levels, double dt,
                           const Grid& grid, WrapKind wrap) {
    if (density_levels.size() < 3 || current_levels.size() != density_levels.size())
        throw std::invalid_argument("continuity: need >= 3 matched time levels");
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < density_levels.size(); ++j) {
        const auto dj = derivative(current_levels[j], grid, wrap);
        for (int i = 1; i + 1 < grid.n; ++i) {
            const cplx dt_rho = (density_levels[j + 1][i] - density_levels[j - 1][i]) / (2.0 * dt);
            worst = std::max(worst, std::abs(dt_rho + dj[i]));
        }
    }
    return worst;
}

}  // namespace kfgm
