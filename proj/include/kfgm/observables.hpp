#pragma once

// Local observables, boundary functionals, integral charges and the
// energy-momentum tensor identities, evaluated on grid states.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "kfgm/grid.hpp"
#include "kfgm/states.hpp"

namespace kfgm {

enum class ObservableKind {
    Rho,            // |phi1|^2 - |phi2|^2
    RhoEn,          // i hbar (phi1* phi1_dot - phi2* phi2_dot)
    Current,        // usual KFG current of the scalar content
    EnergyCurrent,  // wall-relevant energy current
    K00,
    K10,
    K01,
    T00,
    T10,
    Custom,
};

std::string to_string(ObservableKind k);

/// A sampled (generally complex) density or current over the grid with
/// endpoint accessors. Real-kind fields carry a vanishing imaginary part
/// up to rounding.
struct ObservableField {
    ObservableKind kind = ObservableKind::Custom;
    Grid grid;
    std::vector<cplx> values;

    cplx at_a() const { return values.front(); }
    cplx at_b() const { return values.back(); }
    double max_abs() const;
    double max_abs_imag() const;
};

/// Trapezoid quadrature over the interval.
cplx integrate(const ObservableField& f);
cplx integrate(std::span<const cplx> values, const Grid& g);

// ---------------------------------------------------------------------------
// Pointwise observables
// ---------------------------------------------------------------------------

/// Indefinite density |phi1|^2 - |phi2|^2. Identically zero for Majorana
/// states (exactly, sample by sample).
ObservableField density_rho(const FvState& state);

/// Energy density i hbar (phi1* phi1_dot - phi2* phi2_dot). Real for
/// Majorana-consistent (state, rate) pairs.
ObservableField energy_density_rho_en(const FvState& state, const FvState& state_dot,
                                      const UnitsConfig& units);

/// Usual current of the scalar content; vanishes identically (to rounding)
/// under either Majorana condition, so it cannot distinguish walls.
ObservableField current_j(const FvState& state, const UnitsConfig& units);

/// Energy current -(hbar^2/2m) [ (phi')* phi_dot - phi* phi_dot' ].
/// Computed both from the two-component matrix expression and from the
/// scalar form; the two routes are cross-checked to 1e-9 (scaled) and the
/// scalar value is returned. This is the observable whose wall balance
/// defines a transparent interval.
ObservableField energy_current_j_en(const FvState& state, const FvState& state_dot,
                                    const UnitsConfig& units);

// ---------------------------------------------------------------------------
// Boundary functionals and the indefinite inner product
// ---------------------------------------------------------------------------

/// Momentum-operator boundary term i hbar [Psi^dag tau3 Phi]_a^b.
cplx boundary_term_f(const FvState& psi, const FvState& phi, const UnitsConfig& units);
/// Same functional from raw wall data.
cplx boundary_term_f(const Complex2Vector& psi_b, const Complex2Vector& psi_a,
                     const Complex2Vector& phi_b, const Complex2Vector& phi_a,
                     const UnitsConfig& units);

/// Hamiltonian boundary term; matrix and scalar routes cross-checked,
/// scalar value returned. Putting Phi in the first slot and its on-shell
/// energy-operator image in the second yields i hbar [j_en]_a^b.
cplx boundary_term_g(const FvState& psi, const FvState& phi, const UnitsConfig& units);

/// Scalar-form boundary term from raw one-component wall data
/// -(hbar^2/2m) [ (psi')* phi - psi* phi' ]_a^b.
cplx boundary_term_g_scalar(cplx psi_b, cplx psi_a, cplx dpsi_b, cplx dpsi_a, cplx phi_b,
                            cplx phi_a, cplx dphi_b, cplx dphi_a, const UnitsConfig& units);

/// Indefinite inner product: trapezoid quadrature of Psi^dag tau3 Phi.
/// Conjugate symmetric; zero self-pairing on Majorana states.
cplx indefinite_inner_product(const FvState& psi, const FvState& phi);

// ---------------------------------------------------------------------------
// Histories, tensors, continuity
// ---------------------------------------------------------------------------

/// Uniformly spaced time levels of a one-component field. All time
/// derivatives taken from histories use centred differences, so identity
/// residuals measure genuine discretisation error.
struct KfgHistory {
    Grid grid;
    double dt = 0.0;
    std::vector<std::vector<cplx>> levels;
    WrapKind wrap = WrapKind::None;

    int n_levels() const { return static_cast<int>(levels.size()); }
};

struct TensorSuite {
    ObservableField k00;  // energy density
    ObservableField k10;  // energy current / c
    ObservableField k01;
    ObservableField t00;
    ObservableField t10;
    double relation_residual;    // pointwise defect of the K <-> T link
    double divergence_residual;  // defect of d_mu K^mu_0 = 0
};

/// Evaluate both rank-2 tensors at the centre level of a >= 5 level
/// history and the two identities that tie them together. The mixed and
/// second time derivatives come from the history, never from the equation
/// of motion, so the residuals converge at second order.
TensorSuite tensor_fields(const KfgHistory& history, const UnitsConfig& units);

/// Max interior residual of the discrete continuity equation
/// d_t density + d_x current = 0 over a matched pair of field histories.
/// Fewer than 3 time levels raises std::invalid_argument.
double continuity_residual(const std::vector<std::vector<cplx>>& density_levels,
                           const std::vector<std::vector<cplx>>& current_levels, double dt,
                           const Grid& grid, WrapKind wrap);

}  // namespace kfgm
