#pragma once

// Grid representations of the two-component (Feshbach-Villars) and
// one-component (Klein-Fock-Gordon) wavefunctions, the Majorana constraint,
// parity, the FV <-> KFG map, and discrete operator applications.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "kfgm/bc_families.hpp"
#include "kfgm/complex2.hpp"
#include "kfgm/grid.hpp"

namespace kfgm {

enum class MajoranaSign { None, Plus, Minus };

/// Endpoint identification used by the difference stencils. Periodic and
/// antiperiodic states wrap across the seam (with a sign); anything else
/// falls back to one-sided second-order stencils.
enum class WrapKind { None, Periodic, Antiperiodic };

std::string to_string(MajoranaSign s);
std::string to_string(WrapKind w);

struct FvState {
    Grid grid;
    std::vector<cplx> phi1;
    std::vector<cplx> phi2;
    MajoranaSign sign = MajoranaSign::None;
    WrapKind wrap = WrapKind::None;

    Complex2Vector at(int i) const { return {phi1[i], phi2[i]}; }
    Complex2Vector at_a() const { return at(0); }
    Complex2Vector at_b() const { return at(grid.n - 1); }
};

/// One-component state: the field and its time derivative on the same grid.
struct KfgState {
    Grid grid;
    std::vector<cplx> phi;
    std::vector<cplx> phi_dot;
    MajoranaSign sign = MajoranaSign::None;
    WrapKind wrap = WrapKind::None;
};

// ---------------------------------------------------------------------------
// Difference stencils (second order everywhere)
// ---------------------------------------------------------------------------

/// First derivative. Central interior stencil; wraparound across the seam
/// for periodic/antiperiodic fields, one-sided 3-point stencils otherwise.
std::vector<cplx> derivative(std::span<const cplx> f, const Grid& g, WrapKind wrap);

/// Second derivative. Central interior stencil; wraparound or one-sided
/// 4-point endpoint stencils (both second order).
std::vector<cplx> second_derivative(std::span<const cplx> f, const Grid& g, WrapKind wrap);

// ---------------------------------------------------------------------------
// State construction and symmetry operations
// ---------------------------------------------------------------------------

/// Charge conjugation: components swapped and conjugated. An involution;
/// Majorana states are (anti-)fixed points.
FvState charge_conjugate(const FvState& state);

/// Build a two-component state from phi1 alone: phi2 = +- conj(phi1),
/// bit-exactly, with the sign recorded.
FvState enforce_majorana(const Grid& grid, std::vector<cplx> phi1, MajoranaSign sign,
                         WrapKind wrap = WrapKind::None);

/// Reflection about the interval midpoint. Sample j maps to n-1-j, so the
/// midpoint sample (odd n) is fixed and endpoint samples swap.
FvState parity_transform(const FvState& state);
KfgState parity_transform(const KfgState& state);

/// FV components from a one-component state:
/// phi1,2 = (phi +- i hbar phi_dot / (m c^2)) / 2.
FvState fv_from_kfg(const KfgState& state, const UnitsConfig& units);

/// The scalar content phi1 + phi2 of a two-component state. Real for
/// Majorana-plus states, purely imaginary for Majorana-minus.
std::vector<cplx> kfg_from_fv(const FvState& state);

/// Time derivative of the FV state obtained from an on-shell one-component
/// state, using phi_ddot = c^2 phi'' - (m c^2/hbar)^2 phi.
FvState fv_rate_from_kfg(const KfgState& state, const UnitsConfig& units);

/// On-shell time derivative of a two-component state:
/// Phi_dot = h Phi / (i hbar). Preserves the Majorana class.
FvState fv_time_derivative(const FvState& state, const UnitsConfig& units);

// ---------------------------------------------------------------------------
// Operator applications
// ---------------------------------------------------------------------------

/// Momentum operator -i hbar d/dx applied componentwise.
FvState apply_momentum(const FvState& state, const UnitsConfig& units);

/// Free FV Hamiltonian
///   h Phi = -(hbar^2/2m) (tau3 + i tau2) Phi'' + m c^2 tau3 Phi.
FvState apply_fv_hamiltonian(const FvState& state, const UnitsConfig& units);

struct DomainResiduals {
    double value;       // max endpoint violation of Phi(b) = V Phi(a)
    double derivative;  // same for Phi'
};

/// How far the state sits from the transfer-form domain: both the value
/// relation and the derivative relation are checked at the stored walls.
DomainResiduals hamiltonian_domain_check(const FvState& state, const Complex2x2& v);
DomainResiduals hamiltonian_domain_check(const FvState& state, const TransferMatrixV& v);

// ---------------------------------------------------------------------------
// Seeded test-state factories (deterministic across platforms)
// ---------------------------------------------------------------------------

/// Real (plus) or imaginary (minus) one-component field built from the
/// first n_modes admissible Fourier modes with seeded coefficients,
/// max-amplitude normalised to 1. bc must be Periodic or Antiperiodic.
KfgState random_kfg_state(std::uint64_t seed, const Grid& grid, WrapKind bc,
                          MajoranaSign sign, int n_modes, const UnitsConfig& units);

/// The same field converted to a two-component state with the Majorana
/// sign enforced exactly.
FvState random_state(std::uint64_t seed, const Grid& grid, WrapKind bc, MajoranaSign sign,
                     int n_modes, const UnitsConfig& units);

/// Non-Majorana two-component state with independent seeded components,
/// still satisfying the periodic/antiperiodic identification.
FvState random_fv_state_general(std::uint64_t seed, const Grid& grid, WrapKind bc, int n_modes);

}  // namespace kfgm
