#pragma once

// Boundary-condition families for the momentum operator and the free
// Feshbach-Villars Hamiltonian of a strictly neutral spin-0 particle on an
// interval, plus the constraint solvers that cut them down: energy-flux
// balance at the walls, parity invariance, the separated (m1 = 0) side
// branch, and membership in the general one-component KFG family.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kfgm/complex2.hpp"

namespace kfgm {

// ---------------------------------------------------------------------------
// Parameterizations
// ---------------------------------------------------------------------------

/// Parameters of the unitary symmetric boundary matrix
///   N(mu, m0, m1, m3) = e^{i mu} [[m0 - i m3, -i m1], [-i m1, m0 + i m3]],
/// with (m0, m1, m3) on the unit sphere and mu in [0, pi). The relation it
/// encodes couples (phi1(b), phi2(a)) to (phi2(b), phi1(a)).
struct NMatrixParams {
    double mu = 0.0;
    double m0 = 1.0;
    double m1 = 0.0;
    double m3 = 0.0;

    double norm_defect() const;
    /// Throws std::invalid_argument if the unit-norm invariant is violated
    /// by more than 1e-9 or mu is outside [0, pi).
    void validate() const;
};

/// Which sign of the two-valued family survives the flux-balance
/// reduction: Upper corresponds to m1 = -sin(mu), Lower to m1 = +sin(mu).
/// At mu = pi/2 the Upper branch is the antiperiodic relation (V = -1) and
/// the Lower branch the periodic one (V = +1).
enum class Branch { Upper, Lower };

/// Transfer form of a boundary relation: Phi(b) = V Phi(a) together with
/// Phi'(b) = V Phi'(a). det(V) = 1 always. `branch` is set only when the
/// matrix lies on the flux-balanced one-parameter family.
struct TransferMatrixV {
    double mu = 0.0;
    std::optional<Branch> branch;
    Complex2x2 matrix = Complex2x2::identity();
};

/// Parameters of the general one-component KFG boundary family:
/// a real length scale lambda and a unitary matrix
///   U = e^{i theta} [[n0 - i n3, -n2 - i n1], [n2 - i n1, n0 + i n3]]
/// acting on (phi -+ i lambda phi') boundary combinations. Imposing a
/// Majorana condition forces n2 = 0 (U symmetric).
struct GeneralKfgBcParams {
    double theta = 0.0;
    double lambda = 0.0;
    double n0 = 1.0;
    double n1 = 0.0;
    double n2 = 0.0;
    double n3 = 0.0;

    double norm_defect() const;
};

/// Residue of the separated (m1 = 0) branch after flux balance:
/// m3 = 0, mu = 0 and m0 = +1 or -1.
struct SeparatedBcParams {
    int m0_sign = +1;  // +1 or -1
};

enum class BcKind {
    Periodic,
    Antiperiodic,
    FluxBalanced,
    ConfiningSeparated,
    GeneralPseudoSelfAdjoint,
    NotPseudoSelfAdjoint,
};

struct BcClass {
    BcKind kind = BcKind::NotPseudoSelfAdjoint;
    double mu = 0.0;                       // FluxBalanced only
    std::optional<Branch> branch;          // FluxBalanced only
    int m0_sign = 0;                       // ConfiningSeparated only

    BcClass() = default;
    explicit BcClass(BcKind k) : kind(k) {}
};

std::string to_string(BcKind k);
std::string to_string(Branch b);

// ---------------------------------------------------------------------------
// Construction and transformation
// ---------------------------------------------------------------------------

/// The unitary symmetric boundary matrix for the given parameters.
Complex2x2 build_n_matrix(const NMatrixParams& p);

/// Rewrite the N-relation in transfer form V. Requires |m1| > 1e-12;
/// the m1 = 0 case is a genuinely different (separated) branch and raises
/// SeparatedBranchError.
TransferMatrixV n_to_transfer(const NMatrixParams& p);

/// Flux-balanced transfer matrix
///   V = -+ i/sin(mu) [[-e^{i mu}, -cos mu], [cos mu, e^{-i mu}]]
/// for mu strictly inside (0, pi).
TransferMatrixV flux_balanced_transfer(double mu, Branch branch);

/// N parameters whose transfer form is the flux-balanced matrix:
/// m0 = -cos(mu), m3 = 0, m1 = -+ sin(mu).
NMatrixParams flux_balanced_params(double mu, Branch branch);

// ---------------------------------------------------------------------------
// Constraint solvers
// ---------------------------------------------------------------------------

/// Deviation from wall-flux balance: with W = tau3 + i tau2, the energy
/// current has equal wall values for every state of the V-domain iff
/// V^dag W^dag W V = W^dag W. Returns the max-entry residual of that
/// identity; zero for the flux-balanced family.
double flux_balance_residual(const Complex2x2& v);
double flux_balance_residual(const TransferMatrixV& v);

struct FluxSolution {
    double mu;
    Branch branch;
    NMatrixParams params;
    TransferMatrixV transfer;
    double closed_form_residual;   // flux residual of the closed form
    double numeric_gap;            // distance closed form <-> grid minimiser
    double unit_norm_defect;       // |m0^2 + m1^2 + m3^2 - 1|
};

/// Solve the flux-balance constraint at each sampled mu in (0, pi).
/// Returns both branches per sample. The closed form m0 = -cos mu, m3 = 0,
/// m1 = -+ sin mu is cross-checked against a direct numeric minimisation of
/// flux_balance_residual over the parameter sphere; disagreement beyond
/// 1e-6 raises InternalConsistencyError. mu outside the open interval
/// raises std::invalid_argument (the transfer form has a 1/sin(mu) pole).
std::vector<FluxSolution> solve_flux_constraint(const std::vector<double>& mu_samples);

struct ParitySolution {
    double mu;                              // the unique root, pi/2
    std::vector<TransferMatrixV> matrices;  // Upper (-1) then Lower (+1)
    double worst_residual;                  // max residual of V^2 = 1 at the root
};

/// Impose invariance under reflection about the interval midpoint on the
/// flux-balanced family. The combined constraint is V^2 = 1; scanning
/// mu over (0, pi) yields the single root mu = pi/2 with V = -+ identity.
ParitySolution solve_parity_constraint();

/// Residual of the parity constraint V^2 = 1 at a given mu (branch
/// independent on the flux-balanced family).
double parity_constraint_residual(double mu);

enum class SeparatedKfgBc {
    TimeDerivativeDirichletNeumann,  // m0 = +1: phi_dot and phi_dot' vanish at both walls
    DirichletNeumann,                // m0 = -1: phi and phi' vanish at both walls
};

struct SeparatedBranchSummary {
    SeparatedBcParams params;
    Complex2x2 wall_b;     // relation applied to Phi(b) (and Phi'(b))
    Complex2x2 wall_a;     // relation applied to Phi(a) (and Phi'(a))
    SeparatedKfgBc kfg_bc;
    bool in_general_kfg_family;  // always false: dimension test fails
};

struct SeparatedBranchResult {
    std::array<SeparatedBranchSummary, 2> branches;  // m0 = +1 then m0 = -1
    bool impenetrable;  // energy current vanishes at both walls
};

/// Work out the m1 = 0 side branch: flux balance forces m3 = 0, mu = 0,
/// m0 = +-1; the resulting one-component conditions confine the particle
/// (wall energy current zero) and fall outside the general KFG family,
/// so they are discarded from the free-Hamiltonian domain.
SeparatedBranchResult separated_branch_analysis();

// ---------------------------------------------------------------------------
// General KFG family membership
// ---------------------------------------------------------------------------

/// A linear subspace of the one-component boundary-data space, coordinates
/// ordered (phi(b), phi(a), phi'(b), phi'(a)). Spanning vectors need not be
/// independent; the empty list is the zero subspace.
struct BoundarySubspace {
    std::vector<std::array<cplx, 4>> spanning;
};

struct MembershipResult {
    GeneralKfgBcParams params;
    Complex2x2 u_matrix;
    double residual;  // combined unitarity / symmetry / reproduction defect
};

/// Decide whether the subspace is carved out by the general KFG boundary
/// family for some lambda and unitary U with n2 = 0. The family always
/// carves a 2-dimensional subspace, so any other dimension is rejected
/// immediately. lambda is searched over a signed log grid scaled by the
/// interval length, then locally refined. Returns the reconstructed
/// parameters when the reproduction residual is below 1e-10; absent
/// otherwise. Non-finite input raises std::invalid_argument.
std::optional<MembershipResult> kfg_family_membership(const BoundarySubspace& subspace,
                                                      double interval_length);

/// Dimension of the spanned subspace (rank of the spanning set).
int subspace_dimension(const BoundarySubspace& subspace);

// Canonical boundary subspaces used by the classifier and tests.
BoundarySubspace periodic_phi_subspace();
BoundarySubspace antiperiodic_phi_subspace();
BoundarySubspace dirichlet_phi_subspace();            // phi(a) = phi(b) = 0, phi' free
BoundarySubspace dirichlet_neumann_phi_subspace();    // everything pinned to zero

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Classify a transfer-form boundary relation: +-identity are the
/// periodic/antiperiodic classes, an inverse-parameter fit detects the
/// flux-balanced family, a successful reconstruction of a unitary
/// symmetric N places the relation in the general pseudo self-adjoint
/// momentum family, anything else is not pseudo self-adjoint.
BcClass classify_bc(const Complex2x2& transfer, double tol = 1e-9);
BcClass classify_bc(const TransferMatrixV& v, double tol = 1e-9);
BcClass classify_bc(const SeparatedBcParams& p);
/// Raw one-component boundary relation, classified through the family
/// membership solver.
BcClass classify_bc(const BoundarySubspace& subspace, double interval_length);

/// Try to recover NMatrixParams from a transfer matrix (the inverse of
/// n_to_transfer). Absent when no unitary symmetric N reproduces it.
std::optional<NMatrixParams> transfer_to_n(const Complex2x2& v, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Baseline: free 1D Schroedinger particle
// ---------------------------------------------------------------------------

/// The one-phase Schroedinger boundary family e^{i theta} admits only the
/// theta that survive the parity image of the relation, i.e. the roots of
/// e^{2 i theta} = 1 on [0, 2 pi): exactly {0, pi}.
std::vector<double> schrodinger_parity_restriction();

}  // namespace kfgm
