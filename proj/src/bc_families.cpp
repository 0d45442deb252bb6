#include "kfgm/bc_families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kfgm/errors.hpp"

namespace kfgm {

namespace {

constexpr double kPi = std::numbers::pi;

cplx expi(double t) { return {std::cos(t), std::sin(t)}; }

void require_open_mu(double mu) {
    if (!(mu > 1e-12 && mu < kPi - 1e-12)) {
        std::ostringstream os;
        os << "mu = " << mu << " outside the open interval (0, pi); the transfer form has a "
              "1/sin(mu) pole at the ends";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

std::string to_string(BcKind k) {
    switch (k) {
        case BcKind::Periodic: return "periodic";
        case BcKind::Antiperiodic: return "antiperiodic";
        case BcKind::FluxBalanced: return "flux_balanced";
        case BcKind::ConfiningSeparated: return "confining_separated";
        case BcKind::GeneralPseudoSelfAdjoint: return "general_pseudo_self_adjoint";
        case BcKind::NotPseudoSelfAdjoint: return "not_pseudo_self_adjoint";
    }
    return "?";
}

std::string to_string(Branch b) { return b == Branch::Upper ? "upper" : "lower"; }

double NMatrixParams::norm_defect() const {
    return std::abs(m0 * m0 + m1 * m1 + m3 * m3 - 1.0);
}

void NMatrixParams::validate() const {
    if (norm_defect() > 1e-9)
        throw std::invalid_argument("N parameters violate the unit-norm constraint");
    if (mu < 0.0 || mu >= kPi)
        throw std::invalid_argument("N parameter mu must lie in [0, pi)");
}

double GeneralKfgBcParams::norm_defect() const {
    return std::abs(n0 * n0 + n1 * n1 + n2 * n2 + n3 * n3 - 1.0);
}

Complex2x2 build_n_matrix(const NMatrixParams& p) {
    p.validate();
    const cplx phase = expi(p.mu);
    return {phase * cplx{p.m0, -p.m3}, phase * cplx{0.0, -p.m1},
            phase * cplx{0.0, -p.m1}, phase * cplx{p.m0, p.m3}};
}

TransferMatrixV n_to_transfer(const NMatrixParams& p) {
    p.validate();
    if (std::abs(p.m1) <= 1e-12)
        throw SeparatedBranchError(
            "m1 = 0: the relation separates per wall; use separated_branch_analysis()");
    const cplx pref = kI / p.m1;
    TransferMatrixV v;
    v.mu = p.mu;
    v.matrix = {pref * (-expi(p.mu)), pref * cplx{p.m0, -p.m3},
                pref * (-cplx{p.m0, p.m3}), pref * expi(-p.mu)};
    // Tag the branch only when the parameters sit on the flux-balanced line.
    if (std::abs(p.m3) <= 1e-12 && std::abs(p.m0 + std::cos(p.mu)) <= 1e-12)
        v.branch = p.m1 < 0.0 ? Branch::Upper : Branch::Lower;
    return v;
}

NMatrixParams flux_balanced_params(double mu, Branch branch) {
    require_open_mu(mu);
    const double s = branch == Branch::Upper ? -1.0 : +1.0;
    return {mu, -std::cos(mu), s * std::sin(mu), 0.0};
}

TransferMatrixV flux_balanced_transfer(double mu, Branch branch) {
    require_open_mu(mu);
    const double sign = branch == Branch::Upper ? -1.0 : +1.0;
    const cplx pref = sign * kI / std::sin(mu);
    TransferMatrixV v;
    v.mu = mu;
    v.branch = branch;
    v.matrix = {pref * (-expi(mu)), pref * cplx{-std::cos(mu), 0.0},
                pref * cplx{std::cos(mu), 0.0}, pref * expi(-mu)};
    return v;
}

double flux_balance_residual(const Complex2x2& v) {
    const Complex2x2 w = tau3_plus_i_tau2();
    const Complex2x2 q = adjoint(w) * w;
    return max_abs(adjoint(v) * q * v - q);
}

double flux_balance_residual(const TransferMatrixV& v) { return flux_balance_residual(v.matrix); }

namespace {

// Numeric route for the flux constraint. On the unit sheet
// m1^2 = 1 - m0^2 - m3^2 the three balance conditions read
//   E1 = 1 + m0 cos(mu) + m3 sin(mu) - m1^2        (real)
//   E2 = (e^{i mu} + m0 + i m3)^2 + m1^2           (complex)
// (the conjugate condition carries no extra information). They are
// polynomial in (m0, m3), so a damped Gauss-Newton from a grid of starts
// finds the unique interior root without coordinate-descent pathologies.
struct FluxSystem {
    double c, s;

    void residual(double m0, double m3, double r[3]) const {
        const double m1sq = 1.0 - m0 * m0 - m3 * m3;
        r[0] = 1.0 + m0 * c + m3 * s - m1sq;
        const cplx z = cplx{c + m0, s + m3};
        const cplx e2 = z * z + m1sq;
        r[1] = e2.real();
        r[2] = e2.imag();
    }

    double merit(double m0, double m3) const {
        double r[3];
        residual(m0, m3, r);
        return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    }

    // Analytic Jacobian of (E1, Re E2, Im E2).
    void jacobian(double m0, double m3, double j[3][2]) const {
        j[0][0] = c + 2.0 * m0;
        j[0][1] = s + 2.0 * m3;
        const cplx z = cplx{c + m0, s + m3};
        const cplx dz0 = 2.0 * z - 2.0 * m0;
        const cplx dz3 = 2.0 * kI * z - 2.0 * m3;
        j[1][0] = dz0.real();
        j[1][1] = dz3.real();
        j[2][0] = dz0.imag();
        j[2][1] = dz3.imag();
    }
};

// Grid-started Gauss-Newton; returns the best root of the flux system.
std::pair<double, double> flux_root_numeric(double mu) {
    const FluxSystem sys{std::cos(mu), std::sin(mu)};
    double best0 = 0.0, best3 = 0.0, best_f = 1e300;
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
            double m0 = -0.96 + 0.24 * i;
            double m3 = -0.96 + 0.24 * j;
            if (m0 * m0 + m3 * m3 > 1.0) continue;
            double f = sys.merit(m0, m3);
            for (int it = 0; it < 60; ++it) {
                double r[3], jac[3][2];
                sys.residual(m0, m3, r);
                sys.jacobian(m0, m3, jac);
                double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
                for (int k = 0; k < 3; ++k) {
                    a11 += jac[k][0] * jac[k][0];
                    a12 += jac[k][0] * jac[k][1];
                    a22 += jac[k][1] * jac[k][1];
                    b1 -= jac[k][0] * r[k];
                    b2 -= jac[k][1] * r[k];
                }
                const double det = a11 * a22 - a12 * a12;
                if (std::abs(det) < 1e-30) break;
                double d0 = (b1 * a22 - b2 * a12) / det;
                double d3 = (a11 * b2 - a12 * b1) / det;
                double step = 1.0;
                while (step > 1e-6 && sys.merit(m0 + step * d0, m3 + step * d3) >= f)
                    step *= 0.5;
                if (step <= 1e-6) break;
                m0 += step * d0;
                m3 += step * d3;
                f = sys.merit(m0, m3);
                if (f < 1e-28) break;
            }
            if (f < best_f && m0 * m0 + m3 * m3 < 1.0) {
                best_f = f;
                best0 = m0;
                best3 = m3;
            }
        }
    }
    return {best0, best3};
}

}  // namespace

std::vector<FluxSolution> solve_flux_constraint(const std::vector<double>& mu_samples) {
    std::vector<FluxSolution> out;
    out.reserve(2 * mu_samples.size());
    for (double mu : mu_samples) {
        require_open_mu(mu);
        const auto [num0, num3] = flux_root_numeric(mu);
        const double num1_abs = std::sqrt(std::max(0.0, 1.0 - num0 * num0 - num3 * num3));

        for (Branch branch : {Branch::Upper, Branch::Lower}) {
            const NMatrixParams closed = flux_balanced_params(mu, branch);
            const TransferMatrixV transfer = flux_balanced_transfer(mu, branch);

            // Both branches share the (m0, m3) root; only the m1 sign
            // distinguishes them, and the balance conditions see m1^2.
            const double gap = std::hypot(num0 - closed.m0, num3 - closed.m3,
                                          num1_abs - std::abs(closed.m1));
            if (gap > 1e-6)
                throw InternalConsistencyError(
                    "flux constraint: numeric root disagrees with the closed form");

            FluxSolution sol;
            sol.mu = mu;
            sol.branch = branch;
            sol.params = closed;
            sol.transfer = transfer;
            sol.closed_form_residual = flux_balance_residual(transfer);
            sol.numeric_gap = gap;
            sol.unit_norm_defect = closed.norm_defect();
            out.push_back(sol);
        }
    }
    return out;
}

double parity_constraint_residual(double mu) {
    // The three scalar conditions extracted from V^2 = 1 on the
    // flux-balanced family; identical for both branches.
    const double r1 = std::abs(std::sin(mu) * std::cos(mu));
    const cplx e2 = expi(2.0 * mu);
    const double c2 = std::cos(mu) * std::cos(mu) - std::sin(mu) * std::sin(mu);
    const double r2 = std::abs(e2 - c2);
    const double r3 = std::abs(expi(-2.0 * mu) - c2);
    return std::max({r1, r2, r3});
}

ParitySolution solve_parity_constraint() {
    // Scan (0, pi), bracket the sign change of cos(mu) (the common factor
    // of all three conditions), bisect, then confirm uniqueness.
    const int n = 4096;
    double lo = 0.0, hi = 0.0;
    for (int i = 1; i < n; ++i) {
        const double a = kPi * i / n;
        const double b = kPi * (i + 1) / n;
        if (std::cos(a) == 0.0) { lo = hi = a; break; }
        if (std::cos(a) * std::cos(b) < 0.0) { lo = a; hi = b; break; }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::cos(lo) * std::cos(mid) <= 0.0) hi = mid; else lo = mid;
    }
    const double root = 0.5 * (lo + hi);

    ParitySolution sol;
    sol.mu = root;
    sol.matrices = {flux_balanced_transfer(root, Branch::Upper),
                    flux_balanced_transfer(root, Branch::Lower)};
    double worst = parity_constraint_residual(root);
    for (const auto& v : sol.matrices)
        worst = std::max(worst, max_abs(v.matrix * v.matrix - Complex2x2::identity()));
    sol.worst_residual = worst;

    // No other common root: away from pi/2 at least one condition is fat.
    for (int i = 1; i < 512; ++i) {
        const double mu = kPi * i / 512;
        if (std::abs(mu - root) > 0.02 && parity_constraint_residual(mu) < 1e-3)
            throw InternalConsistencyError("parity constraint: unexpected extra root");
    }
    return sol;
}

SeparatedBranchResult separated_branch_analysis() {
    SeparatedBranchResult res;
    res.impenetrable = true;
    for (int idx = 0; idx < 2; ++idx) {
        const int sign = idx == 0 ? +1 : -1;
        SeparatedBranchSummary s;
        s.params = {sign};
        // mu = 0, m3 = 0, m0 = +-1: the wall relations decouple into a
        // single-point condition at each end.
        const double m0 = static_cast<double>(sign);
        s.wall_b = {1.0, -m0, 0.0, 0.0};
        s.wall_a = {0.0, 0.0, 1.0, -m0};
        s.kfg_bc = sign > 0 ? SeparatedKfgBc::TimeDerivativeDirichletNeumann
                            : SeparatedKfgBc::DirichletNeumann;
        // Either way the admissible one-component boundary data collapses
        // to the zero subspace (for the field or for its time derivative),
        // never the 2-dimensional slice the general family carves.
        s.in_general_kfg_family =
            kfg_family_membership(dirichlet_neumann_phi_subspace(), 1.0).has_value();
        res.branches[idx] = s;
    }
    return res;
}

// --- classification ---------------------------------------------------------

std::optional<NMatrixParams> transfer_to_n(const Complex2x2& v, double tol) {
    if (std::abs(det(v) - 1.0) > tol) return std::nullopt;
    if (std::abs(v.a11) < 1e-12) return std::nullopt;
    // Invert the transfer construction entry by entry.
    const double m1sq = 1.0 / (1.0 + std::norm(v.a12));
    for (double m1 : {std::sqrt(m1sq), -std::sqrt(m1sq)}) {
        const cplx phase = kI * m1 * v.a11;          // e^{i mu}
        if (std::abs(std::abs(phase) - 1.0) > tol) continue;
        double mu = std::arg(phase);
        if (mu < 0.0) {
            // Same relation with both phase and m's negated.
            mu += kPi;
            m1 = -m1;
        }
        if (mu >= kPi) mu -= kPi;
        const cplx m03 = -kI * m1 * v.a12;           // m0 - i m3
        NMatrixParams p{mu, m03.real(), m1, -m03.imag()};
        if (p.norm_defect() > 1e-9) continue;
        try {
            if (max_abs(n_to_transfer(p).matrix - v) <= 1e3 * tol) return p;
        } catch (const SeparatedBranchError&) {
            continue;
        }
    }
    return std::nullopt;
}

BcClass classify_bc(const Complex2x2& v, double tol) {
    const Complex2x2 id = Complex2x2::identity();
    if (max_abs(v - id) <= tol) return BcClass{BcKind::Periodic};
    if (max_abs(v - cplx{-1.0, 0.0} * id) <= tol) return BcClass{BcKind::Antiperiodic};

    // Flux-balanced fit: V = -+ (1 - i cot(mu) W). The W-component is read
    // off the (1,1) entry and verified against the whole matrix.
    const double tr_re = trace(v).real();
    if (std::abs(trace(v).imag()) <= 1e3 * tol &&
        (std::abs(tr_re - 2.0) <= 1e3 * tol || std::abs(tr_re + 2.0) <= 1e3 * tol)) {
        const Branch branch = tr_re < 0.0 ? Branch::Upper : Branch::Lower;
        const double s = branch == Branch::Upper ? -1.0 : +1.0;
        const cplx w_coef = (v.a11 - s) / kI;  // -+ cot(mu)
        if (std::abs(w_coef.imag()) <= 1e3 * tol) {
            const double cot = -s * w_coef.real();
            const double mu = std::atan2(1.0, cot);  // in (0, pi)
            if (mu > 1e-9 && mu < kPi - 1e-9 &&
                max_abs(v - flux_balanced_transfer(mu, branch).matrix) <= 1e3 * tol) {
                BcClass c{BcKind::FluxBalanced};
                c.mu = mu;
                c.branch = branch;
                return c;
            }
        }
    }

    if (auto p = transfer_to_n(v, tol)) {
        (void)p;
        return BcClass{BcKind::GeneralPseudoSelfAdjoint};
    }
    return BcClass{BcKind::NotPseudoSelfAdjoint};
}

BcClass classify_bc(const TransferMatrixV& v, double tol) { return classify_bc(v.matrix, tol); }

BcClass classify_bc(const SeparatedBcParams& p) {
    BcClass c{BcKind::ConfiningSeparated};
    c.m0_sign = p.m0_sign;
    return c;
}

BcClass classify_bc(const BoundarySubspace& subspace, double interval_length) {
    if (subspace_dimension(subspace) == 0) {
        // Everything pinned to zero at both walls: the confining residue.
        BcClass c{BcKind::ConfiningSeparated};
        c.m0_sign = -1;
        return c;
    }
    if (kfg_family_membership(subspace, interval_length))
        return BcClass{BcKind::GeneralPseudoSelfAdjoint};
    return BcClass{BcKind::NotPseudoSelfAdjoint};
}

std::vector<double> schrodinger_parity_restriction() {
    // Roots of |e^{2 i theta} - 1| on [0, 2 pi), found by bracketing the
    // sign changes of sin(theta) and keeping the true zeros.
    std::vector<double> roots;
    const int n = 2048;
    auto f = [](double t) { return std::sin(t); };
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * kPi * i / n;
        double b = 2.0 * kPi * (i + 1) / n;
        if (b >= 2.0 * kPi) b = 2.0 * kPi - 1e-15;
        bool bracket = f(a) == 0.0 || f(a) * f(b) < 0.0;
        if (!bracket) continue;
        double lo = a, hi = b;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(lo) * f(mid) <= 0.0) hi = mid; else lo = mid;
        }
        double root = 0.5 * (lo + hi);
        if (std::abs(root) < 1e-9) root = 0.0;
        if (std::abs(root - kPi) < 1e-9) root = kPi;
        if (std::abs(expi(2.0 * root) - cplx{1.0, 0.0}) > 1e-9) continue;
        if (roots.empty() || std::abs(roots.back() - root) > 1e-6) roots.push_back(root);
    }
    return roots;
}

}  // namespace kfgm
