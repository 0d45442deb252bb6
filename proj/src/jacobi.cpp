#include <algorithm>
#include <cmath>
#include <vector>

#include "kfgm/errors.hpp"
#include "kfgm/solvers.hpp"

// Dense symmetric eigensolver: classic cyclic Jacobi sweeps with the
// Rutishauser rotation update, run until the off-diagonal mass is below
// 1e-12 of the matrix scale.

namespace kfgm {

std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
    if (n <= 0 || static_cast<std::size_t>(n) * n != a.size())
        throw std::invalid_argument("jacobi: matrix size mismatch");
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(at(i, j)));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    const double target = 1e-12 * scale;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(at(i, j)));
        if (off <= target) {
            std::vector<double> eig(n);
            for (int i = 0; i < n; ++i) eig[i] = at(i, i);
            std::sort(eig.begin(), eig.end());
            return eig;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) <= 0.1 * target) continue;
                const double theta = 0.5 * (at(q, q) - at(p, p)) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                at(p, p) -= h;
                at(q, q) += h;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = akp - s * (akq + tau * akp);
                    at(p, k) = at(k, p);
                    at(k, q) = akq + s * (akp - tau * akq);
                    at(q, k) = at(k, q);
                }
            }
        }
    }
    throw ConvergenceError("jacobi: off-diagonal mass did not reach target in 60 sweeps");
}

std::vector<double> fd_eigensolver(WrapKind bc, const Grid& grid) {
    if (grid.n > 600)
        throw std::invalid_argument("fd eigensolver: desk-scale oracle, grid.n must be <= 600");
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument(
            "fd eigensolver: only the periodic/antiperiodic wraparound relations are built "
            "into the stencil matrix");

    // -d^2/dx^2 on the distinct samples, seam entries with the wrap sign.
    const int n = grid.distinct();
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const double seam = bc == WrapKind::Periodic ? -inv_h2 : +inv_h2;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        at(i, i) = 2.0 * inv_h2;
        at(i, (i + 1) % n) += (i + 1 == n) ? seam : -inv_h2;
        at(i, (i + n - 1) % n) += (i == 0) ? seam : -inv_h2;
    }
    return jacobi_eigenvalues(std::move(a), n);
}

}  // namespace kfgm
