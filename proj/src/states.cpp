#include "kfgm/states.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kfgm {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_sign(WrapKind w) { return w == WrapKind::Antiperiodic ? -1.0 : 1.0; }

// Uniform double in [-1, 1), bit-stable across platforms (the standard
// distributions are implementation-defined).
double seeded_uniform(std::mt19937_64& gen) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

MajoranaSign flip(MajoranaSign s) {
    if (s == MajoranaSign::Plus) return MajoranaSign::Minus;
    if (s == MajoranaSign::Minus) return MajoranaSign::Plus;
    return MajoranaSign::None;
}

}  // namespace

std::string to_string(MajoranaSign s) {
    switch (s) {
        case MajoranaSign::None: return "none";
        case MajoranaSign::Plus: return "plus";
        case MajoranaSign::Minus: return "minus";
    }
    return "?";
}

std::string to_string(WrapKind w) {
    switch (w) {
        case WrapKind::None: return "none";
        case WrapKind::Periodic: return "periodic";
        case WrapKind::Antiperiodic: return "antiperiodic";
    }
    return "?";
}

std::vector<cplx> derivative(std::span<const cplx> f, const Grid& g, WrapKind wrap) {
    const int n = g.n;
    const double h = g.spacing();
    std::vector<cplx> out(n);
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    if (wrap == WrapKind::None) {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    } else {
        // Sample n-1 is sample 0 shifted by one period (sign s), so the
        // ghost neighbours are s*f[n-2] on the left and s*f[1] on the right.
        const double s = wrap_sign(wrap);
        out[0] = (f[1] - s * f[n - 2]) / (2.0 * h);
        out[n - 1] = (s * f[1] - f[n - 2]) / (2.0 * h);
    }
    return out;
}

std::vector<cplx> second_derivative(std::span<const cplx> f, const Grid& g, WrapKind wrap) {
    const int n = g.n;
    const double h2 = g.spacing() * g.spacing();
    std::vector<cplx> out(n);
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    if (wrap == WrapKind::None) {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    } else {
        const double s = wrap_sign(wrap);
        out[0] = (s * f[n - 2] - 2.0 * f[0] + f[1]) / h2;
        out[n - 1] = (f[n - 2] - 2.0 * f[n - 1] + s * f[1]) / h2;
    }
    return out;
}

FvState charge_conjugate(const FvState& state) {
    FvState out = state;
    for (int i = 0; i < state.grid.n; ++i) {
        out.phi1[i] = std::conj(state.phi2[i]);
        out.phi2[i] = std::conj(state.phi1[i]);
    }
    return out;
}

FvState enforce_majorana(const Grid& grid, std::vector<cplx> phi1, MajoranaSign sign,
                         WrapKind wrap) {
    if (sign == MajoranaSign::None)
        throw std::invalid_argument("enforce_majorana: need a definite sign");
    FvState s;
    s.grid = grid;
    s.sign = sign;
    s.wrap = wrap;
    s.phi2.resize(phi1.size());
    const double f = sign == MajoranaSign::Plus ? 1.0 : -1.0;
    for (std::size_t i = 0; i < phi1.size(); ++i)
        s.phi2[i] = cplx{f * phi1[i].real(), -f * phi1[i].imag()};
    s.phi1 = std::move(phi1);
    return s;
}

FvState parity_transform(const FvState& state) {
    FvState out = state;
    const int n = state.grid.n;
    for (int i = 0; i < n; ++i) {
        out.phi1[i] = state.phi1[n - 1 - i];
        out.phi2[i] = state.phi2[n - 1 - i];
    }
    return out;
}

KfgState parity_transform(const KfgState& state) {
    KfgState out = state;
    const int n = state.grid.n;
    for (int i = 0; i < n; ++i) {
        out.phi[i] = state.phi[n - 1 - i];
        out.phi_dot[i] = state.phi_dot[n - 1 - i];
    }
    return out;
}

FvState fv_from_kfg(const KfgState& state, const UnitsConfig& units) {
    units.validate();
    const double r = units.hbar / units.rest_energy();
    FvState out;
    out.grid = state.grid;
    out.sign = state.sign;
    out.wrap = state.wrap;
    const int n = state.grid.n;
    out.phi1.resize(n);
    out.phi2.resize(n);
    for (int i = 0; i < n; ++i) {
        const cplx half = 0.5 * state.phi[i];
        const cplx rate = 0.5 * r * state.phi_dot[i];
        // phi1,2 = (phi +- i hbar phi_dot / mc^2)/2, assembled so a real
        // (phi, phi_dot) pair gives exactly conjugate components.
        out.phi1[i] = half + kI * rate;
        out.phi2[i] = half - kI * rate;
    }
    return out;
}

std::vector<cplx> kfg_from_fv(const FvState& state) {
    std::vector<cplx> out(state.grid.n);
    for (int i = 0; i < state.grid.n; ++i) out[i] = state.phi1[i] + state.phi2[i];
    return out;
}

FvState fv_rate_from_kfg(const KfgState& state, const UnitsConfig& units) {
    units.validate();
    const double wm = units.compton_frequency();
    const auto ddx = second_derivative(state.phi, state.grid, state.wrap);
    KfgState rate;
    rate.grid = state.grid;
    rate.sign = state.sign;
    rate.wrap = state.wrap;
    rate.phi = state.phi_dot;
    rate.phi_dot.resize(state.grid.n);
    for (int i = 0; i < state.grid.n; ++i)
        rate.phi_dot[i] = units.c * units.c * ddx[i] - wm * wm * state.phi[i];
    return fv_from_kfg(rate, units);
}

FvState fv_time_derivative(const FvState& state, const UnitsConfig& units) {
    FvState h = apply_fv_hamiltonian(state, units);
    const cplx f = 1.0 / (kI * units.hbar);
    for (int i = 0; i < state.grid.n; ++i) {
        h.phi1[i] *= f;
        h.phi2[i] *= f;
    }
    h.sign = state.sign;  // the equation of motion preserves the class
    return h;
}

FvState apply_momentum(const FvState& state, const UnitsConfig& units) {
    units.validate();
    FvState out = state;
    const auto d1 = derivative(state.phi1, state.grid, state.wrap);
    const auto d2 = derivative(state.phi2, state.grid, state.wrap);
    const cplx f = -kI * units.hbar;
    for (int i = 0; i < state.grid.n; ++i) {
        out.phi1[i] = f * d1[i];
        out.phi2[i] = f * d2[i];
    }
    out.sign = flip(state.sign);  // -i hbar d/dx swaps the two Majorana classes
    return out;
}

FvState apply_fv_hamiltonian(const FvState& state, const UnitsConfig& units) {
    units.validate();
    FvState out = state;
    const auto dd1 = second_derivative(state.phi1, state.grid, state.wrap);
    const auto dd2 = second_derivative(state.phi2, state.grid, state.wrap);
    const double kin = -units.hbar * units.hbar / (2.0 * units.m);
    const double rest = units.rest_energy();
    for (int i = 0; i < state.grid.n; ++i) {
        const cplx s = kin * (dd1[i] + dd2[i]);
        out.phi1[i] = s + rest * state.phi1[i];
        out.phi2[i] = -s - rest * state.phi2[i];
    }
    out.sign = flip(state.sign);
    return out;
}

DomainResiduals hamiltonian_domain_check(const FvState& state, const Complex2x2& v) {
    const Complex2Vector va = state.at_a();
    const Complex2Vector vb = state.at_b();
    const double r_val = max_abs(vb - v * va);

    const auto d1 = derivative(state.phi1, state.grid, state.wrap);
    const auto d2 = derivative(state.phi2, state.grid, state.wrap);
    const Complex2Vector da{d1.front(), d2.front()};
    const Complex2Vector db{d1.back(), d2.back()};
    const double r_der = max_abs(db - v * da);
    return {r_val, r_der};
}

DomainResiduals hamiltonian_domain_check(const FvState& state, const TransferMatrixV& v) {
    return hamiltonian_domain_check(state, v.matrix);
}

namespace {

struct ModeSet {
    std::vector<double> k;
    std::vector<bool> has_sine;  // k = 0 supports only the cosine shape
};

ModeSet admissible_modes(WrapKind bc, double length, int n_modes) {
    if (bc != WrapKind::Periodic && bc != WrapKind::Antiperiodic)
        throw std::invalid_argument("random state: bc must be periodic or antiperiodic");
    if (n_modes < 1) throw std::invalid_argument("random state: need at least one mode");
    ModeSet m;
    for (int j = 0; j < n_modes; ++j) {
        const double k = bc == WrapKind::Periodic ? 2.0 * kPi * j / length
                                                  : (2.0 * j + 1.0) * kPi / length;
        m.k.push_back(k);
        m.has_sine.push_back(k != 0.0);
    }
    return m;
}

}  // namespace

KfgState random_kfg_state(std::uint64_t seed, const Grid& grid, WrapKind bc, MajoranaSign sign,
                          int n_modes, const UnitsConfig& units) {
    if (sign == MajoranaSign::None)
        throw std::invalid_argument("random state: need a definite Majorana sign");
    if (2 * n_modes + 2 > grid.distinct())
        throw std::invalid_argument("random state: too many modes for this grid");
    units.validate();
    std::mt19937_64 gen(seed);
    const ModeSet modes = admissible_modes(bc, grid.length(), n_modes);

    std::vector<double> u(grid.n, 0.0), v(grid.n, 0.0);
    for (std::size_t j = 0; j < modes.k.size(); ++j) {
        const double k = modes.k[j];
        const double w = std::sqrt(units.compton_frequency() * units.compton_frequency() +
                                   units.c * units.c * k * k);
        const double ac = seeded_uniform(gen), as = seeded_uniform(gen);
        const double bc_ = seeded_uniform(gen), bs = seeded_uniform(gen);
        for (int i = 0; i < grid.n; ++i) {
            const double ph = k * (grid.x(i) - grid.a);
            u[i] += ac * std::cos(ph);
            v[i] += w * bc_ * std::cos(ph);
            if (modes.has_sine[j]) {
                u[i] += as * std::sin(ph);
                v[i] += w * bs * std::sin(ph);
            }
        }
    }
    double peak = 0.0;
    for (double x : u) peak = std::max(peak, std::abs(x));
    const double scale = peak > 0.0 ? 1.0 / peak : 1.0;

    KfgState s;
    s.grid = grid;
    s.sign = sign;
    s.wrap = bc;
    s.phi.resize(grid.n);
    s.phi_dot.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        if (sign == MajoranaSign::Plus) {
            s.phi[i] = cplx{scale * u[i], 0.0};
            s.phi_dot[i] = cplx{scale * v[i], 0.0};
        } else {
            s.phi[i] = cplx{0.0, scale * u[i]};
            s.phi_dot[i] = cplx{0.0, scale * v[i]};
        }
    }
    return s;
}

FvState random_state(std::uint64_t seed, const Grid& grid, WrapKind bc, MajoranaSign sign,
                     int n_modes, const UnitsConfig& units) {
    return fv_from_kfg(random_kfg_state(seed, grid, bc, sign, n_modes, units), units);
}

FvState random_fv_state_general(std::uint64_t seed, const Grid& grid, WrapKind bc, int n_modes) {
    std::mt19937_64 gen(seed);
    const ModeSet modes = admissible_modes(bc, grid.length(), n_modes);
    FvState s;
    s.grid = grid;
    s.sign = MajoranaSign::None;
    s.wrap = bc;
    s.phi1.assign(grid.n, cplx{});
    s.phi2.assign(grid.n, cplx{});
    for (auto* comp : {&s.phi1, &s.phi2}) {
        for (std::size_t j = 0; j < modes.k.size(); ++j) {
            const cplx ac{seeded_uniform(gen), seeded_uniform(gen)};
            const cplx as{seeded_uniform(gen), seeded_uniform(gen)};
            for (int i = 0; i < grid.n; ++i) {
                const double ph = modes.k[j] * (grid.x(i) - grid.a);
                (*comp)[i] += ac * std::cos(ph);
                if (modes.has_sine[j]) (*comp)[i] += as * std::sin(ph);
            }
        }
    }
    return s;
}

}  // namespace kfgm
