#pragma once

// Shared numerical kernels used by every identifier: step functions, the
// triangular delta kernel, scalar observation/coupling selectors, the
// divergence guard and a reproducible random source.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace syncid {

using Real = double;

template <std::size_t N>
using Vec = std::array<Real, N>;

/// Orbits leaving [-kDivergenceBound, kDivergenceBound] are reported as divergent.
inline constexpr Real kDivergenceBound = 1e6;

/// Unit step with H(0) = 1.
constexpr Real heaviside(Real x) noexcept { return x >= 0.0 ? 1.0 : 0.0; }

class DeltaKernel {
public:
    /// Triangular kernel 2/w * max(1 - |u/w|, 0). With `normalized` the
    /// result is halved so the kernel has unit mass.
    explicit DeltaKernel(Real width, bool normalized = false)
        : width_(width), normalized_(normalized) {
        if (!(width > 0.0) || !std::isfinite(width))
            throw std::invalid_argument("delta kernel width must be positive and finite");
    }

    Real width() const noexcept { return width_; }
    bool normalized() const noexcept { return normalized_; }

    Real operator()(Real u) const noexcept {
        const Real tri = 1.0 - std::fabs(u / width_);
        if (tri <= 0.0) return 0.0;
        const Real v = 2.0 / width_ * tri;
        return normalized_ ? 0.5 * v : v;
    }

private:
    Real width_;
    bool normalized_;
};

inline Real delta_smoothed(Real u, const DeltaKernel& kernel) noexcept { return kernel(u); }

/// Scalar observation h(x) = x[selector]. Dh is the unit row at `selector`.
class Observation {
public:
    Observation(std::size_t selector, std::size_t dim) : selector_(selector) {
        if (selector >= dim)
            throw std::invalid_argument("observation selector " + std::to_string(selector) +
                                        " out of range for dimension " + std::to_string(dim));
    }

    std::size_t selector() const noexcept { return selector_; }

    Real operator()(std::span<const Real> state) const noexcept { return state[selector_]; }

private:
    std::size_t selector_;
};

/// Single-component diffusive coupling Gamma = gain * e_target.
class Coupling {
public:
    Coupling(Real gain, std::size_t target, std::size_t dim) : gain_(gain), target_(target) {
        if (target >= dim)
            throw std::invalid_argument("coupling target " + std::to_string(target) +
                                        " out of range for dimension " + std::to_string(dim));
        if (!std::isfinite(gain)) throw std::invalid_argument("coupling gain must be finite");
    }

    Real gain() const noexcept { return gain_; }
    std::size_t target() const noexcept { return target_; }

    /// Adds Gamma * error to `rate` in place.
    void apply(std::span<Real> rate, Real error) const noexcept { rate[target_] += gain_ * error; }

private:
    Real gain_;
    std::size_t target_;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::uint64_t step, const std::string& what)
        : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what),
          step_(step) {}

    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

inline bool within_bound(Real v) noexcept {
    return std::isfinite(v) && std::fabs(v) <= kDivergenceBound;
}

/// Seeded 64-bit Mersenne Twister with a portable mapping to [0, 1).
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) from the top 53 bits.
    Real uniform() { return static_cast<Real>(engine_() >> 11) * 0x1.0p-53; }

    Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

/// Classical fourth-order Runge-Kutta step for an autonomous right-hand side.
template <std::size_t N, class Rhs>
Vec<N> rk4_step(Rhs&& rhs, const Vec<N>& z, Real dt) {
    auto axpy = [](const Vec<N>& base, Real s, const Vec<N>& k) {
        Vec<N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + s * k[i];
        return out;
    };
    const Vec<N> k1 = rhs(z);
    const Vec<N> k2 = rhs(axpy(z, 0.5 * dt, k1));
    const Vec<N> k3 = rhs(axpy(z, 0.5 * dt, k2));
    const Vec<N> k4 = rhs(axpy(z, dt, k3));
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace syncid
