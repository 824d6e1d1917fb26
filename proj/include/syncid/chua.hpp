#pragma once

// Continuous-time identification of the symmetric breakpoint of Chua's
// circuit. True and model circuits, the breakpoint estimate and the scalar
// sensitivity q1 = dy1/dsigma' are advanced together as one 8-dimensional
// system with fixed-step RK4. h(x) = x1 and Gamma = [gamma, 0, 0].

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "syncid/core.hpp"
#include "syncid/discrete.hpp"  // Interval

namespace syncid {

struct ChuaParams {
    Real alpha = 15.6;
    Real beta_chua = 25.58;
    Real m0 = -8.0 / 7.0;
    Real m1 = -5.0 / 7.0;
    Real sigma = 1.0;  ///< true breakpoint

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("chua sigma must be positive");
        for (Real v : {alpha, beta_chua, m0, m1})
            if (!std::isfinite(v)) throw std::invalid_argument("chua parameters must be finite");
    }
};

/// Piecewise-linear diode characteristic with breakpoints at +-sigma.
inline Real phi(const ChuaParams& p, Real sigma, Real x) noexcept {
    if (x >= sigma) return p.m1 * x + sigma * (p.m0 - p.m1);
    if (x <= -sigma) return p.m1 * x - sigma * (p.m0 - p.m1);
    return p.m0 * x;
}

inline Vec<3> chua_rhs(const ChuaParams& p, Real sigma, const Vec<3>& s) noexcept {
    return {p.alpha * (s[1] - s[0] - phi(p, sigma, s[0])), s[0] - s[1] + s[2], -p.beta_chua * s[1]};
}

struct ContinuousGains {
    Real gamma = 15.0;
    Real zeta = 1.0;
    Real dt = 0.005;

    void validate() const {
        if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
        if (!(zeta >= 0.0) || !std::isfinite(zeta))
            throw std::invalid_argument("zeta must be finite and non-negative");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    }
};

/// Chua model at the estimate plus diffusive drive on the first component.
inline Vec<3> model_rhs(const ChuaParams& p, Real sigma_est, const Vec<3>& y, Real x_obs,
                        const ContinuousGains& gains) noexcept {
    Vec<3> r = chua_rhs(p, sigma_est, y);
    r[0] += gains.gamma * (x_obs - y[0]);
    return r;
}

/// dq1/dt = c*q1 + d. The q2 coupling of the full sensitivity system is not
/// carried; the Dirac terms from differentiating the step functions vanish on
/// their own supports.
inline Real q1_rhs(const ChuaParams& p, Real sigma_est, Real y1, Real q1,
                   const ContinuousGains& gains) noexcept {
    const Real lower = heaviside(-sigma_est - y1);
    const Real upper = heaviside(y1 - sigma_est);
    const Real c = -gains.gamma - p.alpha * (1.0 + p.m0 + (p.m1 - p.m0) * (lower + upper));
    const Real d = -p.alpha * (p.m1 - p.m0) * (lower - upper);
    return c * q1 + d;
}

struct ContinuousIdState {
    Vec<3> x{};
    Vec<3> y{};
    Real sigma_est = 0.0;
    Real q1 = 0.0;
    std::uint64_t k = 0;  ///< step index; t = k * dt
};

struct ContinuousBounds {
    Interval sigma{0.05, 10.0};
    Real q1_limit = 1e3;
};

struct ContinuousStep {
    ContinuousIdState next;
    bool sigma_clamped = false;
    bool q1_saturated = false;
};

namespace detail {

inline Vec<8> pack(const ContinuousIdState& s) {
    return {s.x[0], s.x[1], s.x[2], s.y[0], s.y[1], s.y[2], s.sigma_est, s.q1};
}

inline Vec<8> joint_rhs(const ChuaParams& p, const ContinuousGains& g, const Vec<8>& z) {
    const Vec<3> x{z[0], z[1], z[2]};
    const Vec<3> y{z[3], z[4], z[5]};
    const Real sigma_est = z[6];
    const Real q1 = z[7];
    const Vec<3> dx = chua_rhs(p, p.sigma, x);
    const Vec<3> dy = model_rhs(p, sigma_est, y, x[0], g);
    const Real dsigma = 2.0 * g.zeta * (x[0] - y[0]) * q1;
    const Real dq1 = q1_rhs(p, sigma_est, y[0], q1, g);
    return {dx[0], dx[1], dx[2], dy[0], dy[1], dy[2], dsigma, dq1};
}

}  // namespace detail

/// One RK4 step of the joint system, then clamping of sigma' and q1.
inline ContinuousStep step_continuous_identifier(const ContinuousIdState& s, const ChuaParams& p,
                                                 const ContinuousGains& g,
                                                 const ContinuousBounds& bounds = {}) {
    const Vec<8> z = rk4_step<8>([&](const Vec<8>& v) { return detail::joint_rhs(p, g, v); },
                                 detail::pack(s), g.dt);
    ContinuousStep out;
    ContinuousIdState& n = out.next;
    n.k = s.k + 1;
    n.x = {z[0], z[1], z[2]};
    n.y = {z[3], z[4], z[5]};
    n.sigma_est = bounds.sigma.clamp(z[6]);
    out.sigma_clamped = n.sigma_est != z[6];
    n.q1 = std::fmax(-bounds.q1_limit, std::fmin(bounds.q1_limit, z[7]));
    out.q1_saturated = n.q1 != z[7];

    for (std::size_t i = 0; i < 3; ++i) {
        if (!within_bound(n.x[i])) throw DivergenceError(n.k, "true chua state left the bounded region");
        if (!within_bound(n.y[i])) throw DivergenceError(n.k, "model chua state left the bounded region");
    }
    if (!std::isfinite(z[6]) || !std::isfinite(z[7]))
        throw DivergenceError(n.k, "estimate or sensitivity is not finite");
    return out;
}

/// Integrates the uncoupled circuit from a seeded point in [-0.1, 0.1]^3 for
/// `burn_in` time units. A divergent attempt is retried with a perturbed seed.
inline Vec<3> sample_chua_attractor(const ChuaParams& p, std::uint64_t seed, Real burn_in,
                                    Real dt = 0.005) {
    if (!(burn_in > 0.0)) throw std::invalid_argument("burn_in must be positive");
    constexpr int kAttempts = 10;
    const auto steps = static_cast<std::uint64_t>(std::llround(burn_in / dt));
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
        Vec<3> s{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
        bool ok = true;
        for (std::uint64_t k = 0; k < steps && ok; ++k) {
            s = rk4_step<3>([&](const Vec<3>& v) { return chua_rhs(p, p.sigma, v); }, s, dt);
            for (Real v : s) ok = ok && within_bound(v);
        }
        if (ok) return s;
    }
    throw std::runtime_error("chua burn-in diverged for every retry of seed " + std::to_string(seed));
}

struct ContinuousExperiment {
    ChuaParams params;
    ContinuousGains gains;
    ContinuousBounds bounds;
    Real sigma0 = 2.5;
    Real t_end = 500.0;
    Real burn_in = 200.0;
    std::uint64_t seed = 1;

    std::uint64_t steps() const { return static_cast<std::uint64_t>(std::llround(t_end / gains.dt)); }
};

struct ContinuousRunResult {
    ContinuousIdState final_state;
    std::uint64_t sigma_clamps = 0;
    std::uint64_t q1_saturations = 0;
    std::optional<std::string> failure;
};

/// True and model start from independent attractor samples; q1(0) = 0.
/// `observe(state)` sees every step including the initial one.
template <class Observer>
ContinuousRunResult run_continuous_experiment(const ContinuousExperiment& exp, Observer&& observe) {
    exp.params.validate();
    exp.gains.validate();
    Rng master(exp.seed);
    const std::uint64_t seed_true = master.next();
    const std::uint64_t seed_model = master.next();

    ContinuousIdState s;
    s.x = sample_chua_attractor(exp.params, seed_true, exp.burn_in, exp.gains.dt);
    s.y = sample_chua_attractor(exp.params, seed_model, exp.burn_in, exp.gains.dt);
    s.sigma_est = exp.bounds.sigma.clamp(exp.sigma0);
    s.q1 = 0.0;

    ContinuousRunResult result;
    observe(s);
    try {
        const std::uint64_t steps = exp.steps();
        for (std::uint64_t k = 0; k < steps; ++k) {
            const auto st = step_continuous_identifier(s, exp.params, exp.gains, exp.bounds);
            result.sigma_clamps += st.sigma_clamped;
            result.q1_saturations += st.q1_saturated;
            s = st.next;
            observe(s);
        }
    } catch (const DivergenceError& e) {
        result.failure = e.what();
    }
    result.final_state = s;
    return result;
}

}  // namespace syncid
