#pragma once

// Discrete-time identification of the switching threshold of a scalar
// piecewise map. The model is driven by a convex blend of its own state and
// the observed true state; the threshold estimate follows a gradient step on
// the squared sync error, with the parameter sensitivity carried by an
// auxiliary linear recurrence.

#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "syncid/core.hpp"

namespace syncid {

/// A scalar map that switches from f1 to f2 when g(x) exceeds sigma().
template <class M>
concept PiecewiseMap = requires(const M& m, Real x) {
    { m.f1(x) } -> std::convertible_to<Real>;
    { m.df1(x) } -> std::convertible_to<Real>;
    { m.f2(x) } -> std::convertible_to<Real>;
    { m.df2(x) } -> std::convertible_to<Real>;
    { m.g(x) } -> std::convertible_to<Real>;
    { m.dg(x) } -> std::convertible_to<Real>;
    { m.sigma() } -> std::convertible_to<Real>;
};

/// Tent map with a movable break: mu*x below the threshold, mu*(1-x) above.
class TentMap {
public:
    TentMap(Real mu, Real sigma) : mu_(mu), sigma_(sigma) {
        if (!std::isfinite(mu) || !std::isfinite(sigma))
            throw std::invalid_argument("tent map parameters must be finite");
    }

    Real mu() const noexcept { return mu_; }
    Real sigma() const noexcept { return sigma_; }

    Real f1(Real x) const noexcept { return mu_ * x; }
    Real df1(Real) const noexcept { return mu_; }
    Real f2(Real x) const noexcept { return mu_ * (1.0 - x); }
    Real df2(Real) const noexcept { return -mu_; }
    Real g(Real x) const noexcept { return x; }
    Real dg(Real) const noexcept { return 1.0; }

private:
    Real mu_;
    Real sigma_;
};

static_assert(PiecewiseMap<TentMap>);

template <PiecewiseMap M>
Real eval_piecewise(const M& map, Real sigma, Real x) {
    return map.g(x) <= sigma ? map.f1(x) : map.f2(x);
}

/// One iterate of the true system at its own threshold.
template <PiecewiseMap M>
Real step_true(const M& map, Real x, std::uint64_t step = 0) {
    const Real next = eval_piecewise(map, map.sigma(), x);
    if (!within_bound(next)) throw DivergenceError(step, "true orbit left the bounded region");
    return next;
}

struct DiscreteGains {
    Real eps_couple;  ///< weight of the model's own state in the drive signal
    Real eta;         ///< gradient step; 0 freezes the estimate
    DeltaKernel kernel;

    void validate() const {
        if (!(eps_couple > 0.0 && eps_couple < 1.0))
            throw std::invalid_argument("eps_couple must lie in (0, 1)");
        if (!(eta >= 0.0) || !std::isfinite(eta))
            throw std::invalid_argument("eta must be finite and non-negative");
    }
};

struct Interval {
    Real lo;
    Real hi;

    Real clamp(Real v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
    bool contains(Real v) const noexcept { return v >= lo && v <= hi; }
};

/// Estimate interval and sensitivity saturation. |p| grows without bound
/// along synchronized orbits that revisit the kernel support, so it is
/// saturated at `p_limit` before the divergence guard is reached.
struct DiscreteBounds {
    Interval sigma{0.0, 1.0};
    Real p_limit = 100.0;
};

struct DiscreteIdState {
    Real x = 0.0;          ///< true state
    Real y = 0.0;          ///< model state
    Real sigma_est = 0.0;  ///< threshold estimate
    Real p = 0.0;          ///< dy/d(sigma_est)
    std::uint64_t k = 0;
};

/// Drive signal eps*y + (1-eps)*x, written so that y == x yields x exactly.
inline Real coupled_input(Real x, Real y, const DiscreteGains& gains) noexcept {
    return x + gains.eps_couple * (y - x);
}

/// Coefficients of the sensitivity recurrence p' = a*p + b at drive value ytilde.
struct SensitivityCoefficients {
    Real a;
    Real b;
};

template <PiecewiseMap M>
SensitivityCoefficients sensitivity_coefficients(const M& map, const DiscreteGains& gains,
                                                 Real sigma_est, Real ytilde) {
    const Real s = sigma_est - map.g(ytilde);
    const Real h = heaviside(s);
    const Real d = gains.kernel(s);
    const Real f1 = map.f1(ytilde);
    const Real f2 = map.f2(ytilde);
    const Real a = gains.eps_couple *
                   (map.df1(ytilde) * h + map.df2(ytilde) * (1.0 - h) + (f2 - f1) * d * map.dg(ytilde));
    const Real b = (f1 - f2) * d;
    return {a, b};
}

struct DiscreteStep {
    DiscreteIdState next;
    SensitivityCoefficients coeffs;
    bool sigma_clamped = false;
    bool p_saturated = false;
};

/// Advances true state, model, estimate and sensitivity by one iterate. Every
/// right-hand side reads step-k values.
template <PiecewiseMap M>
DiscreteStep step_identifier(const DiscreteIdState& s, const M& map, const DiscreteGains& gains,
                             const DiscreteBounds& bounds = {}) {
    const Real ytilde = coupled_input(s.x, s.y, gains);
    const auto coeffs = sensitivity_coefficients(map, gains, s.sigma_est, ytilde);

    DiscreteStep out;
    out.coeffs = coeffs;
    DiscreteIdState& n = out.next;
    n.k = s.k + 1;
    const Real h = heaviside(s.sigma_est - map.g(ytilde));
    n.y = h > 0.0 ? map.f1(ytilde) : map.f2(ytilde);
    const Real raw_sigma = s.sigma_est + 2.0 * gains.eta * (s.x - s.y) * s.p;
    n.sigma_est = bounds.sigma.clamp(raw_sigma);
    out.sigma_clamped = n.sigma_est != raw_sigma;
    const Real raw_p = coeffs.a * s.p + coeffs.b;
    n.p = std::fmax(-bounds.p_limit, std::fmin(bounds.p_limit, raw_p));
    out.p_saturated = n.p != raw_p;
    n.x = step_true(map, s.x, n.k);

    if (!within_bound(n.y)) throw DivergenceError(n.k, "model state left the bounded region");
    if (!within_bound(raw_p)) throw DivergenceError(n.k, "sensitivity p left the bounded region");
    if (!std::isfinite(n.sigma_est)) throw DivergenceError(n.k, "estimate is not finite");
    return out;
}

struct DiscreteExperiment {
    TentMap map{1.4, 0.6};
    DiscreteGains gains{0.55, 1e-5, DeltaKernel{0.1}};
    DiscreteBounds bounds;
    Real sigma0 = 0.31;
    std::uint64_t steps = 150000;
    std::uint64_t seed = 1;
    /// Overrides the random initial conditions when set.
    std::optional<Real> x0;
    std::optional<Real> y0;
};

struct DiscreteRunResult {
    DiscreteIdState final_state;
    std::uint64_t sigma_clamps = 0;
    std::uint64_t p_saturations = 0;
    std::optional<std::string> failure;  ///< set when the run aborted early
};

/// Iterates the identifier for `steps` iterates from uniform random x0, y0 in
/// [0, 1]. `observe(state)` is called for k = 0..steps.
template <class Observer>
DiscreteRunResult run_discrete_experiment(const DiscreteExperiment& exp, Observer&& observe) {
    exp.gains.validate();
    Rng rng(exp.seed);
    DiscreteIdState s;
    s.x = rng.uniform();
    s.y = rng.uniform();
    if (exp.x0) s.x = *exp.x0;
    if (exp.y0) s.y = *exp.y0;
    s.sigma_est = exp.bounds.sigma.clamp(exp.sigma0);
    s.p = 0.0;

    DiscreteRunResult result;
    observe(s);
    try {
        for (std::uint64_t k = 0; k < exp.steps; ++k) {
            const auto st = step_identifier(s, exp.map, exp.gains, exp.bounds);
            result.sigma_clamps += st.sigma_clamped;
            result.p_saturations += st.p_saturated;
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
