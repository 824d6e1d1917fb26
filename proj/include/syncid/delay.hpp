#pragma once

// Identification of the delay of a delay differential equation. The model
// runs at the delay estimate tau', is driven diffusively by the observed true
// output, and tau' descends the squared sync error using the sensitivity
// r = dy/dtau'. Delayed states come from per-system history buffers and are
// held fixed across the RK4 stages of a step.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "syncid/core.hpp"
#include "syncid/discrete.hpp"  // Interval
#include "syncid/history.hpp"

namespace syncid {

template <std::size_t N>
using Mat = std::array<Vec<N>, N>;

/// dx/dt = rhs(x(t), x(t - tau)) with analytic Jacobians in both arguments.
template <class S>
concept DelaySystem = requires(const S& s, const Vec<S::dim>& v) {
    { S::dim } -> std::convertible_to<std::size_t>;
    { s.rhs(v, v) } -> std::same_as<Vec<S::dim>>;
    { s.d_rhs_current(v, v) } -> std::same_as<Mat<S::dim>>;
    { s.d_rhs_delayed(v, v) } -> std::same_as<Mat<S::dim>>;
};

inline Real mackey_glass_rhs(Real a, Real b, Real y, Real y_d) noexcept {
    const Real y2 = y_d * y_d;
    const Real y4 = y2 * y2;
    const Real y10 = y4 * y4 * y2;
    return -b * y + a * y_d / (1.0 + y10);
}

/// d/dy_d of a*y_d/(1 + y_d^10).
inline Real mackey_glass_d_delayed(Real a, Real y_d) noexcept {
    const Real y2 = y_d * y_d;
    const Real y4 = y2 * y2;
    const Real y10 = y4 * y4 * y2;
    const Real den = 1.0 + y10;
    return a * (1.0 - 9.0 * y10) / (den * den);
}

struct MackeyGlass {
    static constexpr std::size_t dim = 1;
    Real a = 0.2;
    Real b = 0.1;

    Vec<1> rhs(const Vec<1>& y, const Vec<1>& y_d) const noexcept {
        return {mackey_glass_rhs(a, b, y[0], y_d[0])};
    }
    Mat<1> d_rhs_current(const Vec<1>&, const Vec<1>&) const noexcept { return {{{-b}}}; }
    Mat<1> d_rhs_delayed(const Vec<1>&, const Vec<1>& y_d) const noexcept {
        return {{{mackey_glass_d_delayed(a, y_d[0])}}};
    }
};

static_assert(DelaySystem<MackeyGlass>);

/// True delay as a function of time: `base` up to `switch_time`, then
/// base + amplitude * sin(2 pi frequency t) when `varying` is set.
struct TauSchedule {
    Real base = 23.0;
    bool varying = false;
    Real amplitude = 3.0;
    Real frequency = 1e-4;
    Real switch_time = 1e4;

    static TauSchedule constant(Real tau) { return TauSchedule{tau, false}; }

    Real operator()(Real t) const noexcept {
        if (!varying || t <= switch_time) return base;
        return base + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
    }

    Real max_value() const noexcept { return varying ? base + std::fabs(amplitude) : base; }
    Real min_value() const noexcept { return varying ? base - std::fabs(amplitude) : base; }
};

/// What the model history stores as its derivative: the intrinsic vector field
/// rhs(y, y_d) or the full coupled model rate including the diffusive drive.
enum class DelayedRate { intrinsic, coupled };

struct DelayGains {
    Real gamma = 0.1;
    Real beta_gain = 1.0;
    Real dt = 0.05;
    TauSchedule schedule;
    std::size_t observed = 0;  ///< h(x) = x[observed]
    std::size_t coupled = 0;   ///< Gamma = gamma * e_coupled
    DelayedRate delayed_rate = DelayedRate::intrinsic;

    void validate() const {
        if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
        if (!(beta_gain >= 0.0) || !std::isfinite(beta_gain))
            throw std::invalid_argument("beta_gain must be finite and non-negative");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
        if (!(schedule.min_value() >= dt))
            throw std::invalid_argument("true delay must stay at least one step long");
    }
};

template <std::size_t N>
struct DelayIdState {
    Vec<N> x{};
    Vec<N> y{};
    Real tau_est = 0.0;
    Vec<N> r{};  ///< dy/dtau'
    std::int64_t k = 0;
};

/// Plain fixed-step integration of dx/dt = rhs(x, x(t - tau(t))) appending to
/// `history`, whose newest sample is the current state.
template <DelaySystem S>
void integrate_dde(const S& sys, HistoryBuffer<S::dim>& history, const TauSchedule& tau,
                   std::uint64_t steps) {
    constexpr std::size_t N = S::dim;
    const Real dt = history.dt();
    for (std::uint64_t n = 0; n < steps; ++n) {
        const std::int64_t k = history.newest_index();
        const Real t = history.time_at(k);
        const Vec<N> x = history.at(k).state;
        const Vec<N> xd = history.lookup(t - tau(t)).state;
        const Vec<N> next = rk4_step<N>([&](const Vec<N>& v) { return sys.rhs(v, xd); }, x, dt);
        for (Real v : next)
            if (!within_bound(v)) throw DivergenceError(static_cast<std::uint64_t>(k + 1), "dde state diverged");
        const Real t_next = history.time_at(k + 1);
        history.push({next, Vec<N>{}});
        const Vec<N> xd_next = history.lookup(t_next - tau(t_next)).state;
        history.update_newest({next, sys.rhs(next, xd_next)});
    }
}

template <DelaySystem S>
class DelayIdentifier {
public:
    static constexpr std::size_t N = S::dim;
    using Buffer = HistoryBuffer<N>;
    using State = DelayIdState<N>;

    struct StepInfo {
        bool tau_clamped = false;
    };

    /// Both buffers must end at the same index, which becomes the start step.
    DelayIdentifier(S sys, DelayGains gains, Interval tau_bounds, Buffer true_history,
                    Buffer model_history, Real tau0)
        : sys_(std::move(sys)),
          gains_(gains),
          tau_bounds_(tau_bounds),
          hx_(std::move(true_history)),
          hy_(std::move(model_history)),
          observe_(gains.observed, N),
          couple_(gains.gamma, gains.coupled, N) {
        gains_.validate();
        if (!(tau_bounds_.lo >= gains_.dt) || !(tau_bounds_.hi >= tau_bounds_.lo))
            throw std::invalid_argument("tau bounds must satisfy dt <= lo <= hi");
        const Real span = static_cast<Real>(hx_.capacity() - 2) * gains_.dt;
        if (tau_bounds_.hi > span || gains_.schedule.max_value() > span)
            throw std::invalid_argument("history span too short for the delay bounds");
        if (hx_.dt() != gains_.dt || hy_.dt() != gains_.dt)
            throw std::invalid_argument("history spacing must equal dt");
        if (hx_.newest_index() != hy_.newest_index())
            throw std::invalid_argument("true and model histories must end at the same step");
        state_.k = hx_.newest_index();
        state_.x = hx_.at(state_.k).state;
        state_.y = hy_.at(state_.k).state;
        state_.tau_est = tau_bounds_.clamp(tau0);
        state_.r = Vec<N>{};
    }

    const State& state() const noexcept { return state_; }
    Real time() const noexcept { return hx_.time_at(state_.k); }
    Real true_tau() const noexcept { return gains_.schedule(time()); }
    Real observed_true() const noexcept { return observe_(state_.x); }
    Real observed_model() const noexcept { return observe_(state_.y); }
    Real observed_sensitivity() const noexcept { return observe_(state_.r); }
    const Buffer& true_history() const noexcept { return hx_; }
    const Buffer& model_history() const noexcept { return hy_; }
    const DelayGains& gains() const noexcept { return gains_; }

    StepInfo step() {
        const Real t = time();
        const Vec<N> xd = hx_.lookup(t - gains_.schedule(t)).state;
        const auto yd_sample = hy_.lookup(t - state_.tau_est);
        const Vec<N>& yd = yd_sample.state;
        const Vec<N>& yd_rate = yd_sample.derivative;

        constexpr std::size_t M = 3 * N + 1;
        Vec<M> z{};
        for (std::size_t i = 0; i < N; ++i) {
            z[i] = state_.x[i];
            z[N + i] = state_.y[i];
            z[2 * N + 1 + i] = state_.r[i];
        }
        z[2 * N] = state_.tau_est;

        const std::size_t obs = observe_.selector();
        auto rhs = [&](const Vec<M>& v) {
            Vec<N> x, y, r;
            for (std::size_t i = 0; i < N; ++i) {
                x[i] = v[i];
                y[i] = v[N + i];
                r[i] = v[2 * N + 1 + i];
            }
            const Real err = x[obs] - y[obs];
            const Vec<N> dx = sys_.rhs(x, xd);
            Vec<N> dy = sys_.rhs(y, yd);
            couple_.apply(dy, err);
            const Real dtau = 2.0 * gains_.beta_gain * err * r[obs];
            const Mat<N> jc = sys_.d_rhs_current(y, yd);
            const Mat<N> jd = sys_.d_rhs_delayed(y, yd);
            Vec<N> dr{};
            for (std::size_t i = 0; i < N; ++i) {
                Real acc = 0.0;
                for (std::size_t j = 0; j < N; ++j) acc += jc[i][j] * r[j] - jd[i][j] * yd_rate[j];
                dr[i] = acc;
            }
            dr[couple_.target()] -= couple_.gain() * r[obs];
            Vec<M> out{};
            for (std::size_t i = 0; i < N; ++i) {
                out[i] = dx[i];
                out[N + i] = dy[i];
                out[2 * N + 1 + i] = dr[i];
            }
            out[2 * N] = dtau;
            return out;
        };

        const Vec<M> zn = rk4_step<M>(rhs, z, gains_.dt);
        State next;
        next.k = state_.k + 1;
        for (std::size_t i = 0; i < N; ++i) {
            next.x[i] = zn[i];
            next.y[i] = zn[N + i];
            next.r[i] = zn[2 * N + 1 + i];
        }
        StepInfo info;
        next.tau_est = tau_bounds_.clamp(zn[2 * N]);
        info.tau_clamped = next.tau_est != zn[2 * N];

        const auto step_no = static_cast<std::uint64_t>(next.k);
        for (std::size_t i = 0; i < N; ++i) {
            if (!within_bound(next.x[i])) throw DivergenceError(step_no, "true delay state diverged");
            if (!within_bound(next.y[i])) throw DivergenceError(step_no, "model delay state diverged");
            if (!within_bound(next.r[i])) throw DivergenceError(step_no, "sensitivity r diverged");
        }
        if (!std::isfinite(zn[2 * N])) throw DivergenceError(step_no, "delay estimate is not finite");

        // Store post-step derivatives, evaluated with delayed states at the new time.
        const Real tn = hx_.time_at(next.k);
        hx_.push({next.x, Vec<N>{}});
        hy_.push({next.y, Vec<N>{}});
        const Vec<N> dx_new = sys_.rhs(next.x, hx_.lookup(tn - gains_.schedule(tn)).state);
        Vec<N> dy_new = sys_.rhs(next.y, hy_.lookup(tn - next.tau_est).state);
        if (gains_.delayed_rate == DelayedRate::coupled)
            couple_.apply(dy_new, observe_(next.x) - observe_(next.y));
        hx_.update_newest({next.x, dx_new});
        hy_.update_newest({next.y, dy_new});

        state_ = next;
        return info;
    }

private:
    S sys_;
    DelayGains gains_;
    Interval tau_bounds_;
    Buffer hx_;
    Buffer hy_;
    Observation observe_;
    Coupling couple_;
    State state_;
};

/// Burns in the uncoupled system from a constant seeded history drawn
/// uniformly in [lo, hi]^n, then relabels the buffer so its newest sample is
/// step 0.
template <DelaySystem S>
HistoryBuffer<S::dim> burn_in_history(const S& sys, std::uint64_t seed, Real tau, Real burn_in,
                                      Real dt, Real span, Real lo = 0.5, Real hi = 1.5) {
    if (!(burn_in >= 0.0)) throw std::invalid_argument("burn_in must be non-negative");
    Rng rng(seed);
    Vec<S::dim> start;
    for (auto& v : start) v = rng.uniform(lo, hi);
    HistoryBuffer<S::dim> history(span, dt);
    history.fill_constant(start, 0);
    integrate_dde(sys, history, TauSchedule::constant(tau),
                  static_cast<std::uint64_t>(std::llround(burn_in / dt)));
    history.rebase(0);
    return history;
}

struct DelayExperiment {
    MackeyGlass system;
    DelayGains gains;
    Interval tau_bounds{1.0, 38.0};
    Real history_span = 40.0;
    Real tau0 = 15.0;
    Real t_end = 1e4;
    Real burn_in = 500.0;
    std::uint64_t seed = 1;

    std::uint64_t steps() const { return static_cast<std::uint64_t>(std::llround(t_end / gains.dt)); }
};

struct DelayRunResult {
    DelayIdState<1> final_state;
    std::uint64_t tau_clamps = 0;
    std::optional<std::string> failure;
};

/// Runs the identifier for `t_end` time units from independent burned-in
/// histories for the true and model systems. `observe(identifier)` sees every
/// step including the initial one.
template <class Observer>
DelayRunResult run_delay_experiment(const DelayExperiment& exp, Observer&& observe) {
    exp.gains.validate();
    Rng master(exp.seed);
    const std::uint64_t seed_true = master.next();
    const std::uint64_t seed_model = master.next();
    const Real tau_burn = exp.gains.schedule.base;
    auto hx = burn_in_history(exp.system, seed_true, tau_burn, exp.burn_in, exp.gains.dt, exp.history_span);
    auto hy = burn_in_history(exp.system, seed_model, tau_burn, exp.burn_in, exp.gains.dt, exp.history_span);

    DelayIdentifier<MackeyGlass> id(exp.system, exp.gains, exp.tau_bounds, std::move(hx), std::move(hy),
                                    exp.tau0);
    DelayRunResult result;
    observe(std::as_const(id));
    try {
        const std::uint64_t steps = exp.steps();
        for (std::uint64_t k = 0; k < steps; ++k) {
            if (id.step().tau_clamped) ++result.tau_clamps;
            observe(std::as_const(id));
        }
    } catch (const DivergenceError& e) {
        result.failure = e.what();
    } catch (const HistoryRangeError& e) {
        result.failure = e.what();
    }
    result.final_state = id.state();
    return result;
}

}  // namespace syncid
