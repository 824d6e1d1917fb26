#include <gtest/gtest.h>

#include <cmath>

#include "support/properties.hpp"
#include "syncid/delay.hpp"

using namespace syncid;

TEST(MackeyGlass, Rhs) {
    const MackeyGlass mg;
    EXPECT_DOUBLE_EQ(mg.rhs({1.0}, {1.0})[0], 0.0);
    EXPECT_EQ(mg.rhs({0.0}, {0.0})[0], 0.0);
    EXPECT_NEAR(mg.rhs({0.5}, {1.0})[0], 0.05, 1e-15);
}

TEST(MackeyGlass, DelayedJacobian) {
    const MackeyGlass mg;
    EXPECT_DOUBLE_EQ(mg.d_rhs_delayed({0.3}, {0.0})[0][0], 0.2);
    EXPECT_DOUBLE_EQ(mg.d_rhs_delayed({0.3}, {1.0})[0][0], -0.4);
    EXPECT_EQ(mg.d_rhs_current({0.3}, {1.0})[0][0], -0.1);
    const Real h = 1e-6, yd = 0.7;
    auto f = [](Real v) { return 0.2 * v / (1.0 + std::pow(v, 10)); };
    const Real fd = (f(yd + h) - f(yd - h)) / (2.0 * h);
    EXPECT_NEAR(mg.d_rhs_delayed({0.0}, {yd})[0][0] / fd, 1.0, 1e-6);
}

TEST(MackeyGlass, JacobianFiniteDifference) {
    const auto c = props::jacobian_finite_difference();
    EXPECT_TRUE(c.ok) << c.detail;
}

TEST(TauSchedule, Phases) {
    TauSchedule s;
    EXPECT_EQ(s(5000.0), 23.0);
    s.varying = true;
    EXPECT_EQ(s(1e4), 23.0);
    EXPECT_NEAR(s(1e4 + 2500.0), 23.0 + 3.0 * std::sin(2.0 * std::numbers::pi * 1e-4 * 12500.0), 1e-12);
    EXPECT_EQ(s.max_value(), 26.0);
    EXPECT_EQ(s.min_value(), 20.0);
}

TEST(Gains, Validation) {
    DelayGains g;
    EXPECT_NO_THROW(g.validate());
    g.beta_gain = -1.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = DelayGains{};
    g.dt = 0.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

namespace {

DelayIdentifier<MackeyGlass> make_identifier(Real tau0, DelayGains g, std::uint64_t sx = 1, std::uint64_t sy = 2) {
    const MackeyGlass mg;
    auto hx = burn_in_history(mg, sx, 23.0, 100.0, g.dt, 40.0);
    auto hy = burn_in_history(mg, sy, 23.0, 100.0, g.dt, 40.0);
    return DelayIdentifier<MackeyGlass>(mg, g, {1.0, 38.0}, std::move(hx), std::move(hy), tau0);
}

}  // namespace

TEST(Identifier, ConstantUnitHistoryStaysPut) {
    const MackeyGlass mg;
    DelayGains g;
    HistoryBuffer<1> h(40.0, g.dt);
    h.fill_constant({1.0}, 0);
    DelayIdentifier<MackeyGlass> id(mg, g, {1.0, 38.0}, h, h, 15.0);
    for (int k = 0; k < 200; ++k) id.step();
    EXPECT_EQ(id.state().x[0], 1.0);
    EXPECT_EQ(id.state().y[0], 1.0);
    EXPECT_EQ(id.state().r[0], 0.0);
    EXPECT_EQ(id.state().tau_est, 15.0);
}

TEST(Identifier, ZeroGainFreezesDelay) {
    DelayGains g;
    g.beta_gain = 0.0;
    auto id = make_identifier(15.0, g);
    for (int k = 0; k < 2000; ++k) id.step();
    EXPECT_EQ(id.state().tau_est, 15.0);
    EXPECT_NE(id.observed_sensitivity(), 0.0);
}

TEST(Identifier, TimeAndHistoryAdvance) {
    auto id = make_identifier(15.0, DelayGains{});
    EXPECT_EQ(id.time(), 0.0);
    for (int k = 0; k < 10; ++k) id.step();
    EXPECT_NEAR(id.time(), 0.5, 1e-12);
    EXPECT_EQ(id.true_history().newest_index(), 10);
    EXPECT_EQ(id.model_history().newest_index(), 10);
    EXPECT_EQ(id.true_history().at(10).state, id.state().x);
    const MackeyGlass mg;
    const Real t = id.time();
    const Real expected = mg.rhs(id.state().x, id.true_history().lookup(t - 23.0).state)[0];
    EXPECT_DOUBLE_EQ(id.true_history().at(10).derivative[0], expected);
}

TEST(Identifier, RejectsInconsistentSetup) {
    const MackeyGlass mg;
    DelayGains g;
    HistoryBuffer<1> h(40.0, g.dt);
    h.fill_constant({1.0}, 0);
    HistoryBuffer<1> shifted(40.0, g.dt);
    shifted.fill_constant({1.0}, 5);
    EXPECT_THROW(DelayIdentifier<MackeyGlass>(mg, g, {1.0, 38.0}, h, shifted, 15.0), std::invalid_argument);
    HistoryBuffer<1> short_h(10.0, g.dt);
    short_h.fill_constant({1.0}, 0);
    EXPECT_THROW(DelayIdentifier<MackeyGlass>(mg, g, {1.0, 38.0}, short_h, short_h, 15.0), std::invalid_argument);
}

TEST(Identifier, ClampsDelayEstimate) {
    DelayGains g;
    g.beta_gain = 1e4;
    auto id = make_identifier(1.2, g);
    bool clamped = false;
    for (int k = 0; k < 4000; ++k) clamped = id.step().tau_clamped || clamped;
    EXPECT_TRUE(clamped);
    EXPECT_GE(id.state().tau_est, 1.0);
    EXPECT_LE(id.state().tau_est, 38.0);
}

TEST(BurnIn, DeterministicAndRebased) {
    const MackeyGlass mg;
    const auto a = burn_in_history(mg, 7, 23.0, 100.0, 0.05, 40.0);
    const auto b = burn_in_history(mg, 7, 23.0, 100.0, 0.05, 40.0);
    const auto c = burn_in_history(mg, 8, 23.0, 100.0, 0.05, 40.0);
    EXPECT_EQ(a.newest_index(), 0);
    EXPECT_EQ(a.at(0).state, b.at(0).state);
    EXPECT_NE(a.at(0).state, c.at(0).state);
}

TEST(Experiment, ShortRunReportsEveryStep) {
    DelayExperiment e;
    e.t_end = 10.0;
    e.burn_in = 50.0;
    int count = 0;
    const auto r = run_delay_experiment(e, [&](const DelayIdentifier<MackeyGlass>&) { ++count; });
    EXPECT_EQ(count, 201);
    EXPECT_FALSE(r.failure);
    EXPECT_EQ(r.final_state.k, 200);
}

TEST(Properties, Equilibria) {
    const auto c = props::equilibria();
    EXPECT_TRUE(c.ok) << c.detail;
}

TEST(Properties, SynchronizedManifoldIsInvariant) {
    const auto c = props::delay_sync_invariance();
    EXPECT_TRUE(c.ok) << c.detail;
}

TEST(Properties, DelayStationaryWhenSynchronized) {
    const auto c = props::delay_tau_stationarity();
    EXPECT_TRUE(c.ok) << c.detail;
}

TEST(Properties, SensitivityDirection) {
    const auto c = props::delay_sensitivity_direction();
    EXPECT_TRUE(c.ok) << c.detail;
}
