#include <gtest/gtest.h>

#include <random>

#include "hsac/errors.hpp"
#include "hsac/flight_dynamics.hpp"
#include "oracles.hpp"

using namespace hsac;

namespace {

AircraftParams coefficient_example_params() {
    AircraftParams p;
    p.c_l0 = 0.2;
    p.c_l_alpha = 3.5;
    p.c_d0 = 0.02;
    p.bdp = 0.05;
    return p;
}

UcavState level(double v) {
    UcavState s;
    s.z = -5000.0;
    s.v = v;
    return s;
}

}  // namespace

TEST(LiftDrag, ZeroAngleGivesBaseCoefficients) {
    const AircraftParams p;
    const auto c = lift_drag_coefficients(0.0, p);
    EXPECT_DOUBLE_EQ(c.c_l, p.c_l0);
    EXPECT_DOUBLE_EQ(c.c_d, p.c_d0 + p.bdp * p.c_l0 * p.c_l0);
}

TEST(LiftDrag, FlatLiftSlopeIgnoresAngle) {
    AircraftParams p;
    p.c_l_alpha = 0.0;
    for (double a : {-0.2, 0.0, 0.13}) EXPECT_DOUBLE_EQ(lift_drag_coefficients(a, p).c_l, p.c_l0);
}

TEST(LiftDrag, HandEvaluatedExample) {
    const auto c = lift_drag_coefficients(0.1, coefficient_example_params());
    EXPECT_NEAR(c.c_l, 0.55, 1e-15);
    EXPECT_NEAR(c.c_d, 0.0351, 5e-5);
    EXPECT_NEAR(c.c_d, 0.02 + 0.05 * 0.55 * 0.55, 1e-15);
}

TEST(AeroForces, ZeroLiftCoefficientGivesZeroLift) {
    const AircraftParams p;
    const double alpha = -p.c_l0 / p.c_l_alpha;
    EXPECT_NEAR(aero_forces(alpha, 100.0, p).lift, 0.0, 1e-9);
}

TEST(AeroForces, DoublingSpeedQuadruplesForces) {
    const AircraftParams p;
    for (double a : {-0.1, 0.0, 0.05, 0.2}) {
        const auto f1 = aero_forces(a, 120.0, p);
        const auto f2 = aero_forces(a, 240.0, p);
        EXPECT_NEAR(f2.lift, 4.0 * f1.lift, 1e-9 * std::abs(f1.lift) + 1e-12);
        EXPECT_NEAR(f2.drag, 4.0 * f1.drag, 1e-9 * f1.drag);
    }
}

TEST(AeroForces, MatchesSingleExpressionEvaluator) {
    const AircraftParams p;
    const double v = 150.0, a = 0.05;
    const double cl = p.c_l0 + p.c_l_alpha * a;
    const double lift = 0.5 * p.rho * v * v * p.s_w * cl;
    const double drag = 0.5 * p.rho * v * v * p.s_w * (p.c_d0 + p.bdp * cl * cl);
    const auto f = aero_forces(a, v, p);
    EXPECT_TRUE(oracle::close(f.lift, lift, 1e-12));
    EXPECT_TRUE(oracle::close(f.drag, drag, 1e-12));
}

TEST(LoadAndPressure, UnitLoadWhenLiftEqualsWeight) {
    AircraftParams p;
    const double v = 150.0;
    p.s_w = p.m * p.g / (0.5 * p.rho * v * v * p.c_l0);
    EXPECT_NEAR(load_and_pressure(0.0, v, p).n, 1.0, 1e-12);
}

TEST(LoadAndPressure, DynamicPressureByHand) {
    EXPECT_DOUBLE_EQ(load_and_pressure(0.0, 100.0, AircraftParams{}).q_bar, 6125.0);
}

TEST(LoadAndPressure, LoadIsLinearInWingArea) {
    AircraftParams p;
    const double n1 = load_and_pressure(0.03, 170.0, p).n;
    p.s_w *= 3.0;
    EXPECT_NEAR(load_and_pressure(0.03, 170.0, p).n, 3.0 * n1, 1e-12 * n1);
}

TEST(StateDerivative, LevelAxisAlignedFlight) {
    UcavState s = level(100.0);
    const auto d = state_derivative(s, AircraftParams{});
    EXPECT_DOUBLE_EQ(d.dx, 100.0);
    EXPECT_DOUBLE_EQ(d.dy, 0.0);
    EXPECT_DOUBLE_EQ(d.dz, 0.0);
}

TEST(StateDerivative, VerticalClimb) {
    UcavState s = level(100.0);
    s.gamma = kPi / 2;
    s.mu = 0.0;
    const auto d = state_derivative(s, AircraftParams{});
    EXPECT_DOUBLE_EQ(d.dz, -100.0);
    EXPECT_NEAR(d.dx, 0.0, 1e-12);
    EXPECT_NEAR(d.dy, 0.0, 1e-12);
}

TEST(StateDerivative, GenericStateMatchesOracle) {
    const AircraftParams p;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const UcavState s = oracle::random_admissible_state(rng, p);
        const auto d = state_derivative(s, p);
        const auto o = oracle::derivative(s.v, s.gamma, s.chi, s.alpha, s.mu, p);
        EXPECT_TRUE(oracle::close(d.dv, o.dv, 1e-12));
        EXPECT_TRUE(oracle::close(d.dgamma, o.dgamma, 1e-12));
        EXPECT_TRUE(oracle::close(d.dchi, o.dchi, 1e-12));
    }
}

TEST(Step, ZeroActionLevelFlightAdvancesFifteenMetres) {
    const UcavState s = level(150.0);
    const UcavState n = step(s, {}, AircraftParams{});
    EXPECT_DOUBLE_EQ(n.x - s.x, 15.0);
    EXPECT_DOUBLE_EQ(n.y, s.y);
    EXPECT_DOUBLE_EQ(n.z, s.z);
}

TEST(Step, OversizedAlphaRateIsClamped) {
    const AircraftParams p;
    const UcavState s = level(150.0);
    const UcavState n = step(s, {2.0 * p.d_alpha, 0.0}, p);
    EXPECT_DOUBLE_EQ(n.alpha, s.alpha + p.d_alpha * p.dt);
}

TEST(Step, AdversarialActionsRespectBounds) {
    const AircraftParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    UcavState s = level(150.0);
    for (int i = 0; i < 10000; ++i) {
        const UcavState n = step(s, {u(rng), u(rng)}, p);
        ASSERT_GE(n.alpha, p.alpha_min);
        ASSERT_LE(n.alpha, p.alpha_max);
        ASSERT_GE(n.mu, -kPi);
        ASSERT_LE(n.mu, kPi);
        ASSERT_LE(std::abs(n.alpha - s.alpha), p.d_alpha * p.dt + 1e-15);
        const double dmu = std::abs(wrap_angle(n.mu - s.mu));
        ASSERT_LE(dmu, p.d_mu * p.dt + 1e-12);
        // Keep the kinematic state admissible so the stream can run long.
        s = n;
        s.v = 150.0;
        s.gamma = 0.0;
        s.z = -5000.0;
    }
}

TEST(Step, MatchesOracleStep) {
    const AircraftParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const UcavState s = oracle::random_admissible_state(rng, p);
        const double ar = 2.0 * p.d_alpha * u(rng), mr = 2.0 * p.d_mu * u(rng);
        const UcavState n = step(s, {ar, mr}, p);
        const UcavState o = oracle::euler_step(s, ar, mr, p);
        EXPECT_TRUE(oracle::close(n.x, o.x, 1e-12));
        EXPECT_TRUE(oracle::close(n.v, o.v, 1e-12));
        EXPECT_TRUE(oracle::close(n.gamma, o.gamma, 1e-12));
        EXPECT_NEAR(oracle::wrap(n.chi - o.chi), 0.0, 1e-12);
    }
}

TEST(Step, BalancedForcesAdvanceLinearly) {
    // Lift equals weight and thrust equals drag at alpha = 0.
    AircraftParams p;
    const double v = 150.0;
    const double qs = 0.5 * p.rho * v * v * p.s_w;
    p.c_l0 = p.m * p.g / qs;
    p.t_max = qs * (p.c_d0 + p.bdp * p.c_l0 * p.c_l0);
    UcavState s = level(v);
    const UcavState s0 = s;
    for (int i = 0; i < 100; ++i) s = step(s, {}, p);
    EXPECT_NEAR(s.v, v, 1e-9);
    EXPECT_NEAR(s.x - s0.x, 100 * v * p.dt, 1e-8);
    EXPECT_NEAR(s.z, s0.z, 1e-8);
}

TEST(Step, AltitudeRisesIffClimbing) {
    const AircraftParams p;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        UcavState s = oracle::random_admissible_state(rng, p);
        if (std::abs(s.gamma) < 1e-6) continue;
        const UcavState n = step(s, {}, p);
        EXPECT_EQ(n.altitude() > s.altitude(), s.gamma > 0);
    }
}

TEST(Step, IsDeterministic) {
    const AircraftParams p;
    std::mt19937_64 rng(9);
    const UcavState s = oracle::random_admissible_state(rng, p);
    EXPECT_EQ(step(s, {0.01, -0.3}, p), step(s, {0.01, -0.3}, p));
}

TEST(Step, HalvingTimeStepHalvesTruncationError) {
    AircraftParams p;
    UcavState s = level(180.0);
    s.alpha = 0.05;
    s.mu = 0.6;
    s.gamma = 0.1;
    auto run = [&](double dt, int steps) {
        AircraftParams q = p;
        q.dt = dt;
        UcavState x = s;
        for (int i = 0; i < steps; ++i) x = step(x, {}, q);
        return x;
    };
    const double h = 0.1;
    const UcavState ref = run(h / 64, 64);
    auto err = [&](const UcavState& x) {
        return std::hypot(x.x - ref.x, x.y - ref.y, x.z - ref.z);
    };
    const double e1 = err(run(h, 1));
    const double e2 = err(run(h / 2, 2));
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 1.8);
    EXPECT_LE(ratio, 2.2);
}

TEST(Limits, OverspeedReportsSpeed) {
    UcavState s = level(450.0);
    const auto st = check_limits(s, AircraftParams{});
    EXPECT_TRUE(st.overloaded);
    EXPECT_TRUE(st.has(LimitViolation::Speed));
}

TEST(Limits, NominalPointIsClear) {
    UcavState s = level(150.0);
    s.alpha = 0.01;
    const auto st = check_limits(s, AircraftParams{});
    EXPECT_FALSE(st.overloaded);
    EXPECT_TRUE(st.reasons.empty());
}

TEST(Limits, LoadJustAboveMaximum) {
    AircraftParams p;
    UcavState s = level(150.0);
    s.alpha = 0.0;
    // Scale wing area so the load factor sits just above n_max.
    const double n0 = load_and_pressure(0.0, s.v, p).n;
    p.s_w *= (p.n_max * (1.0 + 1e-9)) / n0;
    const auto st = check_limits(s, p);
    EXPECT_TRUE(st.overloaded);
    EXPECT_TRUE(st.has(LimitViolation::LoadFactor));
    EXPECT_EQ(to_string(LimitViolation::LoadFactor), "load factor");
}

TEST(Limits, AltitudeBand) {
    UcavState s = level(150.0);
    s.z = -1999.0;
    EXPECT_TRUE(check_limits(s, AircraftParams{}).has(LimitViolation::Altitude));
    s.z = -8001.0;
    EXPECT_TRUE(check_limits(s, AircraftParams{}).has(LimitViolation::Altitude));
}

TEST(Params, DefaultsTrimLevelAtResetSpeed) {
    const AircraftParams p;
    EXPECT_NEAR(load_and_pressure(0.0, 150.0, p).n, 1.0, 1e-3);
    EXPECT_NEAR(aero_forces(0.0, 150.0, p).drag / p.t_max, 1.0, 1e-3);
}

TEST(Params, ValidateRejectsEmptyBands) {
    AircraftParams p;
    p.h_min = p.h_max;
    EXPECT_THROW(p.validate(), ConfigError);
    AircraftParams q;
    q.n_max = 1.0;
    EXPECT_THROW(q.validate(), ConfigError);
}

TEST(WrapAngle, RangeIsHalfOpen) {
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
    EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
}
