#include <gtest/gtest.h>

#include <sstream>

#include "hsac/combat_env.hpp"
#include "hsac/errors.hpp"
#include "oracles.hpp"

using namespace hsac;

namespace {

UcavState at(double x, double y, double h, double chi, double v = 150.0) {
    UcavState s;
    s.x = x;
    s.y = y;
    s.z = -h;
    s.chi = chi;
    s.v = v;
    return s;
}

CombatOutcome classify_states(const UcavState& own, const UcavState& opp) {
    return classify(own, opp, relative_geometry(own, opp), relative_geometry(opp, own), AircraftParams{},
                    RewardConfig{});
}

ScenarioConfig fixed_scenario(const UcavState& blue, const UcavState& red, int cap = 2000) {
    ScenarioConfig s;
    s.blue = blue;
    s.red_fixed = red;
    s.red_mode = RedInitMode::Fixed;
    s.red_controller = RedController::Policy;
    s.episode_cap = cap;
    return s;
}

}  // namespace

TEST(Classify, FiringPositionWins) {
    // LOS along +X; own heading 30 deg off it, opponent flying away 30 deg off.
    const auto own = at(0, 0, 5000, deg_to_rad(30));
    const auto opp = at(1000, 0, 5000, deg_to_rad(-30));
    const auto g = relative_geometry(own, opp);
    EXPECT_NEAR(rad_to_deg(g.ata), 30.0, 1e-9);
    EXPECT_NEAR(rad_to_deg(g.aa), 30.0, 1e-9);
    EXPECT_EQ(classify_states(own, opp), CombatOutcome::Win);
    EXPECT_EQ(classify_states(opp, own), CombatOutcome::Killed);
}

TEST(Classify, OverspeedOverridesFiringPosition) {
    const auto own = at(0, 0, 5000, deg_to_rad(30), 450.0);
    const auto opp = at(1000, 0, 5000, deg_to_rad(-30));
    EXPECT_EQ(classify_states(own, opp), CombatOutcome::Overloaded);
}

TEST(Classify, OutOfRangeSurvives) {
    EXPECT_EQ(classify_states(at(0, 0, 5000, 0), at(5000, 0, 5000, 0)), CombatOutcome::Survival);
}

TEST(Classify, BoundaryGridMatchesBruteForce) {
    const AircraftParams p;
    const RewardConfig cfg;
    const double angles[] = {-61, -59, 59, 61};
    const double ranges[] = {150, 200, 1000, 3000, 3100};
    const auto nominal = at(0, 0, 5000, 0);
    const auto overspeed = at(0, 0, 5000, 0, 450.0);
    int cases = 0;
    for (double d : ranges)
        for (double own_aa : angles)
            for (double own_ata : angles)
                for (double opp_aa : angles)
                    for (double opp_ata : angles)
                        for (int limits = 0; limits < 4; ++limits) {
                            RelativeGeometry go, gp;
                            go.aa = deg_to_rad(own_aa);
                            go.ata = deg_to_rad(own_ata);
                            gp.aa = deg_to_rad(opp_aa);
                            gp.ata = deg_to_rad(opp_ata);
                            go.d_los = gp.d_los = d;
                            const bool own_lim = limits & 1, opp_lim = limits & 2;
                            const auto got = classify(own_lim ? overspeed : nominal, opp_lim ? overspeed : nominal,
                                                      go, gp, p, cfg);
                            const auto want = oracle::brute_classify({own_ata, own_aa, d, own_lim},
                                                                     {opp_ata, opp_aa, d, opp_lim}, 200, 3000, 60);
                            ASSERT_EQ(got, want) << d << " " << own_aa << " " << own_ata << " " << opp_aa << " "
                                                 << opp_ata << " " << limits;
                            ++cases;
                        }
    EXPECT_GE(cases, 320);
}

TEST(SparseReward, Table) {
    const RewardConfig c;
    using C = CombatOutcome;
    EXPECT_EQ(sparse_reward(C::Win, C::Survival, c), c.r1);
    EXPECT_EQ(sparse_reward(C::Survival, C::Overloaded, c), c.r2);
    EXPECT_EQ(sparse_reward(C::Survival, C::Survival, c), c.r4);
    EXPECT_EQ(sparse_reward(C::Overloaded, C::Survival, c), c.r3);
    EXPECT_EQ(sparse_reward(C::Killed, C::Win, c), c.r3);
    EXPECT_EQ(sparse_reward(C::Win, C::Overloaded, c), c.r1);
}

TEST(ExtraReward, Examples) {
    const RewardConfig c;
    RelativeGeometry g;
    g.d_los = 5000;
    EXPECT_EQ(extra_reward(g, c), 0.0);
    g.d_los = 0.5 * (c.d_max + c.d_min);
    EXPECT_DOUBLE_EQ(extra_reward(g, c), -c.k);
    g.d_los = 5000;
    g.ata_xoy = kPi / 3;
    EXPECT_NEAR(extra_reward(g, c), -1.09662, 1e-5);
}

TEST(ExtraReward, NeverPositive) {
    const AircraftParams p;
    std::mt19937_64 rng(31);
    RewardConfig c;
    for (int i = 0; i < 5000; ++i) {
        const auto a = oracle::random_admissible_state(rng, p);
        auto b = oracle::random_admissible_state(rng, p);
        b.x = a.x + (b.x - a.x) * 0.1;
        b.y = a.y + (b.y - a.y) * 0.1;
        ASSERT_LE(extra_reward(relative_geometry(a, b), c), 0.0);
    }
}

TEST(HomotopyReward, EndpointsAndBlend) {
    EXPECT_EQ(homotopy_reward(2.0, -3.0, 1.0), -1.0);
    EXPECT_EQ(homotopy_reward(2.0, -3.0, 0.0), 2.0);
    EXPECT_DOUBLE_EQ(homotopy_reward(-1.0, -3.0, 0.5), -2.5);
    EXPECT_THROW(homotopy_reward(0, 0, 1.5), DomainError);
    EXPECT_THROW(homotopy_reward(0, 0, -0.1), DomainError);
}

TEST(Reset, AdvantageousFixedStart) {
    const auto s = standard_scenario(InitialSituation::Advantageous);
    CombatEnv env(AircraftParams{}, RewardConfig{}, s);
    Rng rng(1);
    env.reset(rng);
    EXPECT_EQ(env.red().x, 5000.0);
    EXPECT_EQ(env.red().y, 5000.0);
    EXPECT_EQ(env.red().altitude(), 5000.0);
    EXPECT_EQ(env.red().v, 150.0);
    EXPECT_NEAR(env.red().chi, deg_to_rad(45), 1e-15);
    EXPECT_EQ(env.blue().alpha, 0.0);
    EXPECT_EQ(env.blue().eta, 1.0);
}

TEST(Reset, AnnulusDrawsRespectBands) {
    ScenarioConfig s;
    s.red_mode = RedInitMode::RandomAnnulus;
    CombatEnv env(AircraftParams{}, RewardConfig{}, s);
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        env.reset(rng);
        const auto g = relative_geometry(env.blue(), env.red());
        ASSERT_GE(g.d_los, 4000.0 - 1e-9);
        ASSERT_LE(g.d_los, 6000.0 + 1e-9);
        const double dh = env.red().altitude() - env.blue().altitude();
        ASSERT_GE(dh, -1000.0);
        ASSERT_LE(dh, 1000.0);
        ASSERT_GT(env.red().chi, -kPi);
        ASSERT_LE(env.red().chi, kPi);
    }
}

TEST(Reset, SameSeedSameState) {
    ScenarioConfig s;
    CombatEnv e1(AircraftParams{}, RewardConfig{}, s), e2(AircraftParams{}, RewardConfig{}, s);
    Rng r1(99), r2(99);
    e1.reset(r1);
    e2.reset(r2);
    EXPECT_EQ(e1.red(), e2.red());
}

TEST(Reset, InvalidBandsRejected) {
    ScenarioConfig s;
    s.annulus.distance_min = 7000;
    EXPECT_THROW(CombatEnv(AircraftParams{}, RewardConfig{}, s), InvalidScenario);
    ScenarioConfig t;
    t.episode_cap = 0;
    EXPECT_THROW(CombatEnv(AircraftParams{}, RewardConfig{}, t), InvalidScenario);
}

TEST(EnvStep, NeutralStepGivesStepCost) {
    // Line abreast at 1000 m: nobody is in a firing position.
    CombatEnv env(AircraftParams{}, RewardConfig{}, fixed_scenario(at(0, 0, 5000, 0), at(0, 1000, 5000, 0)));
    Rng rng(0);
    env.reset(rng);
    const auto rec = env.step({}, {}, 0.0);
    EXPECT_EQ(rec.blue.outcome, CombatOutcome::Survival);
    EXPECT_EQ(rec.red.outcome, CombatOutcome::Survival);
    EXPECT_EQ(rec.blue.sparse, RewardConfig{}.r4);
    EXPECT_EQ(rec.red.sparse, RewardConfig{}.r4);
    EXPECT_FALSE(rec.done);
}

TEST(EnvStep, CapEndsEpisodeWithSurvival) {
    CombatEnv env(AircraftParams{}, RewardConfig{}, fixed_scenario(at(0, 0, 5000, 0), at(0, 5000, 5000, 0), 3));
    Rng rng(0);
    env.reset(rng);
    StepRecord rec;
    for (int i = 0; i < 3; ++i) rec = env.step({}, {}, 0.5);
    EXPECT_TRUE(rec.done);
    EXPECT_EQ(rec.step, 3);
    EXPECT_EQ(rec.blue.outcome, CombatOutcome::Survival);
    EXPECT_THROW(env.step({}, {}, 0.5), EpisodeFinished);
}

TEST(EnvStep, RedBelowFloorIsOverloaded) {
    CombatEnv env(AircraftParams{}, RewardConfig{}, fixed_scenario(at(0, 0, 5000, 0), at(0, 5000, 1990, 0)));
    Rng rng(0);
    env.reset(rng);
    const auto rec = env.step({}, {}, 0.0);
    EXPECT_EQ(rec.red.outcome, CombatOutcome::Overloaded);
    EXPECT_EQ(rec.blue.sparse, RewardConfig{}.r2);
    EXPECT_EQ(rec.red.sparse, RewardConfig{}.r3);
    EXPECT_TRUE(rec.done);
}

TEST(EnvStep, HorizontalFlightIgnoresRedAction) {
    auto s = fixed_scenario(at(0, 0, 5000, 0), at(0, 5000, 5000, 0));
    s.red_controller = RedController::HorizontalFlight;
    CombatEnv env(AircraftParams{}, RewardConfig{}, s);
    Rng rng(0);
    env.reset(rng);
    const auto rec = env.step({}, {0.05, 0.5}, 0.0);
    EXPECT_EQ(rec.red.action.alpha_dot, 0.0);
    EXPECT_EQ(rec.red.action.mu_dot, 0.0);
}

TEST(EnvStep, SidesAreProcessedSymmetrically) {
    const auto b = at(0, 0, 5000, 0.3), r = at(2000, 900, 5200, -2.0);
    CombatEnv e1(AircraftParams{}, RewardConfig{}, fixed_scenario(b, r));
    CombatEnv e2(AircraftParams{}, RewardConfig{}, fixed_scenario(r, b));
    Rng rng(0);
    e1.reset(rng);
    e2.reset(rng);
    const ControlRates ab{0.02, 0.3}, ar{-0.04, -0.6};
    for (int i = 0; i < 50; ++i) {
        const auto x = e1.step(ab, ar, 0.3);
        const auto y = e2.step(ar, ab, 0.3);
        ASSERT_EQ(x.blue.obs, y.red.obs);
        ASSERT_EQ(x.blue.homotopy, y.red.homotopy);
        ASSERT_EQ(x.red.outcome, y.blue.outcome);
        if (x.done) break;
    }
    EXPECT_EQ(e1.blue(), e2.red());
}

TEST(EnvStep, DiscountedReturnIsAffineInQ) {
    const RewardConfig rc;
    ScenarioConfig s;
    s.red_controller = RedController::Policy;
    s.episode_cap = 300;
    CombatEnv env(AircraftParams{}, rc, s);
    Rng rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    const double gamma = 0.996;
    for (int episode = 0; episode < 10; ++episode) {
        env.reset(rng);
        std::vector<StepRecord> recs;
        while (!env.done()) recs.push_back(env.step({0.1 * u(rng), u(rng)}, {0.1 * u(rng), u(rng)}, 0.0));
        double shaped = 0, sparse = 0, disc = 1;
        for (const auto& r : recs) {
            shaped += disc * (r.blue.sparse + r.blue.extra);
            sparse += disc * r.blue.sparse;
            disc *= gamma;
        }
        for (double q : {0.0, 0.17, 0.5, 0.93, 1.0}) {
            double h = 0;
            disc = 1;
            for (const auto& r : recs) {
                h += disc * homotopy_reward(r.blue.sparse, r.blue.extra, q);
                disc *= gamma;
            }
            EXPECT_TRUE(oracle::close(h, q * shaped + (1 - q) * sparse, 1e-9));
        }
    }
}

TEST(Trajectory, HeaderAndRows) {
    std::ostringstream out;
    TrajectoryWriter w(out);
    CombatEnv env(AircraftParams{}, RewardConfig{}, fixed_scenario(at(0, 0, 5000, 0), at(0, 5000, 5000, 0), 4));
    Rng rng(0);
    env.reset(rng);
    while (!env.done()) w.write(env.step({}, {}, 1.0), env.blue(), env.red(), 0.1);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    std::string expected;
    for (const auto& c : trajectory_columns()) expected += (expected.empty() ? "" : ",") + c;
    EXPECT_EQ(header, expected);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(Scenario, MirroredSwapsSides) {
    const auto s = standard_scenario(InitialSituation::HeadOn);
    const auto m = mirrored(s);
    EXPECT_EQ(m.blue, s.red_fixed);
    EXPECT_EQ(m.red_fixed, s.blue);
    EXPECT_EQ(situation_from_string(to_string(InitialSituation::Neutral)), InitialSituation::Neutral);
    EXPECT_EQ(outcome_from_string(to_string(CombatOutcome::Killed)), CombatOutcome::Killed);
}
