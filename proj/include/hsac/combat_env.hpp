// One-versus-one engagement environment.
//
// Both aircraft advance simultaneously from the same pre-step snapshot. After
// each step every side is classified (overloaded > killed > win > survival),
// receives the sparse outcome reward, the dense shaping penalty and the
// homotopy blend of the two.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsac/combat_geometry.hpp"
#include "hsac/flight_dynamics.hpp"

namespace hsac {

using Rng = std::mt19937_64;

enum class CombatOutcome { Survival, Win, Killed, Overloaded };

std::string to_string(CombatOutcome outcome);
CombatOutcome outcome_from_string(const std::string& name);

struct RewardConfig {
    double r1 = 10.0;    // own win
    double r2 = 5.0;     // opponent overloaded while own survives
    double r3 = -10.0;   // own overloaded or killed
    double r4 = -0.01;   // per-step cost
    std::array<double, 4> q_weight{1.0, 1.0, 1.0, 1.0};  // diagonal of Q
    double k = 1.0;
    double d_min = 200.0;
    double d_max = 3000.0;
    double envelope_angle = deg_to_rad(60.0);

    /// Requires r1 >= r2 > 0 > r4 > r3, Q > 0, k > 0, 0 < d_min < d_max.
    void validate() const;
};

enum class RedInitMode { Fixed, RandomAnnulus };
enum class RedController { Policy, HorizontalFlight };

struct AnnulusConfig {
    double distance_min = 4000.0;  // 3D range, m
    double distance_max = 6000.0;
    double height_min = -1000.0;   // red altitude minus blue altitude, m
    double height_max = 1000.0;
    /// Bearing of red relative to blue's initial heading, rad.
    double bearing_min = -kPi;
    double bearing_max = kPi;
    double speed = 150.0;
};

struct ScenarioConfig {
    UcavState blue{0.0, 0.0, -5000.0, 150.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    RedInitMode red_mode = RedInitMode::RandomAnnulus;
    UcavState red_fixed{5000.0, 5000.0, -5000.0, 150.0, 0.0, deg_to_rad(45.0), 0.0, 0.0, 1.0};
    AnnulusConfig annulus{};
    RedController red_controller = RedController::HorizontalFlight;
    int episode_cap = 2000;
    std::uint64_t seed = 0;
    double d_norm = kDefaultDistanceNorm;

    /// Throws InvalidScenario on inconsistent bands.
    void validate() const;
};

/// Initial situations used to evaluate attack policies (blue's view).
enum class InitialSituation { Advantageous, Disadvantageous, HeadOn, Neutral };

std::string to_string(InitialSituation situation);
InitialSituation situation_from_string(const std::string& name);

/// Fixed-mode scenario for one of the four standard initial situations.
/// Both aircraft at 5000 m, 150 m/s, level, wings level.
ScenarioConfig standard_scenario(InitialSituation situation, int episode_cap = 2000);

/// Blue/red swapped copy of a fixed scenario.
ScenarioConfig mirrored(const ScenarioConfig& scenario);

struct SideStep {
    Observation obs{};  // post-step observation
    ControlRates action{};  // applied (clamped) rates
    double sparse = 0.0;
    double extra = 0.0;
    double homotopy = 0.0;
    CombatOutcome outcome = CombatOutcome::Survival;
};

struct StepRecord {
    SideStep blue;
    SideStep red;
    int step = 0;  // 1-based index of the step just taken
    bool done = false;
    double q = 0.0;
};

CombatOutcome classify(const UcavState& own, const UcavState& opp, const RelativeGeometry& geo_own,
                       const RelativeGeometry& geo_opp, const AircraftParams& params,
                       const RewardConfig& cfg);

double sparse_reward(CombatOutcome own, CombatOutcome opp, const RewardConfig& cfg);

/// Dense angle-and-range penalty, never positive.
double extra_reward(const RelativeGeometry& geo, const RewardConfig& cfg);

/// q * (r + r_extra) + (1 - q) * r. Throws DomainError unless q in [0, 1].
double homotopy_reward(double r, double r_extra, double q);

class CombatEnv {
public:
    CombatEnv(AircraftParams params, RewardConfig rewards, ScenarioConfig scenario);

    /// Places both aircraft and returns (blue obs, red obs).
    std::pair<Observation, Observation> reset(Rng& rng);

    /// Resets to explicit initial states (alpha, eta normalized).
    std::pair<Observation, Observation> reset_to(const UcavState& blue, const UcavState& red);

    /// Throws EpisodeFinished once done.
    StepRecord step(const ControlRates& blue_action, const ControlRates& red_action, double q);

    const UcavState& blue() const { return blue_; }
    const UcavState& red() const { return red_; }
    bool done() const { return done_; }
    int step_count() const { return steps_; }

    const AircraftParams& params() const { return params_; }
    const RewardConfig& rewards() const { return rewards_; }
    const ScenarioConfig& scenario() const { return scenario_; }

private:
    std::pair<Observation, Observation> observations() const;

    AircraftParams params_;
    RewardConfig rewards_;
    ScenarioConfig scenario_;
    UcavState blue_{};
    UcavState red_{};
    int steps_ = 0;
    bool done_ = true;
};

/// Samples red's initial state for the annulus mode.
UcavState sample_annulus(const UcavState& blue, const AnnulusConfig& annulus, Rng& rng);

/// CSV trajectory writer. Columns are listed by `trajectory_columns()`.
class TrajectoryWriter {
public:
    explicit TrajectoryWriter(std::ostream& out);
    void write(const StepRecord& record, const UcavState& blue, const UcavState& red, double dt);

private:
    std::ostream& out_;
};

const std::vector<std::string>& trajectory_columns();

}  // namespace hsac
