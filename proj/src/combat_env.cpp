#include "hsac/combat_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hsac/errors.hpp"

namespace hsac {

std::string to_string(CombatOutcome outcome) {
    switch (outcome) {
        case CombatOutcome::Survival: return "survival";
        case CombatOutcome::Win: return "win";
        case CombatOutcome::Killed: return "killed";
        case CombatOutcome::Overloaded: return "overloaded";
    }
    return "unknown";
}

CombatOutcome outcome_from_string(const std::string& name) {
    if (name == "survival") return CombatOutcome::Survival;
    if (name == "win") return CombatOutcome::Win;
    if (name == "killed") return CombatOutcome::Killed;
    if (name == "overloaded") return CombatOutcome::Overloaded;
    throw ConfigError("unknown outcome '" + name + "'");
}

void RewardConfig::validate() const {
    if (!(r1 >= r2 && r2 > 0.0 && 0.0 > r4 && r4 > r3))
        throw ConfigError("rewards must satisfy r1 >= r2 > 0 > r4 > r3");
    for (double w : q_weight)
        if (!(w > 0.0)) throw ConfigError("Q diagonal entries must be > 0");
    if (!(k > 0.0)) throw ConfigError("k must be > 0");
    if (!(d_min > 0.0 && d_min < d_max)) throw ConfigError("attack range must satisfy 0 < d_min < d_max");
    if (!(envelope_angle > 0.0 && envelope_angle <= kPi)) throw ConfigError("envelope angle must be in (0, pi]");
}

void ScenarioConfig::validate() const {
    if (episode_cap < 1) throw InvalidScenario("episode cap must be >= 1");
    if (!(d_norm > 0.0)) throw InvalidScenario("d_norm must be > 0");
    if (!(blue.v > 0.0)) throw InvalidScenario("blue speed must be > 0");
    if (red_mode == RedInitMode::Fixed) {
        if (!(red_fixed.v > 0.0)) throw InvalidScenario("red speed must be > 0");
        if (red_fixed.x == blue.x && red_fixed.y == blue.y && red_fixed.z == blue.z)
            throw InvalidScenario("red and blue start at the same point");
        return;
    }
    const auto& a = annulus;
    if (!(a.distance_min > 0.0 && a.distance_min <= a.distance_max))
        throw InvalidScenario("distance band must satisfy 0 < min <= max");
    if (!(a.height_min <= a.height_max)) throw InvalidScenario("height band is empty");
    if (std::max(std::abs(a.height_min), std::abs(a.height_max)) > a.distance_min)
        throw InvalidScenario("relative height band exceeds the minimum distance");
    if (!(a.bearing_min <= a.bearing_max)) throw InvalidScenario("bearing band is empty");
    if (!(a.speed > 0.0)) throw InvalidScenario("red speed must be > 0");
}

std::string to_string(InitialSituation situation) {
    switch (situation) {
        case InitialSituation::Advantageous: return "advantageous";
        case InitialSituation::Disadvantageous: return "disadvantageous";
        case InitialSituation::HeadOn: return "head-on";
        case InitialSituation::Neutral: return "neutral";
    }
    return "unknown";
}

InitialSituation situation_from_string(const std::string& name) {
    if (name == "advantageous") return InitialSituation::Advantageous;
    if (name == "disadvantageous") return InitialSituation::Disadvantageous;
    if (name == "head-on" || name == "headon") return InitialSituation::HeadOn;
    if (name == "neutral") return InitialSituation::Neutral;
    throw ConfigError("unknown initial situation '" + name + "'");
}

ScenarioConfig standard_scenario(InitialSituation situation, int episode_cap) {
    auto level = [](double x, double y, double chi_deg) {
        return UcavState{x, y, -5000.0, 150.0, 0.0, deg_to_rad(chi_deg), 0.0, 0.0, 1.0};
    };
    ScenarioConfig s;
    s.red_mode = RedInitMode::Fixed;
    s.episode_cap = episode_cap;
    switch (situation) {
        case InitialSituation::Advantageous:
            s.blue = level(0, 0, 45);
            s.red_fixed = level(5000, 5000, 45);
            break;
        case InitialSituation::Disadvantageous:
            s.blue = level(0, 0, -45);
            s.red_fixed = level(-5000, 5000, -45);
            break;
        case InitialSituation::HeadOn:
            s.blue = level(0, 0, 45);
            s.red_fixed = level(5000, 5000, -135);
            break;
        case InitialSituation::Neutral:
            s.blue = level(0, 0, 45);
            s.red_fixed = level(5000, -5000, -135);
            break;
    }
    return s;
}

ScenarioConfig mirrored(const ScenarioConfig& scenario) {
    if (scenario.red_mode != RedInitMode::Fixed)
        throw InvalidScenario("only fixed scenarios can be mirrored");
    ScenarioConfig m = scenario;
    std::swap(m.blue, m.red_fixed);
    return m;
}

CombatOutcome classify(const UcavState& own, const UcavState& /*opp*/, const RelativeGeometry& geo_own,
                       const RelativeGeometry& geo_opp, const AircraftParams& params,
                       const RewardConfig& cfg) {
    auto in_envelope = [&cfg](const RelativeGeometry& g) {
        return std::abs(g.aa) < cfg.envelope_angle && std::abs(g.ata) < cfg.envelope_angle &&
               g.d_los >= cfg.d_min && g.d_los <= cfg.d_max;
    };
    if (check_limits(own, params).overloaded) return CombatOutcome::Overloaded;
    if (in_envelope(geo_opp)) return CombatOutcome::Killed;
    if (in_envelope(geo_own)) return CombatOutcome::Win;
    return CombatOutcome::Survival;
}

double sparse_reward(CombatOutcome own, CombatOutcome opp, const RewardConfig& cfg) {
    switch (own) {
        case CombatOutcome::Win: return cfg.r1;
        case CombatOutcome::Overloaded:
        case CombatOutcome::Killed: return cfg.r3;
        case CombatOutcome::Survival: break;
    }
    // Survival against Win/Killed cannot arise from consistent geometry;
    // those pairs fall back to the step cost.
    return opp == CombatOutcome::Overloaded ? cfg.r2 : cfg.r4;
}

double extra_reward(const RelativeGeometry& geo, const RewardConfig& cfg) {
    const std::array<double, 4> phi{geo.ata_xoy, geo.ata_yoz, geo.aa_xoy, geo.aa_yoz};
    double angle_penalty = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) angle_penalty += cfg.q_weight[i] * phi[i] * phi[i];
    if (geo.d_los > cfg.d_max) return -angle_penalty;
    const double range_term = 2.0 * geo.d_los / (cfg.d_max + cfg.d_min) - 1.0;
    return -angle_penalty - cfg.k * (range_term * range_term + 1.0);
}

double homotopy_reward(double r, double r_extra, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("homotopy weight q must lie in [0, 1]");
    return q * (r + r_extra) + (1.0 - q) * r;
}

UcavState sample_annulus(const UcavState& blue, const AnnulusConfig& a, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    const double distance = uniform(a.distance_min, a.distance_max);
    const double dh = uniform(a.height_min, a.height_max);
    const double bearing = blue.chi + uniform(a.bearing_min, a.bearing_max);
    // (-pi, pi]: reflect the closed lower end.
    double heading = uniform(-kPi, kPi);
    if (heading == -kPi) heading = kPi;

    const double horizontal = std::sqrt(std::max(0.0, distance * distance - dh * dh));
    UcavState red;
    red.x = blue.x + horizontal * std::cos(bearing);
    red.y = blue.y + horizontal * std::sin(bearing);
    red.z = blue.z - dh;
    red.v = a.speed;
    red.chi = heading;
    return red;
}

CombatEnv::CombatEnv(AircraftParams params, RewardConfig rewards, ScenarioConfig scenario)
    : params_(params), rewards_(rewards), scenario_(std::move(scenario)) {
    params_.validate();
    rewards_.validate();
    scenario_.validate();
}

std::pair<Observation, Observation> CombatEnv::reset(Rng& rng) {
    const UcavState red = scenario_.red_mode == RedInitMode::Fixed
                              ? scenario_.red_fixed
                              : sample_annulus(scenario_.blue, scenario_.annulus, rng);
    return reset_to(scenario_.blue, red);
}

std::pair<Observation, Observation> CombatEnv::reset_to(const UcavState& blue, const UcavState& red) {
    blue_ = blue;
    red_ = red;
    blue_.alpha = red_.alpha = 0.0;
    blue_.eta = red_.eta = 1.0;
    steps_ = 0;
    done_ = false;
    return observations();
}

std::pair<Observation, Observation> CombatEnv::observations() const {
    const double d_norm = scenario_.d_norm;
    return {observe(blue_, red_, params_, d_norm), observe(red_, blue_, params_, d_norm)};
}

StepRecord CombatEnv::step(const ControlRates& blue_action, const ControlRates& red_action, double q) {
    if (done_) throw EpisodeFinished("step called on a finished episode");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("homotopy weight q must lie in [0, 1]");

    const ControlRates blue_rates = clamp_rates(blue_action, params_);
    const ControlRates red_rates = scenario_.red_controller == RedController::HorizontalFlight
                                       ? ControlRates{}
                                       : clamp_rates(red_action, params_);

    // Both advance from the same snapshot.
    const UcavState blue_next = hsac::step(blue_, blue_rates, params_);
    const UcavState red_next = hsac::step(red_, red_rates, params_);
    blue_ = blue_next;
    red_ = red_next;
    ++steps_;

    const auto geo_blue = relative_geometry_or_fallback(blue_, red_);
    const auto geo_red = relative_geometry_or_fallback(red_, blue_);

    StepRecord rec;
    rec.step = steps_;
    rec.q = q;
    rec.blue.action = blue_rates;
    rec.red.action = red_rates;
    rec.blue.outcome = classify(blue_, red_, geo_blue, geo_red, params_, rewards_);
    rec.red.outcome = classify(red_, blue_, geo_red, geo_blue, params_, rewards_);

    auto fill = [&](SideStep& side, CombatOutcome opp, const RelativeGeometry& geo) {
        side.sparse = sparse_reward(side.outcome, opp, rewards_);
        side.extra = extra_reward(geo, rewards_);
        side.homotopy = homotopy_reward(side.sparse, side.extra, q);
    };
    fill(rec.blue, rec.red.outcome, geo_blue);
    fill(rec.red, rec.blue.outcome, geo_red);

    rec.blue.obs = observe(geo_blue, blue_, red_, params_, scenario_.d_norm);
    rec.red.obs = observe(geo_red, red_, blue_, params_, scenario_.d_norm);

    rec.done = rec.blue.outcome != CombatOutcome::Survival || rec.red.outcome != CombatOutcome::Survival ||
               steps_ >= scenario_.episode_cap;
    done_ = rec.done;
    return rec;
}

namespace {

const char* const kStateFields[] = {"x", "y", "z", "v", "gamma", "chi", "alpha", "mu", "eta"};

void append_number(std::string& line, double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    line += buf;
    line += ',';
}

void append_state(std::string& line, const UcavState& s) {
    for (double v : {s.x, s.y, s.z, s.v, s.gamma, s.chi, s.alpha, s.mu, s.eta}) append_number(line, v);
}

}  // namespace

const std::vector<std::string>& trajectory_columns() {
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> c{"step", "t"};
        for (const char* side : {"blue", "red"})
            for (const char* f : kStateFields) c.push_back(std::string(side) + "_" + f);
        for (const char* side : {"blue", "red"}) {
            c.push_back(std::string(side) + "_alpha_dot");
            c.push_back(std::string(side) + "_mu_dot");
        }
        for (const char* side : {"blue", "red"}) {
            c.push_back(std::string(side) + "_sparse");
            c.push_back(std::string(side) + "_extra");
            c.push_back(std::string(side) + "_homotopy");
            c.push_back(std::string(side) + "_outcome");
        }
        c.push_back("q");
        c.push_back("done");
        return c;
    }();
    return columns;
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
    const auto& cols = trajectory_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
}

void TrajectoryWriter::write(const StepRecord& rec, const UcavState& blue, const UcavState& red, double dt) {
    std::string line = std::to_string(rec.step) + ",";
    append_number(line, rec.step * dt);
    append_state(line, blue);
    append_state(line, red);
    for (const auto* a : {&rec.blue.action, &rec.red.action}) {
        append_number(line, a->alpha_dot);
        append_number(line, a->mu_dot);
    }
    for (const auto* side : {&rec.blue, &rec.red}) {
        append_number(line, side->sparse);
        append_number(line, side->extra);
        append_number(line, side->homotopy);
        line += to_string(side->outcome);
        line += ',';
    }
    append_number(line, rec.q);
    line += rec.done ? "1" : "0";
    out_ << line << '\n';
}

}  // namespace hsac
