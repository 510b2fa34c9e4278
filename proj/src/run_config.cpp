#include <fstream>
#include <set>
#include <sstream>

#include "hsac/errors.hpp"
#include "hsac/training_harness.hpp"

namespace hsac {

using nlohmann::json;

std::string to_string(MethodVariant method) {
    switch (method) {
        case MethodVariant::SacSparse: return "sac_sparse";
        case MethodVariant::SacShaped: return "sac_shaped";
        case MethodVariant::Hsac: return "hsac";
    }
    return "unknown";
}

MethodVariant method_from_string(const std::string& name) {
    if (name == "sac_sparse") return MethodVariant::SacSparse;
    if (name == "sac_shaped") return MethodVariant::SacShaped;
    if (name == "hsac") return MethodVariant::Hsac;
    throw ConfigError("unknown method '" + name + "'");
}

std::string to_string(TaskKind task) {
    return task == TaskKind::AttackHorizontal ? "attack_horizontal" : "self_play";
}

TaskKind task_from_string(const std::string& name) {
    if (name == "attack_horizontal") return TaskKind::AttackHorizontal;
    if (name == "self_play") return TaskKind::SelfPlay;
    throw ConfigError("unknown task '" + name + "'");
}

namespace {

std::string red_mode_name(RedInitMode m) { return m == RedInitMode::Fixed ? "fixed" : "random_annulus"; }
RedInitMode red_mode_from(const std::string& s) {
    if (s == "fixed") return RedInitMode::Fixed;
    if (s == "random_annulus") return RedInitMode::RandomAnnulus;
    throw ConfigError("unknown red_mode '" + s + "'");
}
std::string controller_name(RedController c) { return c == RedController::Policy ? "policy" : "horizontal_flight"; }
RedController controller_from(const std::string& s) {
    if (s == "policy") return RedController::Policy;
    if (s == "horizontal_flight") return RedController::HorizontalFlight;
    throw ConfigError("unknown red_controller '" + s + "'");
}

// Reads known keys of one object and rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        known_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    template <typename F>
    void sub(const char* key, F&& read) {
        known_.insert(key);
        if (j_.contains(key)) read(j_.at(key), where_ + "." + key);
    }

    ~Fields() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : j_.items())
            if (!known_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> known_;
};

json state_json(const UcavState& s) {
    return {{"x", s.x}, {"y", s.y}, {"z", s.z}, {"v", s.v}, {"gamma", s.gamma},
            {"chi", s.chi}, {"alpha", s.alpha}, {"mu", s.mu}, {"eta", s.eta}};
}

void read_state(const json& j, const std::string& where, UcavState& s) {
    Fields f(j, where);
    f.get("x", s.x);
    f.get("y", s.y);
    f.get("z", s.z);
    f.get("v", s.v);
    f.get("gamma", s.gamma);
    f.get("chi", s.chi);
    f.get("alpha", s.alpha);
    f.get("mu", s.mu);
    f.get("eta", s.eta);
}

json aircraft_json(const AircraftParams& p) {
    return {{"m", p.m},           {"g", p.g},           {"t_max", p.t_max},     {"rho", p.rho},
            {"s_w", p.s_w},       {"c_l0", p.c_l0},     {"c_l_alpha", p.c_l_alpha}, {"c_d0", p.c_d0},
            {"bdp", p.bdp},       {"n_max", p.n_max},   {"q_max", p.q_max},     {"h_min", p.h_min},
            {"h_max", p.h_max},   {"v_min", p.v_min},   {"v_max", p.v_max},     {"alpha_min", p.alpha_min},
            {"alpha_max", p.alpha_max}, {"d_alpha", p.d_alpha}, {"d_mu", p.d_mu}, {"dt", p.dt}};
}

void read_aircraft(const json& j, const std::string& where, AircraftParams& p) {
    Fields f(j, where);
    f.get("m", p.m);
    f.get("g", p.g);
    f.get("t_max", p.t_max);
    f.get("rho", p.rho);
    f.get("s_w", p.s_w);
    f.get("c_l0", p.c_l0);
    f.get("c_l_alpha", p.c_l_alpha);
    f.get("c_d0", p.c_d0);
    f.get("bdp", p.bdp);
    f.get("n_max", p.n_max);
    f.get("q_max", p.q_max);
    f.get("h_min", p.h_min);
    f.get("h_max", p.h_max);
    f.get("v_min", p.v_min);
    f.get("v_max", p.v_max);
    f.get("alpha_min", p.alpha_min);
    f.get("alpha_max", p.alpha_max);
    f.get("d_alpha", p.d_alpha);
    f.get("d_mu", p.d_mu);
    f.get("dt", p.dt);
}

json rewards_json(const RewardConfig& r) {
    return {{"r1", r.r1}, {"r2", r.r2}, {"r3", r.r3}, {"r4", r.r4}, {"q_weight", r.q_weight},
            {"k", r.k}, {"d_min", r.d_min}, {"d_max", r.d_max}, {"envelope_angle", r.envelope_angle}};
}

void read_rewards(const json& j, const std::string& where, RewardConfig& r) {
    Fields f(j, where);
    f.get("r1", r.r1);
    f.get("r2", r.r2);
    f.get("r3", r.r3);
    f.get("r4", r.r4);
    f.get("q_weight", r.q_weight);
    f.get("k", r.k);
    f.get("d_min", r.d_min);
    f.get("d_max", r.d_max);
    f.get("envelope_angle", r.envelope_angle);
}

json scenario_json(const ScenarioConfig& s) {
    const auto& a = s.annulus;
    return {{"blue", state_json(s.blue)},
            {"red_mode", red_mode_name(s.red_mode)},
            {"red_fixed", state_json(s.red_fixed)},
            {"annulus",
             {{"distance_min", a.distance_min}, {"distance_max", a.distance_max}, {"height_min", a.height_min},
              {"height_max", a.height_max}, {"bearing_min", a.bearing_min}, {"bearing_max", a.bearing_max},
              {"speed", a.speed}}},
            {"red_controller", controller_name(s.red_controller)},
            {"episode_cap", s.episode_cap},
            {"seed", s.seed},
            {"d_norm", s.d_norm}};
}

void read_scenario(const json& j, const std::string& where, ScenarioConfig& s) {
    Fields f(j, where);
    f.sub("blue", [&](const json& v, const std::string& w) { read_state(v, w, s.blue); });
    std::string mode = red_mode_name(s.red_mode);
    f.get("red_mode", mode);
    s.red_mode = red_mode_from(mode);
    f.sub("red_fixed", [&](const json& v, const std::string& w) { read_state(v, w, s.red_fixed); });
    f.sub("annulus", [&](const json& v, const std::string& w) {
        Fields a(v, w);
        a.get("distance_min", s.annulus.distance_min);
        a.get("distance_max", s.annulus.distance_max);
        a.get("height_min", s.annulus.height_min);
        a.get("height_max", s.annulus.height_max);
        a.get("bearing_min", s.annulus.bearing_min);
        a.get("bearing_max", s.annulus.bearing_max);
        a.get("speed", s.annulus.speed);
    });
    std::string controller = controller_name(s.red_controller);
    f.get("red_controller", controller);
    s.red_controller = controller_from(controller);
    f.get("episode_cap", s.episode_cap);
    f.get("seed", s.seed);
    f.get("d_norm", s.d_norm);
}

json sac_json(const SacConfig& c) {
    return {{"gamma", c.gamma},
            {"tau", c.tau},
            {"batch_size", c.batch_size},
            {"replay_capacity", c.replay_capacity},
            {"entropy_target", c.entropy_target},
            {"lr_q", c.lr_q},
            {"lr_pi", c.lr_pi},
            {"lr_alpha", c.lr_alpha},
            {"initial_alpha", c.initial_alpha},
            {"hidden", c.hidden},
            {"log_std_min", c.log_std_band.min},
            {"log_std_max", c.log_std_band.max},
            {"warmup", c.warmup}};
}

void read_sac(const json& j, const std::string& where, SacConfig& c) {
    Fields f(j, where);
    f.get("gamma", c.gamma);
    f.get("tau", c.tau);
    f.get("batch_size", c.batch_size);
    f.get("replay_capacity", c.replay_capacity);
    f.get("entropy_target", c.entropy_target);
    f.get("lr_q", c.lr_q);
    f.get("lr_pi", c.lr_pi);
    f.get("lr_alpha", c.lr_alpha);
    f.get("initial_alpha", c.initial_alpha);
    f.get("hidden", c.hidden);
    f.get("log_std_min", c.log_std_band.min);
    f.get("log_std_max", c.log_std_band.max);
    f.get("warmup", c.warmup);
}

}  // namespace

ScenarioConfig RunConfig::default_training_scenario() {
    ScenarioConfig s;
    s.red_mode = RedInitMode::RandomAnnulus;
    s.red_controller = RedController::HorizontalFlight;
    s.episode_cap = 500;
    return s;
}

void RunConfig::validate() const {
    aircraft.validate();
    rewards.validate();
    scenario.validate();
    sac.validate();
    if (schedule.big_n < 1) throw ConfigError("schedule.big_n must be >= 1");
    if (schedule.big_m < 2) throw ConfigError("schedule.big_m must be >= 2");
    if (!(schedule.epsilon > 0.0)) throw ConfigError("schedule.epsilon must be > 0");
    if (total_episodes < 0) throw ConfigError("total_episodes must be >= 0");
    if (eval_interval < 0 || eval_episodes < 0) throw ConfigError("evaluation settings must be >= 0");
    if (update_every < 1) throw ConfigError("update_every must be >= 1");
    if (checkpoint_interval < 0 || update_log_interval < 0) throw ConfigError("intervals must be >= 0");
    if (task == TaskKind::SelfPlay && scenario.red_controller != RedController::Policy)
        throw ConfigError("self_play requires scenario.red_controller = policy");
}

json to_json(const RunConfig& c) {
    return {{"method", to_string(c.method)},
            {"task", to_string(c.task)},
            {"aircraft", aircraft_json(c.aircraft)},
            {"rewards", rewards_json(c.rewards)},
            {"scenario", scenario_json(c.scenario)},
            {"sac", sac_json(c.sac)},
            {"schedule",
             {{"big_n", c.schedule.big_n}, {"big_m", c.schedule.big_m}, {"epsilon", c.schedule.epsilon},
              {"force_converged", c.schedule.force_converged}}},
            {"total_episodes", c.total_episodes},
            {"eval_interval", c.eval_interval},
            {"eval_episodes", c.eval_episodes},
            {"update_every", c.update_every},
            {"checkpoint_interval", c.checkpoint_interval},
            {"update_log_interval", c.update_log_interval},
            {"seed", c.seed},
            {"out_dir", c.out_dir}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    {
        Fields f(j, "config");
        std::string method = to_string(c.method);
        f.get("method", method);
        c.method = method_from_string(method);
        std::string task = to_string(c.task);
        f.get("task", task);
        c.task = task_from_string(task);
        if (c.task == TaskKind::SelfPlay) c.scenario.red_controller = RedController::Policy;
        f.sub("aircraft", [&](const json& v, const std::string& w) { read_aircraft(v, w, c.aircraft); });
        f.sub("rewards", [&](const json& v, const std::string& w) { read_rewards(v, w, c.rewards); });
        f.sub("scenario", [&](const json& v, const std::string& w) { read_scenario(v, w, c.scenario); });
        f.sub("sac", [&](const json& v, const std::string& w) { read_sac(v, w, c.sac); });
        f.sub("schedule", [&](const json& v, const std::string& w) {
            Fields s(v, w);
            s.get("big_n", c.schedule.big_n);
            s.get("big_m", c.schedule.big_m);
            s.get("epsilon", c.schedule.epsilon);
            s.get("force_converged", c.schedule.force_converged);
        });
        f.get("total_episodes", c.total_episodes);
        f.get("eval_interval", c.eval_interval);
        f.get("eval_episodes", c.eval_episodes);
        f.get("update_every", c.update_every);
        f.get("checkpoint_interval", c.checkpoint_interval);
        f.get("update_log_interval", c.update_log_interval);
        f.get("seed", c.seed);
        f.get("out_dir", c.out_dir);
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace hsac
