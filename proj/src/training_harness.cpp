#include "hsac/training_harness.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsac/errors.hpp"

namespace hsac {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'H', 'S', 'A', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kCheckpointVersion = 1;
// Offsets the evaluation stream from the training seed; every evaluation
// replays the same initial states.
constexpr std::uint64_t kEvalSeedOffset = 0x5DEECE66DULL;

bool timed_out(const StepRecord& rec) {
    return rec.done && rec.blue.outcome == CombatOutcome::Survival && rec.red.outcome == CombatOutcome::Survival;
}

bool terminal(const StepRecord& rec) {
    return rec.blue.outcome != CombatOutcome::Survival || rec.red.outcome != CombatOutcome::Survival;
}

std::string rng_text(const std::mt19937_64& rng) {
    std::ostringstream s;
    s << rng;
    return s.str();
}

std::mt19937_64 rng_from_text(const std::string& text) {
    std::istringstream s(text);
    std::mt19937_64 rng;
    s >> rng;
    if (!s) throw CheckpointCorrupt("bad generator state");
    return rng;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

double effective_q(MethodVariant method, const HomotopySchedule& schedule) {
    switch (method) {
        case MethodVariant::SacSparse: return 0.0;
        case MethodVariant::SacShaped: return 1.0;
        case MethodVariant::Hsac: return schedule.q;
    }
    return schedule.q;
}

ControlRates action_to_rates(const Action& action, const AircraftParams& params) {
    return {action[0] * params.d_alpha, action[1] * params.d_mu};
}

Action SidePolicy::act(const Observation& obs) const {
    if (actor == nullptr) return {0.0, 0.0};
    return policy_action(*actor, obs, noise, band);
}

EpisodeTrace rollout(CombatEnv& env, const UcavState& blue, const UcavState& red, const SidePolicy& blue_policy,
                     const SidePolicy& red_policy, double q) {
    auto [obs_b, obs_r] = env.reset_to(blue, red);
    const auto& params = env.params();
    EpisodeTrace trace;
    while (!env.done()) {
        const Action a_b = blue_policy.act(obs_b);
        const Action a_r = red_policy.act(obs_r);
        const StepRecord rec = env.step(action_to_rates(a_b, params), action_to_rates(a_r, params), q);
        trace.blue_sparse += rec.blue.sparse;
        trace.red_sparse += rec.red.sparse;
        trace.blue_outcome = rec.blue.outcome;
        trace.red_outcome = rec.red.outcome;
        obs_b = rec.blue.obs;
        obs_r = rec.red.obs;
        trace.steps.push_back(rec);
        trace.blue_states.push_back(env.blue());
        trace.red_states.push_back(env.red());
    }
    return trace;
}

// --- evaluation ------------------------------------------------------------

EpisodeResult episode_result(CombatOutcome own, CombatOutcome opp, bool is_timeout) {
    using C = CombatOutcome;
    if (own == C::Killed && opp == C::Killed) return EpisodeResult::Win;
    if (own == C::Win) return EpisodeResult::Win;
    if (own == C::Killed || own == C::Overloaded) return EpisodeResult::Loss;
    if (opp == C::Overloaded || opp == C::Killed) return EpisodeResult::Win;
    (void)is_timeout;
    return EpisodeResult::Draw;
}

EvalReport make_report(const std::vector<EpisodeResult>& results, const std::vector<int>& steps,
                       const std::vector<double>& sparse_returns, double dt) {
    if (results.size() != steps.size() || results.size() != sparse_returns.size())
        throw DomainError("report inputs differ in length");
    EvalReport r;
    r.episodes = static_cast<int>(results.size());
    if (r.episodes == 0) return r;
    double time = 0.0;
    double ret = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        switch (results[i]) {
            case EpisodeResult::Win: ++r.wins; break;
            case EpisodeResult::Loss: ++r.losses; break;
            case EpisodeResult::Draw: ++r.draws; break;
        }
        time += steps[i] * dt;
        ret += sparse_returns[i];
    }
    const double n = r.episodes;
    r.win_rate = r.wins / n;
    r.loss_rate = r.losses / n;
    r.average_time_cost = time / n;
    r.mean_sparse_return = ret / n;
    return r;
}

json to_json(const EvalReport& r) {
    return {{"episodes", r.episodes},       {"wins", r.wins},
            {"losses", r.losses},           {"draws", r.draws},
            {"win_rate", r.win_rate},       {"loss_rate", r.loss_rate},
            {"average_time_cost", r.average_time_cost}, {"mean_sparse_return", r.mean_sparse_return}};
}

namespace {

DuelReport play_matches(const nn::Mlp& blue_actor, const nn::Mlp* red_actor, const AircraftParams& params,
                        const RewardConfig& rewards, const ScenarioConfig& scenario, int episodes,
                        std::uint64_t seed) {
    CombatEnv env(params, rewards, scenario);
    Rng rng(seed);
    const SidePolicy blue{&blue_actor};
    const SidePolicy red{red_actor};
    std::vector<EpisodeResult> res_b, res_r;
    std::vector<int> steps;
    std::vector<double> ret_b, ret_r;
    for (int e = 0; e < episodes; ++e) {
        env.reset(rng);
        const UcavState b0 = env.blue();
        const UcavState r0 = env.red();
        // Sparse returns do not depend on q.
        const auto trace = rollout(env, b0, r0, blue, red, 0.0);
        const bool timeout = timed_out(trace.steps.back());
        res_b.push_back(episode_result(trace.blue_outcome, trace.red_outcome, timeout));
        res_r.push_back(episode_result(trace.red_outcome, trace.blue_outcome, timeout));
        steps.push_back(static_cast<int>(trace.steps.size()));
        ret_b.push_back(trace.blue_sparse);
        ret_r.push_back(trace.red_sparse);
    }
    return {make_report(res_b, steps, ret_b, params.dt), make_report(res_r, steps, ret_r, params.dt)};
}

}  // namespace

EvalReport evaluate(const nn::Mlp& actor, const AircraftParams& params, const RewardConfig& rewards,
                    const ScenarioConfig& scenario, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw DomainError("evaluation needs at least one episode");
    const nn::Mlp* red = scenario.red_controller == RedController::Policy ? &actor : nullptr;
    return play_matches(actor, red, params, rewards, scenario, episodes, seed).blue;
}

DuelReport duel(const nn::Mlp& blue_actor, const nn::Mlp& red_actor, const AircraftParams& params,
                const RewardConfig& rewards, const ScenarioConfig& scenario, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw DomainError("duel needs at least one episode");
    ScenarioConfig s = scenario;
    s.red_controller = RedController::Policy;
    return play_matches(blue_actor, &red_actor, params, rewards, s, episodes, seed);
}

// --- checkpoints -----------------------------------------------------------

TrainingState make_training_state(const RunConfig& config) {
    config.validate();
    TrainingState st;
    st.config = config;
    st.learner = make_learner(config.sac, config.seed);
    st.schedule.big_n = config.schedule.big_n;
    st.schedule.big_m = config.schedule.big_m;
    st.schedule.epsilon = config.schedule.epsilon;
    std::seed_seq seq{config.seed, std::uint64_t{0x48534143}};
    std::array<std::uint64_t, 3> seeds{};
    seq.generate(seeds.begin(), seeds.end());
    st.env_rng.seed(seeds[0]);
    st.blue_noise.seed(seeds[1]);
    st.red_noise.seed(seeds[2]);
    return st;
}

void write_checkpoint(std::ostream& out, const TrainingState& st) {
    const auto& l = st.learner;
    json meta = {{"config", to_json(st.config)},
                 {"episode", st.episode},
                 {"env_steps", st.env_steps},
                 {"updates", l.updates},
                 {"schedule",
                  {{"q", st.schedule.q},
                   {"n", st.schedule.n},
                   {"buffer", std::vector<double>(st.schedule.buffer.begin(), st.schedule.buffer.end())}}},
                 {"rng",
                  {{"learner", rng_text(l.rng)},
                   {"env", rng_text(st.env_rng)},
                   {"blue_noise", rng_text(st.blue_noise)},
                   {"red_noise", rng_text(st.red_noise)}}}};

    std::ostringstream body(std::ios::binary);
    body.write(kMagic, sizeof kMagic);
    nn::write_u64(body, kCheckpointVersion);
    const std::string text = meta.dump();
    nn::write_u64(body, text.size());
    body.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const nn::Mlp* net : {&l.actor, &l.critic1, &l.critic2, &l.target1, &l.target2}) nn::write_mlp(body, *net);
    nn::write_f64(body, l.log_alpha);
    for (const auto* opt : {&l.actor_opt, &l.critic1_opt, &l.critic2_opt, &l.alpha_opt}) nn::write_optimizer(body, *opt);

    const std::string bytes = body.str();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    nn::write_u64(out, fnv1a(bytes));
    if (!out) throw IoError("checkpoint write failed");
}

TrainingState read_checkpoint(std::istream& in) {
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof kMagic + 24) throw CheckpointCorrupt("checkpoint truncated");
    const std::string payload = bytes.substr(0, bytes.size() - 8);
    std::istringstream tail(bytes.substr(bytes.size() - 8), std::ios::binary);
    if (nn::read_u64(tail) != fnv1a(payload)) throw CheckpointCorrupt("checkpoint checksum mismatch");
    if (std::memcmp(payload.data(), kMagic, sizeof kMagic) != 0) throw CheckpointCorrupt("not a checkpoint file");

    std::istringstream body(payload.substr(sizeof kMagic), std::ios::binary);
    const auto version = nn::read_u64(body);
    if (version != kCheckpointVersion)
        throw CheckpointCorrupt("unsupported checkpoint version " + std::to_string(version));
    const auto meta_len = nn::read_u64(body);
    if (meta_len > payload.size()) throw CheckpointCorrupt("metadata length out of range");
    std::string text(meta_len, '\0');
    body.read(text.data(), static_cast<std::streamsize>(meta_len));
    if (!body) throw CheckpointCorrupt("metadata truncated");

    TrainingState st;
    try {
        const json meta = json::parse(text);
        st.config = run_config_from_json(meta.at("config"));
        st.episode = meta.at("episode").get<int>();
        st.env_steps = meta.at("env_steps").get<std::int64_t>();
        const auto& sched = meta.at("schedule");
        st.schedule.big_n = st.config.schedule.big_n;
        st.schedule.big_m = st.config.schedule.big_m;
        st.schedule.epsilon = st.config.schedule.epsilon;
        st.schedule.q = sched.at("q").get<double>();
        st.schedule.n = sched.at("n").get<int>();
        const auto buf = sched.at("buffer").get<std::vector<double>>();
        st.schedule.buffer.assign(buf.begin(), buf.end());
        st.schedule.validate();

        auto& l = st.learner;
        l.config = st.config.sac;
        l.replay = ReplayBuffer(st.config.sac.replay_capacity);
        l.updates = meta.at("updates").get<std::int64_t>();
        const auto& rng = meta.at("rng");
        l.rng = rng_from_text(rng.at("learner").get<std::string>());
        st.env_rng = rng_from_text(rng.at("env").get<std::string>());
        st.blue_noise = rng_from_text(rng.at("blue_noise").get<std::string>());
        st.red_noise = rng_from_text(rng.at("red_noise").get<std::string>());
    } catch (const json::exception& e) {
        throw CheckpointCorrupt(std::string("bad checkpoint metadata: ") + e.what());
    } catch (const ConfigError& e) {
        throw CheckpointCorrupt(std::string("bad checkpoint config: ") + e.what());
    }

    auto& l = st.learner;
    for (nn::Mlp* net : {&l.actor, &l.critic1, &l.critic2, &l.target1, &l.target2}) *net = nn::read_mlp(body);
    l.log_alpha = nn::read_f64(body);
    for (auto* opt : {&l.actor_opt, &l.critic1_opt, &l.critic2_opt, &l.alpha_opt}) *opt = nn::read_optimizer(body);
    if (body.peek() != std::char_traits<char>::eof()) throw CheckpointCorrupt("trailing bytes in checkpoint");

    const auto& h = l.config.hidden;
    auto expect = [&](const nn::Mlp& net, int in, int out, const char* name) {
        std::vector<int> sizes{in};
        sizes.insert(sizes.end(), h.begin(), h.end());
        sizes.push_back(out);
        if (net.sizes() != sizes) throw CheckpointCorrupt(std::string(name) + " shape does not match config");
    };
    expect(l.actor, kObservationSize, 2 * kActionSize, "actor");
    for (const nn::Mlp* c : {&l.critic1, &l.critic2, &l.target1, &l.target2})
        expect(*c, kObservationSize + kActionSize, 1, "critic");
    return st;
}

void save_checkpoint(const std::filesystem::path& path, const TrainingState& state) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        write_checkpoint(out, state);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    return read_checkpoint(in);
}

// --- training --------------------------------------------------------------

namespace {

struct EpisodeStats {
    double blue_return = 0.0;  // stored (homotopy) reward
    double red_return = 0.0;
    double blue_sparse = 0.0;
    double red_sparse = 0.0;
    double blue_shaped = 0.0;  // sparse + extra
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double grad_norm = 0.0;
    int updates = 0;
};

double mean_or_zero(double sum, int n) { return n > 0 ? sum / n : 0.0; }

void emit(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

}  // namespace

TrainSummary train(TrainingState& st, std::ostream& metrics) {
    const RunConfig& cfg = st.config;
    cfg.validate();
    auto& learner = st.learner;
    auto& schedule = st.schedule;
    const bool self_play = cfg.task == TaskKind::SelfPlay;
    const bool scheduled = cfg.method == MethodVariant::Hsac;
    const std::size_t warmup = cfg.sac.effective_warmup();
    const std::filesystem::path out_dir = cfg.out_dir;

    CombatEnv env(cfg.aircraft, cfg.rewards, cfg.scenario);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    TrainSummary summary;
    auto act = [&](const Observation& obs, nn::Rng& noise) -> Action {
        if (learner.replay.size() < warmup) return {uniform(noise), uniform(noise)};
        return policy_action(learner.actor, obs, &noise, cfg.sac.log_std_band);
    };

    while (st.episode < cfg.total_episodes) {
        auto [obs_b, obs_r] = env.reset(st.env_rng);
        const double q_start = effective_q(cfg.method, schedule);
        EpisodeStats s;
        StepRecord rec;
        while (!env.done()) {
            const double q = effective_q(cfg.method, schedule);
            const Action a_b = act(obs_b, st.blue_noise);
            const Action a_r = self_play ? act(obs_r, st.red_noise) : Action{0.0, 0.0};
            rec = env.step(action_to_rates(a_b, cfg.aircraft), action_to_rates(a_r, cfg.aircraft), q);
            ++st.env_steps;

            const bool end = terminal(rec);
            learner.replay.push({obs_b, a_b, rec.blue.homotopy, rec.blue.obs, end, q});
            if (self_play) learner.replay.push({obs_r, a_r, rec.red.homotopy, rec.red.obs, end, q});
            s.blue_return += rec.blue.homotopy;
            s.red_return += rec.red.homotopy;
            s.blue_sparse += rec.blue.sparse;
            s.red_sparse += rec.red.sparse;
            s.blue_shaped += rec.blue.sparse + rec.blue.extra;
            obs_b = rec.blue.obs;
            obs_r = rec.red.obs;

            const bool ready = learner.replay.size() >= std::max<std::size_t>(warmup, cfg.sac.batch_size);
            if (!ready || st.env_steps % cfg.update_every != 0) continue;

            const UpdateMetrics m = update_from_replay(learner);
            s.critic_loss += m.critic_loss;
            s.actor_loss += m.actor_loss;
            s.grad_norm += m.grad_norm;
            ++s.updates;
            if (cfg.update_log_interval > 0 && learner.updates % cfg.update_log_interval == 0)
                emit(metrics, {{"type", "update"},
                               {"update", learner.updates},
                               {"episode", st.episode},
                               {"critic_loss", m.critic_loss},
                               {"actor_loss", m.actor_loss},
                               {"alpha_loss", m.alpha_loss},
                               {"alpha", m.alpha},
                               {"grad_norm", m.grad_norm},
                               {"q", schedule.q},
                               {"n", schedule.n}});
            if (!scheduled) continue;
            record(schedule, m.grad_norm);
            const bool advanced = cfg.schedule.force_converged
                                      ? schedule.buffer_full() && force_advance(schedule)
                                      : maybe_advance(schedule);
            if (advanced) {
                ++summary.schedule_steps;
                emit(metrics, {{"type", "schedule"},
                               {"update", learner.updates},
                               {"episode", st.episode},
                               {"q", schedule.q},
                               {"n", schedule.n}});
            }
        }
        ++st.episode;

        emit(metrics, {{"type", "episode"},
                       {"episode", st.episode},
                       {"steps", env.step_count()},
                       {"q", effective_q(cfg.method, schedule)},
                       {"q_start", q_start},
                       {"n", schedule.n},
                       {"blue_return", s.blue_return},
                       {"red_return", s.red_return},
                       {"blue_sparse", s.blue_sparse},
                       {"red_sparse", s.red_sparse},
                       {"blue_shaped", s.blue_shaped},
                       {"blue_outcome", to_string(rec.blue.outcome)},
                       {"red_outcome", to_string(rec.red.outcome)},
                       {"updates", learner.updates},
                       {"critic_loss", mean_or_zero(s.critic_loss, s.updates)},
                       {"actor_loss", mean_or_zero(s.actor_loss, s.updates)},
                       {"grad_norm", mean_or_zero(s.grad_norm, s.updates)},
                       {"alpha", learner.alpha()}});

        if (cfg.eval_interval > 0 && cfg.eval_episodes > 0 && st.episode % cfg.eval_interval == 0) {
            const auto report = evaluate(learner.actor, cfg.aircraft, cfg.rewards, cfg.scenario, cfg.eval_episodes,
                                         cfg.seed + kEvalSeedOffset);
            summary.eval_returns.push_back(report.mean_sparse_return);
            json r = to_json(report);
            r["type"] = "eval";
            r["episode"] = st.episode;
            r["q"] = effective_q(cfg.method, schedule);
            emit(metrics, r);
        }
        if (!out_dir.empty() && cfg.checkpoint_interval > 0 && st.episode % cfg.checkpoint_interval == 0)
            save_checkpoint(out_dir / "checkpoint.bin", st);
    }
    metrics.flush();
    summary.episodes = st.episode;
    summary.updates = learner.updates;
    summary.final_q = effective_q(cfg.method, schedule);
    return summary;
}

TrainSummary train_to_directory(const RunConfig& config, const std::optional<std::filesystem::path>& resume) {
    TrainingState st;
    if (resume) {
        st = load_checkpoint(*resume);
        // Budget and destination may be extended on resume; the learning
        // setup stays as recorded.
        st.config.total_episodes = config.total_episodes;
        st.config.out_dir = config.out_dir;
    } else {
        st = make_training_state(config);
    }
    const std::filesystem::path dir = st.config.out_dir;
    if (dir.empty()) throw ConfigError("out_dir must not be empty");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    {
        std::ofstream cfg_out(dir / "config.json", std::ios::trunc);
        if (!cfg_out) throw IoError("cannot write config.json");
        cfg_out << to_json(st.config).dump(2) << '\n';
    }
    const auto mode = resume ? std::ios::app : std::ios::trunc;
    std::ofstream metrics(dir / "metrics.jsonl", std::ios::out | mode);
    if (!metrics) throw IoError("cannot write metrics.jsonl");
    auto summary = train(st, metrics);
    save_checkpoint(dir / "checkpoint.bin", st);
    return summary;
}

// --- export ----------------------------------------------------------------

EpisodeTrace export_trajectory(const nn::Mlp& blue_actor, const nn::Mlp* red_actor, const AircraftParams& params,
                               const RewardConfig& rewards, const ScenarioConfig& scenario, std::uint64_t seed,
                               std::ostream& csv) {
    ScenarioConfig s = scenario;
    if (red_actor != nullptr) s.red_controller = RedController::Policy;
    CombatEnv env(params, rewards, s);
    Rng rng(seed);
    env.reset(rng);
    const UcavState b0 = env.blue();
    const UcavState r0 = env.red();
    const SidePolicy red = s.red_controller == RedController::Policy
                               ? SidePolicy{red_actor != nullptr ? red_actor : &blue_actor}
                               : SidePolicy{};
    auto trace = rollout(env, b0, r0, SidePolicy{&blue_actor}, red, 0.0);

    TrajectoryWriter writer(csv);
    for (std::size_t i = 0; i < trace.steps.size(); ++i)
        writer.write(trace.steps[i], trace.blue_states[i], trace.red_states[i], params.dt);
    if (!csv) throw IoError("trajectory write failed");
    return trace;
}

std::vector<json> read_metrics(std::istream& in) {
    std::vector<json> records;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw IoError("metrics line " + std::to_string(number) + " is not JSON: " + e.what());
        }
    }
    return records;
}

}  // namespace hsac
