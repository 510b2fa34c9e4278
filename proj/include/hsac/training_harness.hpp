// Training, evaluation, dueling and export on top of the engagement
// environment and the soft actor-critic learner.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsac/combat_env.hpp"
#include "hsac/homotopy_scheduler.hpp"
#include "hsac/sac.hpp"

namespace hsac {

enum class MethodVariant { SacSparse, SacShaped, Hsac };
enum class TaskKind { AttackHorizontal, SelfPlay };

std::string to_string(MethodVariant method);
MethodVariant method_from_string(const std::string& name);
std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

struct ScheduleConfig {
    int big_n = 100;
    std::size_t big_m = 2000;
    double epsilon = 1e-5;
    /// Treat every slope test as converged (scripted schedules).
    bool force_converged = false;
};

struct RunConfig {
    MethodVariant method = MethodVariant::Hsac;
    TaskKind task = TaskKind::AttackHorizontal;
    AircraftParams aircraft{};
    RewardConfig rewards{};
    ScenarioConfig scenario = default_training_scenario();
    SacConfig sac{};
    ScheduleConfig schedule{};
    int total_episodes = 2000;
    int eval_interval = 10;
    int eval_episodes = 10;
    /// Environment steps between gradient updates.
    int update_every = 1;
    int checkpoint_interval = 100;
    /// Updates between per-update metrics records; 0 disables them.
    int update_log_interval = 100;
    std::uint64_t seed = 0;
    std::string out_dir = "run";

    /// Throws ConfigError.
    void validate() const;

    static ScenarioConfig default_training_scenario();
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// q actually used for rewards given the variant.
double effective_q(MethodVariant method, const HomotopySchedule& schedule);

// --- policies and rollouts -------------------------------------------------

/// Maps a squashed action in (-1, 1)^2 to control rates.
ControlRates action_to_rates(const Action& action, const AircraftParams& params);

/// Per-side action source: a deterministic or sampling actor, or level
/// flight when `actor` is null.
struct SidePolicy {
    const nn::Mlp* actor = nullptr;
    nn::Rng* noise = nullptr;  // null means deterministic
    nn::LogStdBand band{};

    Action act(const Observation& obs) const;
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    std::vector<UcavState> blue_states;  // post-step
    std::vector<UcavState> red_states;
    double blue_sparse = 0.0;
    double red_sparse = 0.0;
    CombatOutcome blue_outcome = CombatOutcome::Survival;
    CombatOutcome red_outcome = CombatOutcome::Survival;
};

/// Plays one episode from explicit initial states.
EpisodeTrace rollout(CombatEnv& env, const UcavState& blue, const UcavState& red, const SidePolicy& blue_policy,
                     const SidePolicy& red_policy, double q);

// --- evaluation ------------------------------------------------------------

enum class EpisodeResult { Win, Loss, Draw };

/// Result from `own`'s side: a win includes an opponent overload while own
/// survives and a mutual kill; a timeout is a draw.
EpisodeResult episode_result(CombatOutcome own, CombatOutcome opp, bool timed_out);

struct EvalReport {
    int episodes = 0;
    int wins = 0;
    int losses = 0;
    int draws = 0;
    double win_rate = 0.0;
    double loss_rate = 0.0;
    double average_time_cost = 0.0;  // s, over all episodes
    double mean_sparse_return = 0.0;

    bool operator==(const EvalReport&) const = default;
};

/// Aggregates per-episode results. Throws DomainError on length mismatch.
EvalReport make_report(const std::vector<EpisodeResult>& results, const std::vector<int>& steps,
                       const std::vector<double>& sparse_returns, double dt);

nlohmann::json to_json(const EvalReport& report);

/// Deterministic rollouts of `actor` as blue. Red follows the scenario's
/// controller; a Policy red is flown by the same actor.
EvalReport evaluate(const nn::Mlp& actor, const AircraftParams& params, const RewardConfig& rewards,
                    const ScenarioConfig& scenario, int episodes, std::uint64_t seed);

struct DuelReport {
    EvalReport blue;
    EvalReport red;
};

/// Each side flown by its own deterministic actor. Throws DomainError when
/// episodes < 1.
DuelReport duel(const nn::Mlp& blue_actor, const nn::Mlp& red_actor, const AircraftParams& params,
                const RewardConfig& rewards, const ScenarioConfig& scenario, int episodes, std::uint64_t seed);

// --- checkpoints -----------------------------------------------------------

struct TrainingState {
    RunConfig config;
    LearnerState learner;
    HomotopySchedule schedule;
    int episode = 0;  // episodes completed
    std::int64_t env_steps = 0;
    Rng env_rng;
    nn::Rng blue_noise;
    nn::Rng red_noise;
};

TrainingState make_training_state(const RunConfig& config);

/// Binary checkpoint: magic, version, JSON metadata, networks, optimizers,
/// checksum. Replay contents are not stored.
void write_checkpoint(std::ostream& out, const TrainingState& state);
TrainingState read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const TrainingState& state);
/// Throws IoError or CheckpointCorrupt.
TrainingState load_checkpoint(const std::filesystem::path& path);

// --- training --------------------------------------------------------------

struct TrainSummary {
    int episodes = 0;
    std::int64_t updates = 0;
    double final_q = 1.0;
    int schedule_steps = 0;
    std::vector<double> eval_returns;  // per evaluation, in order
};

/// Runs the training loop to config.total_episodes, writing JSONL metrics to
/// `metrics` and checkpoints under config.out_dir when it is non-empty.
TrainSummary train(TrainingState& state, std::ostream& metrics);

/// Creates out_dir, resumes from `resume` if given, writes metrics.jsonl and
/// checkpoint.bin.
TrainSummary train_to_directory(const RunConfig& config, const std::optional<std::filesystem::path>& resume);

// --- export ----------------------------------------------------------------

/// Single deterministic rollout written as trajectory CSV; returns the trace.
EpisodeTrace export_trajectory(const nn::Mlp& blue_actor, const nn::Mlp* red_actor, const AircraftParams& params,
                               const RewardConfig& rewards, const ScenarioConfig& scenario, std::uint64_t seed,
                               std::ostream& csv);

/// Oblique 3D projection of both tracks (x, y, altitude).
std::string trajectory_svg(const EpisodeTrace& trace);

/// Episode sparse returns, their moving average, q and evaluation returns.
std::string metrics_svg(const std::vector<nlohmann::json>& records);

std::vector<nlohmann::json> read_metrics(std::istream& in);

}  // namespace hsac
