// Soft actor-critic: twin soft Q critics with Polyak-averaged targets, a
// squashed-Gaussian actor and automatic temperature adjustment.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hsac/combat_geometry.hpp"
#include "hsac/neural_core.hpp"

namespace hsac {

inline constexpr int kActionSize = 2;
using Action = std::array<double, kActionSize>;

struct SacConfig {
    double gamma = 0.996;
    double tau = 0.005;
    int batch_size = 256;
    std::size_t replay_capacity = 1'000'000;
    double entropy_target = -static_cast<double>(kActionSize);
    double lr_q = 3e-4;
    double lr_pi = 3e-4;
    double lr_alpha = 3e-4;
    double initial_alpha = 1.0;
    std::vector<int> hidden{256, 256, 256};
    nn::LogStdBand log_std_band{};
    /// Replay size at which gradient updates start; 0 means 10 * batch_size.
    std::size_t warmup = 0;

    std::size_t effective_warmup() const {
        return warmup > 0 ? warmup : static_cast<std::size_t>(10 * batch_size);
    }
    void validate() const;
};

struct Transition {
    Observation obs{};
    Action action{};  // squashed, in (-1, 1)
    double reward = 0.0;
    Observation next_obs{};
    bool done = false;
    double q = 0.0;   // homotopy weight at collection time
};

/// Column-major minibatch.
struct Batch {
    nn::Matrix obs;       // 11 x B
    nn::Matrix action;    // 2 x B
    nn::Vector reward;    // B
    nn::Matrix next_obs;  // 11 x B
    nn::Vector done;      // B, 1 for terminal

    Eigen::Index size() const { return reward.size(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

/// FIFO ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 1'000'000);

    void push(const Transition& t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return data_.empty(); }

    /// i-th oldest stored transition.
    const Transition& at(std::size_t i) const;

    std::vector<std::size_t> sample_indices(std::size_t n, nn::Rng& rng) const;
    Batch sample(std::size_t n, nn::Rng& rng) const;
    void clear();

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // slot of the oldest entry once full
    std::vector<Transition> data_;
};

struct LearnerState {
    SacConfig config;
    nn::Mlp actor;
    nn::Mlp critic1, critic2;
    nn::Mlp target1, target2;
    double log_alpha = 0.0;
    nn::OptimizerState actor_opt, critic1_opt, critic2_opt, alpha_opt;
    ReplayBuffer replay;
    std::int64_t updates = 0;
    nn::Rng rng;

    double alpha() const;
};

/// Fresh learner: networks initialized from `seed`, targets copied from the
/// critics, empty replay.
LearnerState make_learner(const SacConfig& config, std::uint64_t seed);

/// Noise for one update: next-state action draws (critic target) and
/// current-state draws (actor and temperature losses), both 2 x B.
struct UpdateNoise {
    nn::Matrix next;
    nn::Matrix current;
};

UpdateNoise draw_update_noise(Eigen::Index batch_size, nn::Rng& rng);

/// Concatenates observation and action rows as critic input.
nn::Matrix critic_input(const nn::Matrix& obs, const nn::Matrix& action);

/// Single-sample soft state value Q_min(s, a) - alpha * log pi(a|s) at the
/// action produced by `noise` (2-vector).
double soft_value(const Observation& obs, const LearnerState& learner, const nn::Vector& noise);

struct CriticLoss {
    double loss1 = 0.0;
    double loss2 = 0.0;
    nn::MlpGradients grads1, grads2;

    double total() const { return loss1 + loss2; }
};

/// Mean of 1/2 (Q_i(s,a) - y)^2 with y = r + gamma (1 - done) V_target(s').
/// Throws EmptyBatch.
CriticLoss critic_loss(const Batch& batch, const LearnerState& learner, double gamma,
                       const nn::Matrix& next_noise);

struct ActorLoss {
    double loss = 0.0;
    nn::MlpGradients grads;
    nn::Vector log_prob;  // per sample, for the temperature loss
};

/// Mean of alpha * log pi(a|s) - min_i Q_i(s, a), a reparameterized.
ActorLoss actor_loss(const Batch& batch, const LearnerState& learner, const nn::Matrix& noise);

struct TemperatureLoss {
    double loss = 0.0;
    double grad_log_alpha = 0.0;
};

/// Mean of -alpha * log pi - alpha * h_bar; gradient taken w.r.t. log alpha.
TemperatureLoss temperature_loss(const nn::Vector& log_prob, double log_alpha, double h_bar);
TemperatureLoss temperature_loss(const Batch& batch, const LearnerState& learner, double h_bar,
                                 const nn::Matrix& noise);

/// Polyak blend of critic parameters into the target networks.
void target_update(LearnerState& learner, double tau);

struct UpdateMetrics {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha_loss = 0.0;
    double alpha = 0.0;
    double grad_norm = 0.0;  // Euclidean norm of the actor gradient
};

/// Critic steps, actor step, temperature step, target update, in that
/// order. Draws noise from the learner's generator.
UpdateMetrics update_step(LearnerState& learner, const Batch& batch);
UpdateMetrics update_step(LearnerState& learner, const Batch& batch, const UpdateNoise& noise);

/// Samples a batch from the learner's replay and updates. Throws
/// InsufficientData when replay holds fewer than batch_size transitions.
UpdateMetrics update_from_replay(LearnerState& learner);

/// Stochastic (rng given) or deterministic (tanh(mean)) action in (-1, 1).
Action policy_action(const nn::Mlp& actor, const Observation& obs, nn::Rng* rng,
                     nn::LogStdBand band = {});

}  // namespace hsac
