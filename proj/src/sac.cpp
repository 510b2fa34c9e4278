#include "hsac/sac.hpp"

#include <cmath>
#include <string>

#include "hsac/errors.hpp"

namespace hsac {

using nn::Matrix;
using nn::Vector;

void SacConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("sac: gamma must lie in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("sac: tau must lie in (0, 1]");
    if (batch_size < 1) throw ConfigError("sac: batch size must be >= 1");
    if (replay_capacity < static_cast<std::size_t>(batch_size))
        throw ConfigError("sac: replay capacity must be >= batch size");
    if (!(lr_q > 0.0 && lr_pi > 0.0 && lr_alpha > 0.0)) throw ConfigError("sac: learning rates must be > 0");
    if (!(initial_alpha > 0.0)) throw ConfigError("sac: initial alpha must be > 0");
    for (int h : hidden)
        if (h < 1) throw ConfigError("sac: hidden widths must be >= 1");
    if (!(log_std_band.min < log_std_band.max)) throw ConfigError("sac: log std band is empty");
}

// --- replay -----------------------------------------------------------------

Batch make_batch(const std::vector<Transition>& transitions) {
    const auto n = static_cast<Eigen::Index>(transitions.size());
    Batch b;
    b.obs.resize(kObservationSize, n);
    b.next_obs.resize(kObservationSize, n);
    b.action.resize(kActionSize, n);
    b.reward.resize(n);
    b.done.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& t = transitions[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < kObservationSize; ++i) {
            b.obs(i, c) = t.obs[i];
            b.next_obs(i, c) = t.next_obs[i];
        }
        for (std::size_t i = 0; i < kActionSize; ++i) b.action(i, c) = t.action[i];
        b.reward(c) = t.reward;
        b.done(c) = t.done ? 1.0 : 0.0;
    }
    return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be > 0");
}

void ReplayBuffer::push(const Transition& t) {
    if (data_.size() < capacity_) {
        data_.push_back(t);
        return;
    }
    data_[head_] = t;
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw InsufficientData("replay index out of range");
    return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, nn::Rng& rng) const {
    if (data_.empty()) throw InsufficientData("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

Batch ReplayBuffer::sample(std::size_t n, nn::Rng& rng) const {
    std::vector<Transition> picked;
    picked.reserve(n);
    for (std::size_t i : sample_indices(n, rng)) picked.push_back(data_[i]);
    return make_batch(picked);
}

void ReplayBuffer::clear() {
    data_.clear();
    head_ = 0;
}

// --- learner ----------------------------------------------------------------

double LearnerState::alpha() const { return std::exp(log_alpha); }

LearnerState make_learner(const SacConfig& config, std::uint64_t seed) {
    config.validate();
    LearnerState l;
    l.config = config;
    l.replay = ReplayBuffer(config.replay_capacity);
    l.rng = nn::Rng(seed);

    auto sizes = [&](int in, int out) {
        std::vector<int> s{in};
        s.insert(s.end(), config.hidden.begin(), config.hidden.end());
        s.push_back(out);
        return s;
    };
    l.actor = nn::Mlp(sizes(kObservationSize, 2 * kActionSize), l.rng);
    l.critic1 = nn::Mlp(sizes(kObservationSize + kActionSize, 1), l.rng);
    l.critic2 = nn::Mlp(sizes(kObservationSize + kActionSize, 1), l.rng);
    l.target1 = l.critic1;
    l.target2 = l.critic2;
    l.log_alpha = std::log(config.initial_alpha);
    l.actor_opt = nn::make_optimizer_state(l.actor, {.learning_rate = config.lr_pi});
    l.critic1_opt = nn::make_optimizer_state(l.critic1, {.learning_rate = config.lr_q});
    l.critic2_opt = nn::make_optimizer_state(l.critic2, {.learning_rate = config.lr_q});
    l.alpha_opt = nn::make_optimizer_state(1, {.learning_rate = config.lr_alpha});
    return l;
}

UpdateNoise draw_update_noise(Eigen::Index batch_size, nn::Rng& rng) {
    UpdateNoise n;
    n.next = nn::standard_normal(kActionSize, batch_size, rng);
    n.current = nn::standard_normal(kActionSize, batch_size, rng);
    return n;
}

Matrix critic_input(const Matrix& obs, const Matrix& action) {
    if (obs.cols() != action.cols()) throw ShapeMismatch("observation and action batches differ in size");
    Matrix in(obs.rows() + action.rows(), obs.cols());
    in.topRows(obs.rows()) = obs;
    in.bottomRows(action.rows()) = action;
    return in;
}

double soft_value(const Observation& obs, const LearnerState& learner, const Vector& noise) {
    Matrix s(kObservationSize, 1);
    for (std::size_t i = 0; i < kObservationSize; ++i) s(i, 0) = obs[i];
    const auto pb = nn::squashed_gaussian(learner.actor.forward(s), Matrix(noise), learner.config.log_std_band);
    const Matrix in = critic_input(s, pb.action);
    const double q = std::min(learner.critic1.forward(in)(0, 0), learner.critic2.forward(in)(0, 0));
    return q - learner.alpha() * pb.log_prob(0);
}

namespace {

void require_nonempty(const Batch& batch) {
    if (batch.size() == 0) throw EmptyBatch("loss evaluated on an empty batch");
}

}  // namespace

CriticLoss critic_loss(const Batch& batch, const LearnerState& learner, double gamma, const Matrix& next_noise) {
    require_nonempty(batch);
    const auto n = static_cast<double>(batch.size());
    const double alpha = learner.alpha();

    // Target: constants for differentiation.
    const auto next = nn::squashed_gaussian(learner.actor.forward(batch.next_obs), next_noise,
                                            learner.config.log_std_band);
    const Matrix next_in = critic_input(batch.next_obs, next.action);
    const Vector q_next = learner.target1.forward(next_in).row(0).transpose().cwiseMin(
        learner.target2.forward(next_in).row(0).transpose());
    const Vector v_next = q_next - alpha * next.log_prob;
    const Vector target =
        batch.reward.array() + gamma * (1.0 - batch.done.array()) * v_next.array();

    const Matrix in = critic_input(batch.obs, batch.action);
    CriticLoss out;
    auto one = [&](const nn::Mlp& critic, double& loss, nn::MlpGradients& grads) {
        nn::ForwardCache cache;
        const Vector q = critic.forward(in, cache).row(0).transpose();
        const Vector diff = q - target;
        loss = 0.5 * diff.squaredNorm() / n;
        critic.backward(cache, (diff / n).transpose(), grads);
    };
    one(learner.critic1, out.loss1, out.grads1);
    one(learner.critic2, out.loss2, out.grads2);
    return out;
}

ActorLoss actor_loss(const Batch& batch, const LearnerState& learner, const Matrix& noise) {
    require_nonempty(batch);
    const Eigen::Index b = batch.size();
    const auto n = static_cast<double>(b);
    const double alpha = learner.alpha();

    nn::ForwardCache actor_cache;
    const Matrix raw = learner.actor.forward(batch.obs, actor_cache);
    const auto pb = nn::squashed_gaussian(raw, noise, learner.config.log_std_band);

    const Matrix in = critic_input(batch.obs, pb.action);
    nn::ForwardCache c1, c2;
    const Vector q1 = learner.critic1.forward(in, c1).row(0).transpose();
    const Vector q2 = learner.critic2.forward(in, c2).row(0).transpose();

    // d(loss)/dQ_min = -1/n routed to whichever critic is the minimum.
    Matrix up1 = Matrix::Zero(1, b);
    Matrix up2 = Matrix::Zero(1, b);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < b; ++c) {
        const bool first = q1(c) <= q2(c);
        const double q_min = first ? q1(c) : q2(c);
        (first ? up1 : up2)(0, c) = -1.0 / n;
        sum += alpha * pb.log_prob(c) - q_min;
    }
    nn::MlpGradients scratch;
    const Matrix d_in1 = learner.critic1.backward(c1, up1, scratch);
    const Matrix d_in2 = learner.critic2.backward(c2, up2, scratch);
    const Matrix d_action = (d_in1 + d_in2).bottomRows(kActionSize);
    const Vector d_log_prob = Vector::Constant(b, alpha / n);

    ActorLoss out;
    out.loss = sum / n;
    out.log_prob = pb.log_prob;
    learner.actor.backward(actor_cache, nn::squashed_gaussian_backward(pb, d_action, d_log_prob), out.grads);
    return out;
}

TemperatureLoss temperature_loss(const Vector& log_prob, double log_alpha, double h_bar) {
    if (log_prob.size() == 0) throw EmptyBatch("temperature loss on an empty batch");
    const double alpha = std::exp(log_alpha);
    const double mean_term = (-log_prob.array() - h_bar).mean();
    return {alpha * mean_term, alpha * mean_term};
}

TemperatureLoss temperature_loss(const Batch& batch, const LearnerState& learner, double h_bar,
                                 const Matrix& noise) {
    require_nonempty(batch);
    const auto pb = nn::squashed_gaussian(learner.actor.forward(batch.obs), noise, learner.config.log_std_band);
    return temperature_loss(pb.log_prob, learner.log_alpha, h_bar);
}

void target_update(LearnerState& learner, double tau) {
    auto blend = [tau](const nn::Mlp& online, nn::Mlp& target) {
        if (tau == 1.0) {
            target = online;
            return;
        }
        auto& tl = target.layers();
        const auto& ol = online.layers();
        if (tl.size() != ol.size()) throw ShapeMismatch("target and online critics differ in depth");
        for (std::size_t i = 0; i < tl.size(); ++i) {
            // Written as an increment so that equal online/target stay bit-identical.
            tl[i].weight += tau * (ol[i].weight - tl[i].weight);
            tl[i].bias += tau * (ol[i].bias - tl[i].bias);
        }
    };
    blend(learner.critic1, learner.target1);
    blend(learner.critic2, learner.target2);
}

UpdateMetrics update_step(LearnerState& learner, const Batch& batch, const UpdateNoise& noise) {
    require_nonempty(batch);
    UpdateMetrics m;

    const auto cl = critic_loss(batch, learner, learner.config.gamma, noise.next);
    nn::optimizer_step(learner.critic1_opt, learner.critic1, cl.grads1);
    nn::optimizer_step(learner.critic2_opt, learner.critic2, cl.grads2);
    m.critic_loss = cl.total();

    const auto al = actor_loss(batch, learner, noise.current);
    m.grad_norm = std::sqrt(al.grads.squared_norm());
    nn::optimizer_step(learner.actor_opt, learner.actor, al.grads);
    m.actor_loss = al.loss;

    const auto tl = temperature_loss(al.log_prob, learner.log_alpha, learner.config.entropy_target);
    double grad = tl.grad_log_alpha;
    nn::adam_update(learner.alpha_opt, std::span<double>(&learner.log_alpha, 1), std::span<const double>(&grad, 1));
    m.alpha_loss = tl.loss;
    m.alpha = learner.alpha();

    target_update(learner, learner.config.tau);
    ++learner.updates;
    return m;
}

UpdateMetrics update_step(LearnerState& learner, const Batch& batch) {
    require_nonempty(batch);
    const auto noise = draw_update_noise(batch.size(), learner.rng);
    return update_step(learner, batch, noise);
}

UpdateMetrics update_from_replay(LearnerState& learner) {
    const auto needed = static_cast<std::size_t>(learner.config.batch_size);
    if (learner.replay.size() < needed)
        throw InsufficientData("replay holds " + std::to_string(learner.replay.size()) + " transitions, need " +
                               std::to_string(needed));
    const Batch batch = learner.replay.sample(needed, learner.rng);
    return update_step(learner, batch);
}

Action policy_action(const nn::Mlp& actor, const Observation& obs, nn::Rng* rng, nn::LogStdBand band) {
    Vector s(kObservationSize);
    for (std::size_t i = 0; i < kObservationSize; ++i) s(i) = obs[i];
    const Vector raw = actor.forward(s);
    Action a{};
    if (rng == nullptr) {
        for (int i = 0; i < kActionSize; ++i) a[i] = std::tanh(raw(i));
        return a;
    }
    const auto sample = nn::sample_squashed_gaussian(nn::split_policy_output(raw, band), *rng);
    for (int i = 0; i < kActionSize; ++i) a[i] = sample.action(i);
    return a;
}

}  // namespace hsac
