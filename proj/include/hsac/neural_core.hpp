// Fully connected networks with exact reverse-mode gradients, the
// tanh-squashed diagonal Gaussian policy head, and the Adam optimizer.
//
// Batches are column-major: one sample per column.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace hsac::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

/// Parameter-shaped gradient container.
struct MlpGradients {
    std::vector<DenseLayer> layers;

    double squared_norm() const;
    void set_zero();
    MlpGradients& operator+=(const MlpGradients& other);
};

/// Activations kept by a forward pass for the backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> pre_activations;
};

/// ReLU on hidden layers, identity on the output layer.
class Mlp {
public:
    Mlp() = default;

    /// `sizes` = {input, hidden..., output}. Weights and biases drawn from
    /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    Mlp(const std::vector<int>& sizes, Rng& rng);

    /// Throws ShapeMismatch if consecutive layers do not chain.
    explicit Mlp(std::vector<DenseLayer> layers);

    int input_size() const;
    int output_size() const;
    std::vector<int> sizes() const;
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    Matrix forward(const Matrix& input) const;
    Matrix forward(const Matrix& input, ForwardCache& cache) const;
    Vector forward(const Vector& input) const;

    /// Returns d(loss)/d(input) and overwrites `grads` with d(loss)/d(params)
    /// given d(loss)/d(output) = `upstream`.
    Matrix backward(const ForwardCache& cache, const Matrix& upstream, MlpGradients& grads) const;

    MlpGradients zero_gradients() const;

    /// Parameters in storage order (w0, b0, w1, b1, ...).
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    bool operator==(const Mlp& other) const;

private:
    void check_input(Eigen::Index rows) const;

    std::vector<DenseLayer> layers_;
};

struct BackwardResult {
    MlpGradients params;
    Vector input;
};

Vector forward(const Mlp& net, const Vector& input);
BackwardResult backward(const Mlp& net, const Vector& input, const Vector& upstream);

// --- squashed Gaussian policy head -----------------------------------------

struct LogStdBand {
    double min = -20.0;
    double max = 2.0;
};

/// Per-sample policy parameters. The actor network emits [mean; raw log std]
/// stacked, 2 * action_dim rows.
struct PolicyOutput {
    Vector mean;
    Vector log_std;
};

PolicyOutput split_policy_output(const Vector& raw, LogStdBand band = {});

struct SquashedSample {
    Vector action;  // in (-1, 1)^d
    double log_prob = 0.0;
};

SquashedSample sample_squashed_gaussian(const PolicyOutput& out, Rng& rng);

/// Batched squashed-Gaussian sampling with caller-supplied standard normal
/// noise, keeping what the backward pass needs.
struct PolicyBatch {
    Matrix mean;
    Matrix log_std;       // clamped
    Matrix noise;
    Matrix action;        // tanh(mean + exp(log_std) * noise)
    Vector log_prob;      // per column
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_active;  // inside the clamp band
};

PolicyBatch squashed_gaussian(const Matrix& raw, const Matrix& noise, LogStdBand band = {});

/// Deterministic action tanh(mean) per column.
Matrix deterministic_action(const Matrix& raw);

/// Chains d(loss)/d(action) and d(loss)/d(log_prob) back to the raw actor
/// output (reparameterized, noise held fixed).
Matrix squashed_gaussian_backward(const PolicyBatch& batch, const Matrix& d_action,
                                  const Vector& d_log_prob);

/// log(1 - tanh(u)^2) computed without cancellation.
double log1m_tanh_sq(double u);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// --- Adam ------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment accumulators shaped like the parameters they drive (flattened in
/// storage order).
struct OptimizerState {
    AdamConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step = 0;
};

OptimizerState make_optimizer_state(const Mlp& net, AdamConfig config = {});
OptimizerState make_optimizer_state(std::size_t parameter_count, AdamConfig config = {});

/// In-place Adam update of a flat parameter span.
void adam_update(OptimizerState& state, std::span<double> params, std::span<const double> grads);

/// Adam update of a network. Throws ShapeMismatch on inconsistent shapes.
void optimizer_step(OptimizerState& state, Mlp& net, const MlpGradients& grads);

// --- serialization ---------------------------------------------------------

void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);
void write_optimizer(std::ostream& out, const OptimizerState& state);
OptimizerState read_optimizer(std::istream& in);

void write_f64(std::ostream& out, double value);
double read_f64(std::istream& in);
void write_u64(std::ostream& out, std::uint64_t value);
std::uint64_t read_u64(std::istream& in);

}  // namespace hsac::nn
