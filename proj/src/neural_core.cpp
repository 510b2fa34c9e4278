#include "hsac/neural_core.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "hsac/errors.hpp"

namespace hsac::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

// --- gradients --------------------------------------------------------------

double MlpGradients::squared_norm() const {
    double sum = 0.0;
    for (const auto& l : layers) sum += l.weight.squaredNorm() + l.bias.squaredNorm();
    return sum;
}

void MlpGradients::set_zero() {
    for (auto& l : layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
    if (other.layers.size() != layers.size()) throw ShapeMismatch("gradient layer count differs");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight += other.layers[i].weight;
        layers[i].bias += other.layers[i].bias;
    }
    return *this;
}

// --- Mlp --------------------------------------------------------------------

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw ShapeMismatch("an MLP needs at least input and output sizes");
    for (int s : sizes)
        if (s <= 0) throw ShapeMismatch("layer sizes must be positive");
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const int fan_in = sizes[i];
        const int fan_out = sizes[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> init(-bound, bound);
        DenseLayer layer{Matrix(fan_out, fan_in), Vector(fan_out)};
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = init(rng);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = init(rng);
        layers_.push_back(std::move(layer));
    }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeMismatch("an MLP needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        if (l.bias.size() != l.weight.rows())
            throw ShapeMismatch("layer " + std::to_string(i) + ": bias size does not match weight rows");
        if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows())
            throw ShapeMismatch("layer " + std::to_string(i) + ": input size does not chain");
    }
}

int Mlp::input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

std::vector<int> Mlp::sizes() const {
    std::vector<int> s;
    if (layers_.empty()) return s;
    s.push_back(input_size());
    for (const auto& l : layers_) s.push_back(static_cast<int>(l.weight.rows()));
    return s;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

void Mlp::check_input(Eigen::Index rows) const {
    if (layers_.empty()) throw ShapeMismatch("forward on an empty network");
    if (rows != input_size())
        throw ShapeMismatch("input has " + std::to_string(rows) + " rows, network expects " +
                            std::to_string(input_size()));
}

Matrix Mlp::forward(const Matrix& input) const {
    check_input(input.rows());
    Matrix a = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Matrix z = layers_[i].weight * a;
        z.colwise() += layers_[i].bias;
        if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

Matrix Mlp::forward(const Matrix& input, ForwardCache& cache) const {
    check_input(input.rows());
    cache.inputs.resize(layers_.size());
    cache.pre_activations.resize(layers_.size());
    cache.inputs[0] = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Matrix& z = cache.pre_activations[i];
        z.noalias() = layers_[i].weight * cache.inputs[i];
        z.colwise() += layers_[i].bias;
        if (i + 1 < layers_.size()) cache.inputs[i + 1] = z.cwiseMax(0.0);
    }
    return cache.pre_activations.back();
}

Vector Mlp::forward(const Vector& input) const {
    return forward(Matrix(input)).col(0);
}

Matrix Mlp::backward(const ForwardCache& cache, const Matrix& upstream, MlpGradients& grads) const {
    if (cache.pre_activations.size() != layers_.size()) throw ShapeMismatch("cache does not match network");
    const auto& out = cache.pre_activations.back();
    if (upstream.rows() != out.rows() || upstream.cols() != out.cols())
        throw ShapeMismatch("upstream is " + shape(upstream.rows(), upstream.cols()) + ", output is " +
                            shape(out.rows(), out.cols()));
    grads.layers.resize(layers_.size());
    Matrix delta = upstream;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        if (k + 1 < layers_.size())
            delta = (cache.pre_activations[k].array() > 0.0).select(delta, 0.0);
        grads.layers[k].weight.noalias() = delta * cache.inputs[k].transpose();
        grads.layers[k].bias = delta.rowwise().sum();
        Matrix next = layers_[k].weight.transpose() * delta;
        delta = std::move(next);
    }
    return delta;
}

MlpGradients Mlp::zero_gradients() const {
    MlpGradients g;
    for (const auto& l : layers_)
        g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return g;
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
        flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return flat;
}

void Mlp::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count())
        throw ShapeMismatch("flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                            std::to_string(parameter_count()));
    const double* p = flat.data();
    for (auto& l : layers_) {
        std::memcpy(l.weight.data(), p, sizeof(double) * l.weight.size());
        p += l.weight.size();
        std::memcpy(l.bias.data(), p, sizeof(double) * l.bias.size());
        p += l.bias.size();
    }
}

bool Mlp::operator==(const Mlp& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& a = layers_[i];
        const auto& b = other.layers_[i];
        if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
        if (a.weight != b.weight || a.bias != b.bias) return false;
    }
    return true;
}

Vector forward(const Mlp& net, const Vector& input) { return net.forward(input); }

BackwardResult backward(const Mlp& net, const Vector& input, const Vector& upstream) {
    ForwardCache cache;
    net.forward(Matrix(input), cache);
    BackwardResult result;
    result.input = net.backward(cache, Matrix(upstream), result.params).col(0);
    return result;
}

// --- policy head ------------------------------------------------------------

double log1m_tanh_sq(double u) {
    const double a = std::abs(u);
    return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

PolicyOutput split_policy_output(const Vector& raw, LogStdBand band) {
    if (raw.size() % 2 != 0) throw ShapeMismatch("policy output must have an even number of rows");
    const Eigen::Index d = raw.size() / 2;
    return {raw.head(d), raw.tail(d).cwiseMax(band.min).cwiseMin(band.max)};
}

SquashedSample sample_squashed_gaussian(const PolicyOutput& out, Rng& rng) {
    if (out.mean.size() != out.log_std.size()) throw ShapeMismatch("mean and log std differ in size");
    std::normal_distribution<double> normal(0.0, 1.0);
    SquashedSample s;
    s.action.resize(out.mean.size());
    for (Eigen::Index i = 0; i < out.mean.size(); ++i) {
        const double eps = normal(rng);
        const double u = out.mean(i) + std::exp(out.log_std(i)) * eps;
        s.action(i) = std::tanh(u);
        s.log_prob += -0.5 * eps * eps - out.log_std(i) - kHalfLog2Pi - log1m_tanh_sq(u);
    }
    return s;
}

PolicyBatch squashed_gaussian(const Matrix& raw, const Matrix& noise, LogStdBand band) {
    if (raw.rows() % 2 != 0) throw ShapeMismatch("policy output must have an even number of rows");
    const Eigen::Index d = raw.rows() / 2;
    if (noise.rows() != d || noise.cols() != raw.cols())
        throw ShapeMismatch("noise is " + shape(noise.rows(), noise.cols()) + ", expected " + shape(d, raw.cols()));
    PolicyBatch b;
    b.mean = raw.topRows(d);
    const auto raw_log_std = raw.bottomRows(d).array();
    b.log_std_active = (raw_log_std >= band.min) && (raw_log_std <= band.max);
    b.log_std = raw_log_std.max(band.min).min(band.max).matrix();
    b.noise = noise;
    const Matrix u = b.mean.array() + b.log_std.array().exp() * noise.array();
    b.action = u.array().tanh();
    b.log_prob.resize(raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        double lp = 0.0;
        for (Eigen::Index i = 0; i < d; ++i)
            lp += -0.5 * noise(i, c) * noise(i, c) - b.log_std(i, c) - kHalfLog2Pi - log1m_tanh_sq(u(i, c));
        b.log_prob(c) = lp;
    }
    return b;
}

Matrix deterministic_action(const Matrix& raw) {
    return raw.topRows(raw.rows() / 2).array().tanh();
}

Matrix squashed_gaussian_backward(const PolicyBatch& b, const Matrix& d_action, const Vector& d_log_prob) {
    const Eigen::Index d = b.mean.rows();
    const Eigen::Index n = b.mean.cols();
    if (d_action.rows() != d || d_action.cols() != n || d_log_prob.size() != n)
        throw ShapeMismatch("policy backward: upstream shapes do not match the batch");
    const auto a = b.action.array();
    const auto sigma_eps = b.log_std.array().exp() * b.noise.array();
    const auto d_lp = d_log_prob.transpose().replicate(d, 1).array();
    const auto du = d_action.array() * (1.0 - a * a) + 2.0 * a * d_lp;  // d(loss)/du

    Matrix grad(2 * d, n);
    grad.topRows(d) = du;
    grad.bottomRows(d) = (du * sigma_eps - d_lp).cwiseProduct(b.log_std_active.cast<double>());
    return grad;
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
}

// --- Adam -------------------------------------------------------------------

OptimizerState make_optimizer_state(std::size_t parameter_count, AdamConfig config) {
    OptimizerState s;
    s.config = config;
    s.first_moment.assign(parameter_count, 0.0);
    s.second_moment.assign(parameter_count, 0.0);
    return s;
}

OptimizerState make_optimizer_state(const Mlp& net, AdamConfig config) {
    return make_optimizer_state(net.parameter_count(), config);
}

void adam_update(OptimizerState& s, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != s.first_moment.size() ||
        params.size() != s.second_moment.size())
        throw ShapeMismatch("optimizer state, parameters and gradients differ in size");
    ++s.step;
    const auto& c = s.config;
    const double t = static_cast<double>(s.step);
    const double bias1 = 1.0 - std::pow(c.beta1, t);
    const double bias2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.first_moment[i] = c.beta1 * s.first_moment[i] + (1.0 - c.beta1) * g;
        s.second_moment[i] = c.beta2 * s.second_moment[i] + (1.0 - c.beta2) * g * g;
        const double m_hat = s.first_moment[i] / bias1;
        const double v_hat = s.second_moment[i] / bias2;
        params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

void optimizer_step(OptimizerState& state, Mlp& net, const MlpGradients& grads) {
    auto& layers = net.layers();
    if (grads.layers.size() != layers.size()) throw ShapeMismatch("gradient layer count differs from network");
    if (state.first_moment.size() != net.parameter_count())
        throw ShapeMismatch("optimizer state does not match network size");
    // Flat views in storage order so the moments line up with flatten().
    std::vector<double> flat_grad;
    flat_grad.reserve(net.parameter_count());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& g = grads.layers[i];
        if (g.weight.rows() != layers[i].weight.rows() || g.weight.cols() != layers[i].weight.cols() ||
            g.bias.size() != layers[i].bias.size())
            throw ShapeMismatch("gradient shape differs from layer " + std::to_string(i));
        flat_grad.insert(flat_grad.end(), g.weight.data(), g.weight.data() + g.weight.size());
        flat_grad.insert(flat_grad.end(), g.bias.data(), g.bias.data() + g.bias.size());
    }
    std::vector<double> flat = net.flatten();
    adam_update(state, flat, flat_grad);
    net.assign(flat);
}

// --- serialization ----------------------------------------------------------

void write_u64(std::ostream& out, std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw CheckpointCorrupt("unexpected end of data");
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return value;
}

void write_f64(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

namespace {

constexpr std::uint64_t kMaxDim = 1u << 20;

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) write_f64(out, data[i]);
}

void read_doubles(std::istream& in, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] = read_f64(in);
}

}  // namespace

void write_mlp(std::ostream& out, const Mlp& net) {
    write_u64(out, net.layers().size());
    for (const auto& l : net.layers()) {
        write_u64(out, static_cast<std::uint64_t>(l.weight.rows()));
        write_u64(out, static_cast<std::uint64_t>(l.weight.cols()));
        write_doubles(out, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        write_doubles(out, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
}

Mlp read_mlp(std::istream& in) {
    const std::uint64_t count = read_u64(in);
    if (count == 0 || count > 64) throw CheckpointCorrupt("implausible layer count");
    std::vector<DenseLayer> layers;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim)
            throw CheckpointCorrupt("implausible layer shape");
        DenseLayer l{Matrix(rows, cols), Vector(rows)};
        read_doubles(in, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
        read_doubles(in, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
        layers.push_back(std::move(l));
    }
    try {
        return Mlp(std::move(layers));
    } catch (const ShapeMismatch& e) {
        throw CheckpointCorrupt(e.what());
    }
}

void write_optimizer(std::ostream& out, const OptimizerState& s) {
    write_f64(out, s.config.learning_rate);
    write_f64(out, s.config.beta1);
    write_f64(out, s.config.beta2);
    write_f64(out, s.config.epsilon);
    write_u64(out, static_cast<std::uint64_t>(s.step));
    write_u64(out, s.first_moment.size());
    write_doubles(out, s.first_moment.data(), s.first_moment.size());
    write_doubles(out, s.second_moment.data(), s.second_moment.size());
}

OptimizerState read_optimizer(std::istream& in) {
    OptimizerState s;
    s.config.learning_rate = read_f64(in);
    s.config.beta1 = read_f64(in);
    s.config.beta2 = read_f64(in);
    s.config.epsilon = read_f64(in);
    s.step = static_cast<std::int64_t>(read_u64(in));
    const std::uint64_t n = read_u64(in);
    if (n > (1ull << 32)) throw CheckpointCorrupt("implausible optimizer size");
    s.first_moment.resize(n);
    s.second_moment.resize(n);
    read_doubles(in, s.first_moment.data(), n);
    read_doubles(in, s.second_moment.data(), n);
    return s;
}

}  // namespace hsac::nn
