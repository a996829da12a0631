#include "corrnet/mlp.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "corrnet/binio.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

constexpr char kModelMagic[4] = {'C', 'N', 'N', 'N'};
constexpr std::uint32_t kModelVersion = 1;

Eigen::MatrixXd apply_selu(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return selu(v); });
}

Eigen::MatrixXd apply_output(const Eigen::MatrixXd& z, OutputActivation act) {
    if (act == OutputActivation::Tanh)
        return z.unaryExpr([](double v) { return std::tanh(v); });
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// derivative of the layer activation expressed through the activation value
Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& a, bool is_output,
                                      OutputActivation act) {
    if (!is_output)
        return a.unaryExpr([](double v) { return selu_derivative_from_activation(v); });
    if (act == OutputActivation::Tanh) return (1.0 - a.array().square()).matrix();
    return (a.array() * (1.0 - a.array())).matrix();
}

}  // namespace

double selu(double z) {
    return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * (std::exp(z) - 1.0);
}

double selu_derivative_from_activation(double a) {
    // for z>0 the activation is positive and the slope is lambda; otherwise
    // a = lambda*alpha*(e^z - 1), so lambda*alpha*e^z = a + lambda*alpha
    return a > 0.0 ? kSeluLambda : a + kSeluLambda * kSeluAlpha;
}

std::size_t mlp_parameter_count(const std::vector<int>& layer_dims, bool use_biases) {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        count += static_cast<std::size_t>(layer_dims[l]) * layer_dims[l + 1];
        if (use_biases) count += static_cast<std::size_t>(layer_dims[l + 1]);
    }
    return count;
}

std::size_t MlpModel::parameter_count() const {
    return mlp_parameter_count(layer_dims, use_biases);
}

AdamState AdamState::zeros_like(const MlpModel& model) {
    AdamState s;
    for (const auto& w : model.weights) {
        s.first_moment_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        s.second_moment_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.biases) {
        s.first_moment_b.push_back(Eigen::VectorXd::Zero(b.size()));
        s.second_moment_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return s;
}

MlpModel init_model(const std::vector<int>& layer_dims, OutputActivation output_activation,
                    bool use_biases, std::uint64_t init_seed) {
    if (layer_dims.size() < 2) throw std::invalid_argument("need at least input and output layers");
    for (int d : layer_dims)
        if (d < 1) throw std::invalid_argument("zero-sized layer");

    MlpModel model;
    model.layer_dims = layer_dims;
    model.use_biases = use_biases;
    model.output_activation = output_activation;

    rng::Rng gen(init_seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = gen.gaussian(0.0, stddev);
        model.weights.push_back(std::move(w));
        if (use_biases) model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

ForwardTrace forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != model.input_dim())
        throw std::invalid_argument("input dimension mismatch: got " +
                                    std::to_string(inputs.rows()) + ", model expects " +
                                    std::to_string(model.input_dim()));
    if (!inputs.allFinite()) throw std::invalid_argument("non-finite input");

    ForwardTrace trace;
    trace.activations.reserve(model.layer_count() + 1);
    trace.activations.push_back(inputs);
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        Eigen::MatrixXd z = model.weights[l] * trace.activations.back();
        if (model.use_biases) z.colwise() += model.biases[l];
        const bool is_output = l + 1 == model.layer_count();
        trace.activations.push_back(is_output ? apply_output(z, model.output_activation)
                                              : apply_selu(z));
    }
    return trace;
}

double loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& targets) {
    if (predicted.rows() != targets.rows() || predicted.cols() != targets.cols())
        throw std::invalid_argument("prediction/target shape mismatch");
    return (predicted - targets).squaredNorm() /
           (static_cast<double>(predicted.rows()) * static_cast<double>(predicted.cols()));
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace,
                   const Eigen::MatrixXd& targets) {
    const Eigen::MatrixXd& output = trace.output();
    if (output.rows() != targets.rows() || output.cols() != targets.cols())
        throw std::invalid_argument("prediction/target shape mismatch");

    const auto layers = model.layer_count();
    Gradients grads;
    grads.weights.resize(layers);
    if (model.use_biases) grads.biases.resize(layers);

    const double scale =
        2.0 / (static_cast<double>(targets.rows()) * static_cast<double>(targets.cols()));
    Eigen::MatrixXd delta =
        (scale * (output - targets).array() *
         activation_derivative(output, true, model.output_activation).array())
            .matrix();

    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l] = delta * trace.activations[l].transpose();
        if (model.use_biases) grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = (model.weights[l].transpose() * delta).array() *
                    activation_derivative(trace.activations[l], false, model.output_activation)
                        .array();
        }
    }
    return grads;
}

void adam_step(MlpModel& model, AdamState& state, const Gradients& grads,
               const AdamConfig& config) {
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double corr1 = 1.0 - std::pow(config.beta1, t);
    const double corr2 = 1.0 - std::pow(config.beta2, t);

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = (config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square()).matrix();
        param.array() -=
            config.learning_rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + config.epsilon);
    };

    for (std::size_t l = 0; l < model.weights.size(); ++l)
        update(model.weights[l], state.first_moment_w[l], state.second_moment_w[l],
               grads.weights[l]);
    for (std::size_t l = 0; l < model.biases.size(); ++l)
        update(model.biases[l], state.first_moment_b[l], state.second_moment_b[l],
               grads.biases[l]);
}

std::vector<double> train(MlpModel& model, const Dataset& dataset, const TrainConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (dataset.inputs.empty()) throw std::invalid_argument("empty dataset");
    if (dataset.inputs[0].size() != model.input_dim())
        throw std::invalid_argument("dataset input width does not match model input layer");
    if (dataset.targets[0].values.size() != model.output_dim())
        throw std::invalid_argument("dataset target width does not match model output layer");

    const std::size_t total = dataset.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);

    AdamState adam = AdamState::zeros_like(model);
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(config.epochs));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng::Rng gen(rng::derive_seed(config.shuffle_seed, static_cast<std::uint64_t>(epoch)));
        gen.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < total; begin += config.batch_size) {
            const std::size_t batch =
                std::min<std::size_t>(config.batch_size, total - begin);
            Eigen::MatrixXd inputs(model.input_dim(), batch);
            Eigen::MatrixXd targets(model.output_dim(), batch);
            for (std::size_t b = 0; b < batch; ++b) {
                const std::size_t idx = order[begin + b];
                inputs.col(b) = dataset.inputs[idx];
                targets.col(b) = dataset.target_of(idx).values;
            }

            const ForwardTrace trace = forward(model, inputs);
            const double batch_loss = loss(trace.output(), targets);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(begin / config.batch_size));
            loss_sum += batch_loss * static_cast<double>(batch);

            adam_step(model, adam, backward(model, trace, targets), config.adam);
        }
        history.push_back(loss_sum / static_cast<double>(total));
        if (config.loss_log_period > 0 && (epoch + 1) % config.loss_log_period == 0)
            std::cerr << "epoch " << epoch + 1 << "/" << config.epochs
                      << " mean loss " << history.back() << "\n";
    }
    return history;
}

CorrVector predict(const MlpModel& model, const Eigen::VectorXd& window_flat) {
    const ForwardTrace trace = forward(model, window_flat);
    CorrVector out;
    out.values = trace.output().col(0);
    try {
        out.node_count = node_count_from_pairs(out.values.size());
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument(
            "model/target misconfiguration: output width " +
            std::to_string(out.values.size()) + " is not a pair count N(N-1)/2");
    }
    return out;
}

double grad_check(const MlpModel& model, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, double h) {
    MlpModel probe = model;
    const Eigen::MatrixXd targets = target;

    const ForwardTrace trace = forward(probe, input);
    const Gradients analytic = backward(probe, trace, targets);

    auto loss_at = [&]() { return loss(forward(probe, input).output(), targets); };
    double max_rel = 0.0;
    auto probe_param = [&](double& value, double analytic_grad) {
        const double saved = value;
        value = saved + h;
        const double up = loss_at();
        value = saved - h;
        const double down = loss_at();
        value = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double rel = std::abs(analytic_grad - numeric) /
                           std::max(1e-6, std::abs(analytic_grad) + std::abs(numeric));
        max_rel = std::max(max_rel, rel);
    };

    for (std::size_t l = 0; l < probe.weights.size(); ++l)
        for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c)
                probe_param(probe.weights[l](r, c), analytic.weights[l](r, c));
    for (std::size_t l = 0; l < probe.biases.size(); ++l)
        for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r)
            probe_param(probe.biases[l][r], analytic.biases[l][r]);
    return max_rel;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
    io::BinWriter out(path);
    out.magic(kModelMagic);
    out.u32(kModelVersion);
    out.u32(static_cast<std::uint32_t>(model.layer_dims.size()));
    for (int d : model.layer_dims) out.u32(static_cast<std::uint32_t>(d));
    out.u32(0);  // hidden activation tag: 0 = SELU
    out.u32(model.output_activation == OutputActivation::Tanh ? 0 : 1);
    out.u32(model.use_biases ? 1 : 0);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        // row-major on disk
        for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
            const Eigen::VectorXd row = model.weights[l].row(r);
            out.f64_array(row.data(), static_cast<std::size_t>(row.size()));
        }
        if (model.use_biases)
            out.f64_array(model.biases[l].data(),
                          static_cast<std::size_t>(model.biases[l].size()));
    }
    out.close();
}

MlpModel load_model(const std::filesystem::path& path) {
    io::BinReader in(path);
    in.expect_magic(kModelMagic, "model");
    in.expect_version(kModelVersion, "model");

    MlpModel model;
    const auto layer_count = in.u32();
    if (layer_count < 2) throw io::shape_mismatch_error("model declares fewer than two layers");
    model.layer_dims.resize(layer_count);
    for (auto& d : model.layer_dims) d = static_cast<int>(in.u32());
    const auto hidden_tag = in.u32();
    if (hidden_tag != 0)
        throw io::bad_version_error("unknown hidden activation tag " + std::to_string(hidden_tag));
    model.output_activation = in.u32() == 0 ? OutputActivation::Tanh : OutputActivation::Sigmoid;
    model.use_biases = in.u32() == 1;

    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const int rows = model.layer_dims[l + 1];
        const int cols = model.layer_dims[l];
        Eigen::MatrixXd w(rows, cols);
        Eigen::VectorXd row(cols);
        for (int r = 0; r < rows; ++r) {
            in.f64_array(row.data(), static_cast<std::size_t>(cols));
            w.row(r) = row;
        }
        model.weights.push_back(std::move(w));
        if (model.use_biases) {
            Eigen::VectorXd b(rows);
            in.f64_array(b.data(), static_cast<std::size_t>(rows));
            model.biases.push_back(std::move(b));
        }
    }
    return model;
}

MlpModel load_model(const std::filesystem::path& path, const std::vector<int>& expected_dims) {
    MlpModel model = load_model(path);
    if (model.layer_dims != expected_dims) {
        std::string have, want;
        for (int d : model.layer_dims) have += std::to_string(d) + " ";
        for (int d : expected_dims) want += std::to_string(d) + " ";
        throw io::shape_mismatch_error("shape mismatch: file has layers [ " + have +
                                       "], expected [ " + want + "]");
    }
    return model;
}

}  // namespace corrnet
