#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "corrnet/corr.hpp"
#include "corrnet/dataset.hpp"

namespace corrnet {

// self-normalizing SELU constants (Klambauer et al.)
constexpr double kSeluLambda = 1.05070098735548049342;
constexpr double kSeluAlpha = 1.67326324235437728482;

enum class OutputActivation { Tanh, Sigmoid };

// Fully connected network: SELU hidden layers, tanh or sigmoid output.
// weights[l] maps layer l (cols) to layer l+1 (rows).
struct MlpModel {
    std::vector<int> layer_dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;  // empty when use_biases == false
    bool use_biases = true;
    OutputActivation output_activation = OutputActivation::Tanh;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
    std::size_t parameter_count() const;
};

std::size_t mlp_parameter_count(const std::vector<int>& layer_dims, bool use_biases);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Eigen::MatrixXd> first_moment_w, second_moment_w;
    std::vector<Eigen::VectorXd> first_moment_b, second_moment_b;
    long step_count = 0;

    static AdamState zeros_like(const MlpModel& model);
};

struct TrainConfig {
    int epochs = 50;
    int batch_size = 64;
    AdamConfig adam;
    std::uint64_t shuffle_seed = 0;
    int loss_log_period = 0;  // epochs between stderr progress lines; 0 = quiet
};

// columns are examples; per-layer activations retained for the backward pass
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> activations;  // [0] = input, back() = output

    const Eigen::MatrixXd& output() const { return activations.back(); }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

double selu(double z);
double selu_derivative_from_activation(double a);

// weights ~ N(0, 1/fan_in) (the init under which SELU self-normalizes),
// biases zero; deterministic per seed
MlpModel init_model(const std::vector<int>& layer_dims, OutputActivation output_activation,
                    bool use_biases, std::uint64_t init_seed);

ForwardTrace forward(const MlpModel& model, const Eigen::MatrixXd& inputs);

// mean over examples of (1/m)*sum of squared errors
double loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& targets);

// gradients of `loss` w.r.t. all parameters
Gradients backward(const MlpModel& model, const ForwardTrace& trace,
                   const Eigen::MatrixXd& targets);

void adam_step(MlpModel& model, AdamState& state, const Gradients& grads,
               const AdamConfig& config);

// Mini-batch training; returns per-epoch mean window loss. Deterministic for
// fixed seeds (sequential batch reduction, seeded per-epoch shuffles).
std::vector<double> train(MlpModel& model, const Dataset& dataset, const TrainConfig& config);

CorrVector predict(const MlpModel& model, const Eigen::VectorXd& window_flat);

// max over parameters of the relative error between analytic gradients and
// central finite differences with step h
double grad_check(const MlpModel& model, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, double h);

// "CNNN" container
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path, const std::vector<int>& expected_dims);

}  // namespace corrnet
