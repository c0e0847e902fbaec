#pragma once

#include "sfgnn/parameters.hpp"
#include "sfgnn/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sfgnn {

/// Hyperparameters shared by every trainable model. Defaults are the values
/// used for all reported experiments.
struct TrainingConfig {
  std::size_t hidden_size = 16;
  double lr = 0.001;
  double dropout_p = 0.2;
  double l2_lambda = 0.05;
  std::size_t max_epochs = 1000;
  std::size_t patience = 20;
  std::size_t steps = 4;        // propagation steps T (GNN) / K (GG-NN)
  std::size_t batch_size = 10;  // graphs per Adam update
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

// ---------------------------------------------------------------------------
// Initialization and activations

/// Entries i.i.d. uniform on [-a, a], a = sqrt(6 / (rows + cols)).
Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// log(1 / (1 + exp(-x))) evaluated as min(0, x) - log1p(exp(-|x|)).
double log_sigmoid(double x) noexcept;
Vector log_sigmoid(const Vector& x);

double sigmoid(double x) noexcept;

/// Numerically stable softmax.
Vector softmax(const Vector& scores);

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

/// Softmax cross entropy of `scores` against class `target`;
/// grad = softmax(scores) - onehot(target).
LossAndGrad cross_entropy(const Vector& scores, std::size_t target);

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::size_t t = 0;

  static AdamState for_parameters(const ParameterSet& params, AdamConfig config = {});
};

/// Bias-corrected Adam update applied to `params` in place; increments
/// `state.t`. The caller owns both objects exclusively for the duration.
void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads);

// ---------------------------------------------------------------------------
// Regularization

/// Inverted dropout: entries are 0 with probability p, otherwise 1/(1-p).
/// With `training == false` every entry is 1.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng, bool training);
Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, std::uint64_t seed,
                    bool training);

struct PenaltyAndGrad {
  double loss = 0.0;
  ParameterSet grads;
};

/// (lambda / 2) * sum of squares over regularized tensors; grad = lambda * w.
PenaltyAndGrad l2_penalty(const ParameterSet& params, double lambda);

enum class StopDecision { kContinue, kStop };

/// Stop iff the best loss has not improved by more than 1e-12 within the last
/// `patience` recorded epochs. Never stops with fewer than patience + 1 entries.
StopDecision early_stop(std::span<const double> history, std::size_t patience);

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct TensorCheck {
  std::string name;
  double max_relative_error = 0.0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::vector<TensorCheck> tensors;
};

/// Compares `analytic` against central differences (f(w+h) - f(w-h)) / 2h for
/// every coordinate. Relative error uses max(|a|, |n|, 1e-8) as denominator.
/// Throws DivergenceError if f is non-finite.
GradCheckResult grad_check(const std::function<double(const ParameterSet&)>& f,
                           const ParameterSet& params, const ParameterSet& analytic,
                           double h = 1e-5);

double relative_error(double analytic, double numeric) noexcept;

}  // namespace sfgnn
