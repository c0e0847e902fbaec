#pragma once

#include "sfgnn/checkpoint.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/sequence.hpp"
#include "sfgnn/signal_source.hpp"
#include "sfgnn/training.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

/// Damaged is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  void add(HealthState truth, HealthState predicted) noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// (tp + tn) / total; throws kParameter on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// Position-wise exact triple matches over max(len(predicted), len(target)).
/// Throws kParameter on an empty target.
double sequence_accuracy(const std::vector<Triple>& predicted, const std::vector<Triple>& target);

struct LabeledFeatures {
  std::vector<Vector> features;
  std::vector<HealthState> labels;

  std::size_t size() const noexcept { return features.size(); }
};

/// Multinomial logistic regression on per-segment features: scores = w x + b
/// with w (2 x p) and b (2 x 1), both initialized to zero.
struct SoftmaxModel {
  ParameterSet params;
  std::size_t input_dim = 0;
};

SoftmaxModel make_softmax_model(std::size_t input_dim);
Detection predict_softmax(const SoftmaxModel& m, const Vector& features);
Checkpoint to_checkpoint(const SoftmaxModel& m);
SoftmaxModel softmax_from(const Checkpoint& c);

struct SoftmaxTraining {
  SoftmaxModel model;
  TrainingLog log;
};

/// Adam on cross entropy plus L2 (no dropout), early stopping on `dev`.
SoftmaxTraining train_softmax(const LabeledFeatures& train, const LabeledFeatures& dev,
                              const TrainingConfig& config);

ConfusionMatrix evaluate_softmax(const SoftmaxModel& m, const LabeledFeatures& data);

/// One trained-and-evaluated model. `runtime_s` covers training plus test
/// inference and is the only field that varies between identical runs.
struct ExperimentReport {
  std::string model;
  std::size_t p = 0;
  double accuracy_pct = 0.0;
  double runtime_s = 0.0;
  std::uint64_t seed = 0;
  TrainingConfig config;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  std::size_t test_size = 0;
  std::size_t epochs = 0;
  std::string timing_scope = "training+inference";

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Trains the baseline on `train` (early stopping on `dev`) and reports its
/// per-segment accuracy on `test`.
ExperimentReport softmax_baseline(const LabeledFeatures& train, const LabeledFeatures& dev,
                                  const LabeledFeatures& test, const TrainingConfig& config,
                                  SoftmaxTraining* trained = nullptr);

std::string to_json(const ExperimentReport& r);
ExperimentReport report_from_json(std::string_view json);
std::string config_to_json(const TrainingConfig& c);

/// Header `model,p,accuracy_pct,runtime_s,seed`, one row per report.
std::string reports_csv(const std::vector<ExperimentReport>& reports);

}  // namespace sfgnn
