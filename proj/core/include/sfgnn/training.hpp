#pragma once

#include "sfgnn/numerics.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/rng.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace sfgnn {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean data loss plus L2 penalty, averaged over batches
  double dev_loss = 0.0;    // mean data loss without dropout or penalty
  double dev_accuracy = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 = initialization
  bool stopped_early = false;
};

/// Header `epoch,train_loss,dev_loss,dev_accuracy` and one row per epoch.
std::string to_csv(const TrainingLog& log);

struct SampleResult {
  double loss = 0.0;
  bool correct = false;
};

/// Loss of one example. When `grads` is non-null the gradient of the loss is
/// accumulated into it. `dropout` is null at evaluation time.
using SampleObjective = std::function<SampleResult(std::size_t index, const ParameterSet& params,
                                                   ParameterSet* grads, Rng* dropout)>;

/// Minibatch Adam on the mean sample loss plus the L2 penalty. Each epoch
/// visits the training examples in a seeded random order; dropout draws come
/// from a stream keyed on (epoch, example), so results do not depend on the
/// batch layout. After every epoch the dev loss is recorded and early_stop
/// consulted; the returned parameters are those with the lowest dev loss
/// (training loss when `n_dev` is 0). Throws DivergenceError naming the epoch
/// when the loss or a parameter becomes non-finite.
TrainingLog fit(ParameterSet& params, std::size_t n_train, std::size_t n_dev,
                const SampleObjective& train, const SampleObjective& dev,
                const TrainingConfig& config);

struct MeanResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean loss and accuracy over `n` examples without dropout.
MeanResult evaluate_mean(const ParameterSet& params, std::size_t n,
                         const SampleObjective& objective);

}  // namespace sfgnn
