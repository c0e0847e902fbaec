#include "sfgnn/training.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sfgnn {

std::string to_csv(const TrainingLog& log) {
  std::ostringstream out;
  out << "epoch,train_loss,dev_loss,dev_accuracy\n";
  for (const auto& r : log.epochs) {
    out << r.epoch << ',' << io::format_double(r.train_loss) << ',' << io::format_double(r.dev_loss)
        << ',' << io::format_double(r.dev_accuracy) << '\n';
  }
  return out.str();
}

MeanResult evaluate_mean(const ParameterSet& params, std::size_t n,
                         const SampleObjective& objective) {
  MeanResult out;
  if (n == 0) return out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = objective(i, params, nullptr, nullptr);
    out.loss += r.loss;
    correct += r.correct ? 1 : 0;
  }
  out.loss /= static_cast<double>(n);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return out;
}

TrainingLog fit(ParameterSet& params, std::size_t n_train, std::size_t n_dev,
                const SampleObjective& train, const SampleObjective& dev,
                const TrainingConfig& config) {
  config.validate();
  require(n_train > 0, ErrorCode::kParameter, "training set is empty");

  TrainingLog log;
  AdamState adam = AdamState::for_parameters(params, AdamConfig{config.lr});
  ParameterSet grads = params.zeros_like();
  ParameterSet best = params;
  double best_loss = 0.0;
  std::vector<double> history;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng order_rng(derive_seed(config.seed, epoch), streams::kShuffle);
    const auto order = permutation(n_train, order_rng);
    const Rng dropout_base(derive_seed(config.seed, epoch), streams::kDropout);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t stop = std::min(n_train, start + config.batch_size);
      grads.set_zero();
      double loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        Rng dropout = dropout_base.derive(order[k]);
        loss += train(order[k], params, &grads, &dropout).loss;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      loss *= scale;
      for (std::size_t i = 0; i < grads.size(); ++i) grads[i] *= scale;
      if (config.l2_lambda > 0.0) {
        const auto penalty = l2_penalty(params, config.l2_lambda);
        loss += penalty.loss;
        grads.axpy(1.0, penalty.grads);
      }
      if (!std::isfinite(loss) || !grads.all_finite()) {
        throw DivergenceError(epoch, "training loss diverged at epoch " + std::to_string(epoch));
      }
      adam_step(adam, params, grads);
      epoch_loss += loss;
      ++batches;
    }
    if (!params.all_finite()) {
      throw DivergenceError(epoch, "parameters became non-finite at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(batches);
    const auto eval = n_dev > 0 ? evaluate_mean(params, n_dev, dev)
                                : evaluate_mean(params, n_train, train);
    rec.dev_loss = eval.loss;
    rec.dev_accuracy = eval.accuracy;
    if (!std::isfinite(rec.dev_loss)) {
      throw DivergenceError(epoch, "dev loss diverged at epoch " + std::to_string(epoch));
    }
    log.epochs.push_back(rec);
    history.push_back(rec.dev_loss);
    if (log.best_epoch == 0 || rec.dev_loss < best_loss) {
      best_loss = rec.dev_loss;
      best = params;
      log.best_epoch = epoch;
    }
    if (early_stop(history, config.patience) == StopDecision::kStop) {
      log.stopped_early = true;
      break;
    }
  }
  if (log.best_epoch > 0) params = std::move(best);
  return log;
}

}  // namespace sfgnn
