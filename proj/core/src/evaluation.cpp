#include "sfgnn/evaluation.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <sstream>

namespace sfgnn {
namespace {

using Json = nlohmann::ordered_json;

Json config_json(const TrainingConfig& c) {
  return Json{{"hidden_size", c.hidden_size}, {"lr", c.lr},
              {"dropout", c.dropout_p},       {"l2", c.l2_lambda},
              {"max_epochs", c.max_epochs},   {"patience", c.patience},
              {"steps", c.steps},             {"batch_size", c.batch_size},
              {"seed", c.seed}};
}

TrainingConfig config_from(const Json& j) {
  TrainingConfig c;
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.lr = j.at("lr").get<double>();
  c.dropout_p = j.at("dropout").get<double>();
  c.l2_lambda = j.at("l2").get<double>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.steps = j.at("steps").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

SampleResult softmax_loss(const ParameterSet& params, const Vector& x, HealthState label,
                          ParameterSet* grads) {
  const Matrix& w = params[0];
  const Matrix& b = params[1];
  const Vector scores = w * x + b.col(0);
  const auto ce = cross_entropy(scores, static_cast<std::size_t>(label));
  if (grads) {
    (*grads)[0].noalias() += ce.grad * x.transpose();
    (*grads)[1].col(0) += ce.grad;
  }
  return {ce.loss, decide(scores).state == label};
}

}  // namespace

void ConfusionMatrix::add(HealthState truth, HealthState predicted) noexcept {
  const bool pos_truth = truth == HealthState::kDamaged;
  const bool pos_pred = predicted == HealthState::kDamaged;
  if (pos_truth && pos_pred) ++tp;
  if (!pos_truth && !pos_pred) ++tn;
  if (!pos_truth && pos_pred) ++fp;
  if (pos_truth && !pos_pred) ++fn;
}

double accuracy(const ConfusionMatrix& cm) {
  require(cm.total() > 0, ErrorCode::kParameter, "accuracy of an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double sequence_accuracy(const std::vector<Triple>& predicted, const std::vector<Triple>& target) {
  require(!target.empty(), ErrorCode::kParameter, "sequence accuracy needs a non-empty target");
  const std::size_t n = std::min(predicted.size(), target.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += predicted[i] == target[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(std::max(predicted.size(), target.size()));
}

SoftmaxModel make_softmax_model(std::size_t input_dim) {
  require(input_dim >= 1, ErrorCode::kParameter, "softmax input dimension must be >= 1");
  SoftmaxModel m;
  m.input_dim = input_dim;
  m.params.add("w", Matrix::Zero(2, static_cast<Eigen::Index>(input_dim)));
  m.params.add("b", Matrix::Zero(2, 1), false);
  return m;
}

Detection predict_softmax(const SoftmaxModel& m, const Vector& features) {
  require(features.size() == static_cast<Eigen::Index>(m.input_dim), ErrorCode::kShape,
          "softmax expects " + std::to_string(m.input_dim) + " features, got " +
              std::to_string(features.size()));
  return decide(m.params.at("w") * features + m.params.at("b").col(0));
}

Checkpoint to_checkpoint(const SoftmaxModel& m) {
  Checkpoint c;
  c.kind = ModelKind::kSoftmax;
  c.input_dim = m.input_dim;
  c.params = m.params;
  return c;
}

SoftmaxModel softmax_from(const Checkpoint& c) {
  require_kind(c, ModelKind::kSoftmax);
  SoftmaxModel m{c.params, c.input_dim};
  require(m.params.contains("w") && m.params.at("w").rows() == 2 &&
              m.params.at("w").cols() == static_cast<Eigen::Index>(c.input_dim) && m.params.contains("b"),
          ErrorCode::kShape, "softmax checkpoint has the wrong tensors");
  return m;
}

SoftmaxTraining train_softmax(const LabeledFeatures& train, const LabeledFeatures& dev,
                              const TrainingConfig& config) {
  require(train.size() > 0 && train.labels.size() == train.size(), ErrorCode::kParameter,
          "softmax training set is empty or unlabeled");
  const auto p = static_cast<std::size_t>(train.features.front().size());
  for (const auto* set : {&train, &dev}) {
    for (const auto& f : set->features) {
      require(f.size() == static_cast<Eigen::Index>(p), ErrorCode::kShape,
              "feature vectors must share length " + std::to_string(p));
    }
  }
  SoftmaxTraining out{make_softmax_model(p), {}};
  auto objective = [](const LabeledFeatures& set) {
    return [&set](std::size_t i, const ParameterSet& params, ParameterSet* grads, Rng*) {
      return softmax_loss(params, set.features[i], set.labels[i], grads);
    };
  };
  out.log = fit(out.model.params, train.size(), dev.size(), objective(train), objective(dev), config);
  return out;
}

ConfusionMatrix evaluate_softmax(const SoftmaxModel& m, const LabeledFeatures& data) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < data.size(); ++i) {
    cm.add(data.labels[i], predict_softmax(m, data.features[i]).state);
  }
  return cm;
}

ExperimentReport softmax_baseline(const LabeledFeatures& train, const LabeledFeatures& dev,
                                  const LabeledFeatures& test, const TrainingConfig& config,
                                  SoftmaxTraining* trained) {
  const auto t0 = std::chrono::steady_clock::now();
  SoftmaxTraining t = train_softmax(train, dev, config);
  const ConfusionMatrix cm = evaluate_softmax(t.model, test);
  const auto t1 = std::chrono::steady_clock::now();

  ExperimentReport r;
  r.model = "sf-softmax";
  r.p = t.model.input_dim;
  r.accuracy_pct = 100.0 * accuracy(cm);
  r.runtime_s = std::chrono::duration<double>(t1 - t0).count();
  r.seed = config.seed;
  r.config = config;
  r.train_size = train.size();
  r.dev_size = dev.size();
  r.test_size = test.size();
  r.epochs = t.log.epochs.size();
  if (trained) *trained = std::move(t);
  return r;
}

std::string config_to_json(const TrainingConfig& c) { return config_json(c).dump(2); }

std::string to_json(const ExperimentReport& r) {
  Json j{{"model", r.model},
         {"p", r.p},
         {"accuracy_pct", r.accuracy_pct},
         {"runtime_s", r.runtime_s},
         {"runtime_nondeterministic", true},
         {"timing_scope", r.timing_scope},
         {"seed", r.seed},
         {"config", config_json(r.config)},
         {"split_sizes", {{"train", r.train_size}, {"dev", r.dev_size}, {"test", r.test_size}}},
         {"epochs", r.epochs}};
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    ExperimentReport r;
    r.model = j.at("model").get<std::string>();
    r.p = j.at("p").get<std::size_t>();
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
    r.runtime_s = j.at("runtime_s").get<double>();
    r.timing_scope = j.at("timing_scope").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = config_from(j.at("config"));
    r.train_size = j.at("split_sizes").at("train").get<std::size_t>();
    r.dev_size = j.at("split_sizes").at("dev").get<std::size_t>();
    r.test_size = j.at("split_sizes").at("test").get<std::size_t>();
    r.epochs = j.at("epochs").get<std::size_t>();
    require(r.accuracy_pct >= 0.0 && r.accuracy_pct <= 100.0, ErrorCode::kFormat,
            "report accuracy outside [0, 100]");
    return r;
  } catch (const Json::exception& e) {
    raise(ErrorCode::kFormat, std::string("invalid experiment report: ") + e.what());
  }
}

std::string reports_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "model,p,accuracy_pct,runtime_s,seed\n";
  for (const auto& r : reports) {
    out << r.model << ',' << r.p << ',' << io::format_double(r.accuracy_pct) << ','
        << io::format_double(r.runtime_s) << ',' << r.seed << '\n';
  }
  return out.str();
}

}  // namespace sfgnn
