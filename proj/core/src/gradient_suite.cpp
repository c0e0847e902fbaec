#include "sfgnn/gradient_suite.hpp"

#include "sfgnn/error.hpp"
#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/sequence.hpp"
#include "sfgnn/sparse_filter.hpp"

#include <chrono>

namespace sfgnn {
namespace {

Matrix random_normal(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

// Zero-initialized tensors would make their own gradient checks vacuous.
void jitter_zero_tensors(ParameterSet& params, Rng& rng) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].isZero(0.0)) params[i] = random_normal(params[i].rows(), params[i].cols(), 0.3, rng);
  }
}

KnowledgeGraph annotated_small_graph(std::size_t dim, Rng& rng) {
  const KnowledgeGraph g = small_fault_graph();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(g.node_count()));
  a.col(static_cast<Eigen::Index>(g.index_of(g.find("AN3").id))) =
      random_normal(static_cast<Eigen::Index>(dim), 1, 1.0, rng);
  a.col(static_cast<Eigen::Index>(g.index_of(g.find("Ring Gear").id))) =
      random_normal(static_cast<Eigen::Index>(dim), 1, 0.5, rng);
  return g.with_annotations(a);
}

TrainingConfig small_config(const GradSuiteOptions& o) {
  TrainingConfig c;
  c.hidden_size = o.hidden;
  c.steps = o.steps;
  c.l2_lambda = o.l2_lambda;
  c.seed = o.seed;
  return c;
}

using LossFn = std::function<double(const ParameterSet&, ParameterSet*)>;

GradSuiteResult run_check(std::string name, const ParameterSet& params, const LossFn& loss,
                          double l2_lambda, const GradSuiteOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  auto total = [&](const ParameterSet& p, ParameterSet* grads) {
    double value = loss(p, grads);
    if (l2_lambda > 0.0) {
      const auto penalty = l2_penalty(p, l2_lambda);
      value += penalty.loss;
      if (grads) grads->axpy(1.0, penalty.grads);
    }
    return value;
  };
  ParameterSet analytic = params.zeros_like();
  total(params, &analytic);
  for (std::size_t i = 0; i < analytic.size(); ++i) analytic[i] *= o.perturb;
  GradSuiteResult r;
  r.name = std::move(name);
  r.check = grad_check([&](const ParameterSet& p) { return total(p, nullptr); }, params, analytic, o.step);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

KnowledgeGraph small_fault_graph() {
  std::vector<Node> nodes = {
      {0, "Gearbox", NodeKind::kTerminology},     {1, "Ring Gear", NodeKind::kTerminology},
      {2, "AN3", NodeKind::kData},                {3, std::string(ontology::kHealthy), NodeKind::kState},
      {4, std::string(ontology::kDamaged), NodeKind::kState}, {5, std::string(ontology::kSensorType), NodeKind::kMeta},
  };
  std::vector<Edge> edges = {
      {0, 1, EdgeKind::kHas},    {1, 2, EdgeKind::kHas},    {2, 5, EdgeKind::kIsA},
      {2, 3, EdgeKind::kCauses}, {2, 4, EdgeKind::kCauses},
  };
  return KnowledgeGraph(std::move(nodes), std::move(edges));
}

GradSuiteResult check_sparse_filter_gradient(const GradSuiteOptions& o) {
  Rng rng(o.seed, streams::kSampling);
  const Matrix x = random_normal(static_cast<Eigen::Index>(o.sf_inputs),
                                 static_cast<Eigen::Index>(o.sf_examples), 1.0, rng);
  ParameterSet params;
  params.add("weights", glorot_init(o.sf_inputs, o.sf_features, o.seed));
  auto loss = [&x](const ParameterSet& p, ParameterSet* grads) {
    SparseFilterModel m;
    m.weights = p[0];
    if (!grads) return objective(m, x);
    auto og = objective_and_grad(m, x);
    (*grads)[0] += og.grad;
    return og.value;
  };
  return run_check("sf", params, loss, 0.0, o);
}

GradSuiteResult check_gnn_gradient(const GradSuiteOptions& o) {
  Rng rng(o.seed, streams::kSampling);
  const KnowledgeGraph g = annotated_small_graph(o.annotation_dim, rng);
  GnnModel m = make_gnn(g, o.annotation_dim, small_config(o));
  jitter_zero_tensors(m.params, rng);
  const GraphPlan plan = compile_plan(g);
  const auto target = damaged_column(g);
  auto loss = [&](const ParameterSet& p, ParameterSet* grads) {
    return gnn_sample_loss(m, p, plan, *g.annotations(), target, HealthState::kDamaged, grads, nullptr, 0.0).loss;
  };
  return run_check("gnn", m.params, loss, o.l2_lambda, o);
}

GradSuiteResult check_ggnn_gradient(const GradSuiteOptions& o) {
  Rng rng(o.seed, streams::kSampling);
  const KnowledgeGraph g = annotated_small_graph(o.annotation_dim, rng);
  GatedGnnModel m = make_gated_gnn(o.annotation_dim, small_config(o));
  jitter_zero_tensors(m.params, rng);
  const GraphPlan plan = compile_plan(g);
  const auto target = damaged_column(g);
  auto loss = [&](const ParameterSet& p, ParameterSet* grads) {
    return ggnn_sample_loss(m, p, plan, *g.annotations(), target, HealthState::kDamaged, grads, nullptr, 0.0).loss;
  };
  return run_check("ggnn", m.params, loss, o.l2_lambda, o);
}

GradSuiteResult check_ggsnn_gradient(const GradSuiteOptions& o) {
  Rng rng(o.seed, streams::kSampling);
  const KnowledgeGraph g = annotated_small_graph(o.annotation_dim, rng);
  SequenceModel m = make_sequence_model(o.annotation_dim, g.node_count(), small_config(o));
  jitter_zero_tensors(m.params, rng);
  const GraphPlan plan = compile_plan(g);
  const std::vector<Triple> target = {{0, EdgeKind::kHas, 1}, {1, EdgeKind::kHas, 2}};
  check_sequence(g, target);
  auto loss = [&](const ParameterSet& p, ParameterSet* grads) {
    return ggsnn_sample_loss(m, p, plan, g, target, grads).loss;
  };
  return run_check("ggsnn", m.params, loss, o.l2_lambda, o);
}

std::vector<GradSuiteResult> run_gradient_suite(const std::vector<std::string>& names,
                                                const GradSuiteOptions& o) {
  const std::vector<std::string> all = {"sf", "gnn", "ggnn", "ggsnn"};
  std::vector<GradSuiteResult> out;
  for (const auto& n : names.empty() ? all : names) {
    if (n == "sf") {
      out.push_back(check_sparse_filter_gradient(o));
    } else if (n == "gnn") {
      out.push_back(check_gnn_gradient(o));
    } else if (n == "ggnn") {
      out.push_back(check_ggnn_gradient(o));
    } else if (n == "ggsnn") {
      out.push_back(check_ggsnn_gradient(o));
    } else {
      raise(ErrorCode::kParameter, "unknown gradient check '" + n + "' (expected sf, gnn, ggnn or ggsnn)");
    }
  }
  return out;
}

}  // namespace sfgnn
