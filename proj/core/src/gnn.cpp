#include "sfgnn/gnn.hpp"

#include "sfgnn/error.hpp"

#include <cmath>
#include <set>

namespace sfgnn {
namespace {

struct BoundGroup {
  const MessageGroup* group;
  std::size_t weight;
  std::size_t bias;
};

std::vector<BoundGroup> bind(const ParameterSet& params, const GraphPlan& plan) {
  std::vector<BoundGroup> out;
  for (const auto& [triple, group] : plan.by_triple) {
    const auto w = weight_name(triple);
    require(params.contains(w), ErrorCode::kConfiguration,
            "model has no parameters for label triple " + to_string(triple));
    out.push_back({&group, params.index_of(w), params.index_of(bias_name(triple))});
  }
  return out;
}

struct Tape {
  std::vector<Matrix> states;                   // x(0) .. x(T)
  std::vector<std::vector<Matrix>> activations;  // [t][group] tanh outputs
};

Matrix step_forward(const ParameterSet& params, const std::vector<BoundGroup>& groups,
                    const Matrix& x, std::vector<Matrix>* activations) {
  Matrix next = Matrix::Zero(x.rows(), x.cols());
  for (const auto& g : groups) {
    Matrix act = params[g.weight] * gather(x, g.group->sources);
    act.colwise() += params[g.bias].col(0);
    act = act.array().tanh().matrix();
    scatter_add(next, act, g.group->targets);
    if (activations) activations->push_back(std::move(act));
  }
  return next;
}

Matrix forward(const ParameterSet& params, const GraphPlan& plan, const Matrix& annotations,
               std::size_t steps, Tape* tape) {
  const Matrix& input = params.at("input");
  require(annotations.rows() == input.cols(), ErrorCode::kShape,
          "annotation dimension " + std::to_string(annotations.rows()) + " does not match model " +
              std::to_string(input.cols()));
  const auto groups = bind(params, plan);
  Matrix x = input * annotations;
  if (tape) tape->states.push_back(x);
  for (std::size_t t = 1; t <= steps; ++t) {
    std::vector<Matrix>* acts = nullptr;
    if (tape) acts = &tape->activations.emplace_back();
    x = step_forward(params, groups, x, acts);
    if (!x.allFinite()) throw DivergenceError(t, "non-finite node state at step " + std::to_string(t));
    if (tape) tape->states.push_back(x);
  }
  return x;
}

// Reverse pass from d(loss)/d(x(T)) to every propagation and input tensor.
void backward(const ParameterSet& params, const GraphPlan& plan, const Matrix& annotations,
              const Tape& tape, Matrix d_x, ParameterSet& grads) {
  const auto groups = bind(params, plan);
  for (std::size_t t = tape.activations.size(); t-- > 0;) {
    const Matrix& x_prev = tape.states[t];
    Matrix d_prev = Matrix::Zero(d_x.rows(), d_x.cols());
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto& g = groups[k];
      const Matrix& act = tape.activations[t][k];
      const Matrix d_pre =
          gather(d_x, g.group->targets).cwiseProduct((1.0 - act.array().square()).matrix());
      grads[g.weight].noalias() += d_pre * gather(x_prev, g.group->sources).transpose();
      grads[g.bias].col(0) += d_pre.rowwise().sum();
      scatter_add(d_prev, params[g.weight].transpose() * d_pre, g.group->sources);
    }
    d_x = std::move(d_prev);
  }
  grads.at("input").noalias() += d_x * annotations.transpose();
}

}  // namespace

std::string weight_name(const LabelTriple& t) { return "w[" + to_string(t) + "]"; }
std::string bias_name(const LabelTriple& t) { return "b[" + to_string(t) + "]"; }

void GnnModel::validate() const {
  require(hidden_size >= 1 && steps >= 1 && input_dim >= 1, ErrorCode::kParameter,
          "GNN needs hidden_size, steps and input_dim >= 1");
  require(params.contains("input") && params.at("input").rows() == static_cast<Eigen::Index>(hidden_size) &&
              params.at("input").cols() == static_cast<Eigen::Index>(input_dim),
          ErrorCode::kShape, "GNN input projection has the wrong shape");
  for (const auto& t : triples) {
    require(params.contains(weight_name(t)) && params.contains(bias_name(t)), ErrorCode::kConfiguration,
            "model has no parameters for label triple " + to_string(t));
  }
}

GnnModel make_gnn(const std::vector<LabelTriple>& triples, std::size_t input_dim,
                  const TrainingConfig& config) {
  config.validate();
  require(input_dim >= 1, ErrorCode::kParameter, "input dimension must be >= 1");
  GnnModel m;
  m.hidden_size = config.hidden_size;
  m.steps = config.steps;
  m.input_dim = input_dim;
  m.triples = triples;
  const auto h = config.hidden_size;
  auto& p = m.params;
  p.add("input", glorot_init(h, input_dim, derive_seed(config.seed, p.size())));
  for (const auto& t : triples) {
    p.add(weight_name(t), glorot_init(h, h, derive_seed(config.seed, p.size())));
    p.add(bias_name(t), Matrix::Zero(static_cast<Eigen::Index>(h), 1), false);
  }
  add_readout_parameters(p, h, h, config.seed);
  return m;
}

GnnModel make_gnn(const KnowledgeGraph& g, std::size_t input_dim, const TrainingConfig& config) {
  return make_gnn(label_triples(g), input_dim, config);
}

NodeStates init_states(const KnowledgeGraph& g, const GnnModel& m) {
  const Matrix& a = require_annotations(g);
  const Matrix& input = m.params.at("input");
  require(a.rows() == input.cols(), ErrorCode::kShape, "annotation dimension does not match model");
  return input * a;
}

NodeStates propagate_step(const KnowledgeGraph& g, const GnnModel& m, const NodeStates& states) {
  require(states.cols() == static_cast<Eigen::Index>(g.node_count()) &&
              states.rows() == static_cast<Eigen::Index>(m.hidden_size),
          ErrorCode::kShape, "node states do not cover the graph");
  const GraphPlan plan = compile_plan(g);
  return step_forward(m.params, bind(m.params, plan), states, nullptr);
}

NodeStates embed(const KnowledgeGraph& g, const GnnModel& m) {
  return forward(m.params, compile_plan(g), require_annotations(g), m.steps, nullptr);
}

Detection predict_single(const KnowledgeGraph& g, const GnnModel& m) {
  require(m.params.all_finite(), ErrorCode::kState, "GNN parameters are not finite");
  const NodeStates x = embed(g, m);
  const auto col = damaged_column(g);
  return decide(readout(m.params, x.col(col), NodeKind::kState));
}

SampleResult gnn_sample_loss(const GnnModel& m, const ParameterSet& params, const GraphPlan& plan,
                             const Matrix& annotations, Eigen::Index target, HealthState label,
                             ParameterSet* grads, Rng* dropout, double dropout_p) {
  Tape tape;
  const Matrix x = forward(params, plan, annotations, m.steps, grads ? &tape : nullptr);
  Vector mask;
  if (dropout) mask = dropout_mask(m.hidden_size, 1, dropout_p, *dropout, true).col(0);
  ReadoutTape rt;
  const Vector scores =
      readout_forward(params, x.col(target), NodeKind::kState, dropout ? &mask : nullptr, &rt);
  const auto ce = cross_entropy(scores, static_cast<std::size_t>(label));
  SampleResult r{ce.loss, decide(scores).state == label};
  if (grads) {
    const Vector d_state = readout_backward(params, *grads, rt, ce.grad);
    Matrix d_x = Matrix::Zero(x.rows(), x.cols());
    d_x.col(target) = d_state;
    backward(params, plan, annotations, tape, std::move(d_x), *grads);
  }
  return r;
}

GnnTraining train_gnn(const std::vector<LabeledGraph>& train, const std::vector<LabeledGraph>& dev,
                      const TrainingConfig& config) {
  require(!train.empty(), ErrorCode::kParameter, "training set is empty");
  std::set<LabelTriple> triples;
  for (const auto& s : train) {
    for (const auto& t : label_triples(s.graph)) triples.insert(t);
  }
  const auto dim = static_cast<std::size_t>(require_annotations(train.front().graph).rows());
  GnnTraining out{make_gnn({triples.begin(), triples.end()}, dim, config), {}};

  struct Prepared {
    GraphPlan plan;
    const Matrix* annotations;
    Eigen::Index target;
    HealthState label;
  };
  auto prepare = [](const std::vector<LabeledGraph>& set) {
    std::vector<Prepared> v;
    for (const auto& s : set) {
      v.push_back({compile_plan(s.graph), &require_annotations(s.graph), damaged_column(s.graph), s.label});
    }
    return v;
  };
  const auto tr = prepare(train);
  const auto dv = prepare(dev);
  const GnnModel& shape = out.model;
  auto objective = [&](const std::vector<Prepared>& set) {
    return [&set, &shape, &config](std::size_t i, const ParameterSet& params, ParameterSet* grads,
                                   Rng* dropout) {
      const auto& s = set[i];
      return gnn_sample_loss(shape, params, s.plan, *s.annotations, s.target, s.label, grads,
                             dropout, config.dropout_p);
    };
  };
  out.log = fit(out.model.params, tr.size(), dv.size(), objective(tr), objective(dv), config);
  return out;
}

}  // namespace sfgnn
