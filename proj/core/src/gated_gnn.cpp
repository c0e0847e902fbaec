#include "sfgnn/gated_gnn.hpp"

#include "sfgnn/error.hpp"

#include <array>

namespace sfgnn {
namespace {

struct GatedIndex {
  std::size_t input;
  std::array<std::size_t, kRelationCount> agg;
  std::array<std::size_t, kRelationCount> agg_bias;
  std::size_t wz, uz, bz, wr, ur, br, wc, uc, bc;
};

GatedIndex bind(const ParameterSet& p, std::string_view prefix) {
  const std::string pre(prefix);
  auto at = [&](const std::string& name) {
    require(p.contains(pre + name), ErrorCode::kConfiguration,
            "gated model is missing tensor '" + pre + name + "'");
    return p.index_of(pre + name);
  };
  GatedIndex ix{};
  ix.input = at("input");
  for (auto kind : kEdgeKinds) {
    for (auto dir : {Direction::kIn, Direction::kOut}) {
      ix.agg[relation_index(kind, dir)] = at(aggregation_name(kind, dir));
      ix.agg_bias[relation_index(kind, dir)] = at(aggregation_bias_name(kind, dir));
    }
  }
  ix.wz = at("gru.wz");
  ix.uz = at("gru.uz");
  ix.bz = at("gru.bz");
  ix.wr = at("gru.wr");
  ix.ur = at("gru.ur");
  ix.br = at("gru.br");
  ix.wc = at("gru.wc");
  ix.uc = at("gru.uc");
  ix.bc = at("gru.bc");
  return ix;
}

Eigen::ArrayXXd logistic(const Matrix& x) { return 1.0 / (1.0 + (-x.array()).exp()); }

}  // namespace

Vector gru_update(const GruParameters& p, const Vector& h_prev, const Vector& a) {
  const auto h = p.bz.size();
  require(h_prev.size() == h && a.size() == h, ErrorCode::kShape,
          "gru_update expects vectors of length " + std::to_string(h));
  const Vector z = logistic(p.wz * a + p.uz * h_prev + p.bz).matrix();
  const Vector r = logistic(p.wr * a + p.ur * h_prev + p.br).matrix();
  const Vector c = (p.wc * a + p.uc * r.cwiseProduct(h_prev) + p.bc).array().tanh().matrix();
  return (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(c);
}

std::string aggregation_name(EdgeKind kind, Direction direction) {
  return "agg[" + std::string(to_string(kind)) + ":" + std::string(to_string(direction)) + "]";
}

std::string aggregation_bias_name(EdgeKind kind, Direction direction) {
  return "aggb[" + std::string(to_string(kind)) + ":" + std::string(to_string(direction)) + "]";
}

void add_gated_parameters(ParameterSet& params, std::string_view prefix, std::size_t hidden,
                          std::size_t input_dim, std::uint64_t seed) {
  const std::string pre(prefix);
  const auto h = static_cast<Eigen::Index>(hidden);
  auto weight = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    params.add(pre + name, glorot_init(rows, cols, derive_seed(seed, params.size())));
  };
  auto bias = [&](const std::string& name) { params.add(pre + name, Matrix::Zero(h, 1), false); };
  weight("input", hidden, input_dim);
  for (auto kind : kEdgeKinds) {
    for (auto dir : {Direction::kIn, Direction::kOut}) {
      weight(aggregation_name(kind, dir), hidden, hidden);
      bias(aggregation_bias_name(kind, dir));
    }
  }
  for (const char* gate : {"z", "r", "c"}) {
    weight(std::string("gru.w") + gate, hidden, hidden);
    weight(std::string("gru.u") + gate, hidden, hidden);
    bias(std::string("gru.b") + gate);
  }
}

GruParameters gru_parameters(const ParameterSet& params, std::string_view prefix) {
  const std::string pre(prefix);
  GruParameters p;
  p.wz = params.at(pre + "gru.wz");
  p.uz = params.at(pre + "gru.uz");
  p.bz = params.at(pre + "gru.bz").col(0);
  p.wr = params.at(pre + "gru.wr");
  p.ur = params.at(pre + "gru.ur");
  p.br = params.at(pre + "gru.br").col(0);
  p.wc = params.at(pre + "gru.wc");
  p.uc = params.at(pre + "gru.uc");
  p.bc = params.at(pre + "gru.bc").col(0);
  return p;
}

Matrix gated_forward(const ParameterSet& params, std::string_view prefix, const GraphPlan& plan,
                     const Matrix& inputs, std::size_t steps, GatedTape* tape) {
  const GatedIndex ix = bind(params, prefix);
  require(inputs.rows() == params[ix.input].cols(), ErrorCode::kShape,
          "node input dimension " + std::to_string(inputs.rows()) + " does not match model " +
              std::to_string(params[ix.input].cols()));
  require(inputs.cols() == static_cast<Eigen::Index>(plan.node_count), ErrorCode::kShape,
          "node inputs do not cover the graph");
  Matrix h = params[ix.input] * inputs;
  if (tape) {
    *tape = {};
    tape->inputs = inputs;
    tape->states.push_back(h);
  }
  for (std::size_t t = 1; t <= steps; ++t) {
    Matrix agg = Matrix::Zero(h.rows(), h.cols());
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      const auto& group = plan.by_relation[r];
      if (group.size() == 0) continue;
      Matrix msg = params[ix.agg[r]] * gather(h, group.sources);
      msg.colwise() += params[ix.agg_bias[r]].col(0);
      scatter_add(agg, msg, group.targets);
    }
    Matrix z = params[ix.wz] * agg + params[ix.uz] * h;
    z.colwise() += params[ix.bz].col(0);
    z = logistic(z).matrix();
    Matrix r = params[ix.wr] * agg + params[ix.ur] * h;
    r.colwise() += params[ix.br].col(0);
    r = logistic(r).matrix();
    Matrix c = params[ix.wc] * agg + params[ix.uc] * r.cwiseProduct(h);
    c.colwise() += params[ix.bc].col(0);
    c = c.array().tanh().matrix();
    Matrix next = ((1.0 - z.array()) * h.array() + z.array() * c.array()).matrix();
    if (!next.allFinite()) {
      throw DivergenceError(t, "non-finite node state at step " + std::to_string(t));
    }
    if (tape) {
      tape->aggregates.push_back(std::move(agg));
      tape->update.push_back(std::move(z));
      tape->reset.push_back(std::move(r));
      tape->candidate.push_back(std::move(c));
      tape->states.push_back(next);
    }
    h = std::move(next);
  }
  return h;
}

Matrix gated_backward(const ParameterSet& params, std::string_view prefix, const GraphPlan& plan,
                      const GatedTape& tape, Matrix d_h, ParameterSet& grads) {
  const GatedIndex ix = bind(params, prefix);
  for (std::size_t t = tape.update.size(); t-- > 0;) {
    const Matrix& h = tape.states[t];
    const Matrix& agg = tape.aggregates[t];
    const Matrix& z = tape.update[t];
    const Matrix& r = tape.reset[t];
    const Matrix& c = tape.candidate[t];

    const Matrix d_z = d_h.cwiseProduct(c - h);
    const Matrix d_c = d_h.cwiseProduct(z);
    Matrix d_prev = d_h.cwiseProduct((1.0 - z.array()).matrix());

    const Matrix d_c_pre = d_c.cwiseProduct((1.0 - c.array().square()).matrix());
    const Matrix rh = r.cwiseProduct(h);
    grads[ix.wc].noalias() += d_c_pre * agg.transpose();
    grads[ix.uc].noalias() += d_c_pre * rh.transpose();
    grads[ix.bc].col(0) += d_c_pre.rowwise().sum();
    Matrix d_agg = params[ix.wc].transpose() * d_c_pre;
    const Matrix d_rh = params[ix.uc].transpose() * d_c_pre;
    const Matrix d_r = d_rh.cwiseProduct(h);
    d_prev += d_rh.cwiseProduct(r);

    const Matrix d_z_pre = d_z.cwiseProduct((z.array() * (1.0 - z.array())).matrix());
    grads[ix.wz].noalias() += d_z_pre * agg.transpose();
    grads[ix.uz].noalias() += d_z_pre * h.transpose();
    grads[ix.bz].col(0) += d_z_pre.rowwise().sum();
    d_agg.noalias() += params[ix.wz].transpose() * d_z_pre;
    d_prev.noalias() += params[ix.uz].transpose() * d_z_pre;

    const Matrix d_r_pre = d_r.cwiseProduct((r.array() * (1.0 - r.array())).matrix());
    grads[ix.wr].noalias() += d_r_pre * agg.transpose();
    grads[ix.ur].noalias() += d_r_pre * h.transpose();
    grads[ix.br].col(0) += d_r_pre.rowwise().sum();
    d_agg.noalias() += params[ix.wr].transpose() * d_r_pre;
    d_prev.noalias() += params[ix.ur].transpose() * d_r_pre;

    for (std::size_t rel = 0; rel < kRelationCount; ++rel) {
      const auto& group = plan.by_relation[rel];
      if (group.size() == 0) continue;
      const Matrix g = gather(d_agg, group.targets);
      grads[ix.agg[rel]].noalias() += g * gather(h, group.sources).transpose();
      grads[ix.agg_bias[rel]].col(0) += g.rowwise().sum();
      scatter_add(d_prev, params[ix.agg[rel]].transpose() * g, group.sources);
    }
    d_h = std::move(d_prev);
  }
  grads[ix.input].noalias() += d_h * tape.inputs.transpose();
  return params[ix.input].transpose() * d_h;
}

void GatedGnnModel::validate() const {
  require(hidden_size >= 1 && steps >= 1 && input_dim >= 1, ErrorCode::kParameter,
          "GG-NN needs hidden_size, steps and input_dim >= 1");
  const Matrix& input = params.at("input");
  require(input.rows() == static_cast<Eigen::Index>(hidden_size) &&
              input.cols() == static_cast<Eigen::Index>(input_dim),
          ErrorCode::kShape, "GG-NN input projection has the wrong shape");
  bind(params, "");
}

GatedGnnModel make_gated_gnn(std::size_t input_dim, const TrainingConfig& config) {
  config.validate();
  require(input_dim >= 1, ErrorCode::kParameter, "input dimension must be >= 1");
  GatedGnnModel m;
  m.hidden_size = config.hidden_size;
  m.steps = config.steps;
  m.input_dim = input_dim;
  add_gated_parameters(m.params, "", config.hidden_size, input_dim, config.seed);
  add_readout_parameters(m.params, config.hidden_size, config.hidden_size, config.seed);
  return m;
}

NodeStates ggnn_propagate(const KnowledgeGraph& g, const GatedGnnModel& m, const Matrix& annotations) {
  return gated_forward(m.params, "", compile_plan(g), annotations, m.steps, nullptr);
}

Detection predict_single_gated(const KnowledgeGraph& g, const GatedGnnModel& m) {
  require(m.params.all_finite(), ErrorCode::kState, "GG-NN parameters are not finite");
  const NodeStates h = ggnn_propagate(g, m, require_annotations(g));
  return decide(readout(m.params, h.col(damaged_column(g)), NodeKind::kState));
}

SampleResult ggnn_sample_loss(const GatedGnnModel& m, const ParameterSet& params,
                              const GraphPlan& plan, const Matrix& annotations,
                              Eigen::Index target, HealthState label, ParameterSet* grads,
                              Rng* dropout, double dropout_p) {
  GatedTape tape;
  const Matrix h = gated_forward(params, "", plan, annotations, m.steps, grads ? &tape : nullptr);
  Vector mask;
  if (dropout) mask = dropout_mask(m.hidden_size, 1, dropout_p, *dropout, true).col(0);
  ReadoutTape rt;
  const Vector scores =
      readout_forward(params, h.col(target), NodeKind::kState, dropout ? &mask : nullptr, &rt);
  const auto ce = cross_entropy(scores, static_cast<std::size_t>(label));
  SampleResult r{ce.loss, decide(scores).state == label};
  if (grads) {
    Matrix d_h = Matrix::Zero(h.rows(), h.cols());
    d_h.col(target) = readout_backward(params, *grads, rt, ce.grad);
    gated_backward(params, "", plan, tape, std::move(d_h), *grads);
  }
  return r;
}

GatedTraining train_gated_gnn(const std::vector<LabeledGraph>& train,
                              const std::vector<LabeledGraph>& dev, const TrainingConfig& config) {
  require(!train.empty(), ErrorCode::kParameter, "training set is empty");
  const auto dim = static_cast<std::size_t>(require_annotations(train.front().graph).rows());
  GatedTraining out{make_gated_gnn(dim, config), {}};

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
  const GatedGnnModel& shape = out.model;
  auto objective = [&](const std::vector<Prepared>& set) {
    return [&set, &shape, &config](std::size_t i, const ParameterSet& params, ParameterSet* grads,
                                   Rng* dropout) {
      const auto& s = set[i];
      return ggnn_sample_loss(shape, params, s.plan, *s.annotations, s.target, s.label, grads,
                              dropout, config.dropout_p);
    };
  };
  out.log = fit(out.model.params, tr.size(), dv.size(), objective(tr), objective(dv), config);
  return out;
}

}  // namespace sfgnn
