#pragma once

#include "sfgnn/gnn.hpp"
#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/propagation.hpp"
#include "sfgnn/readout.hpp"
#include "sfgnn/training.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

struct GruParameters {
  Matrix wz, uz, wr, ur, wc, uc;  // H x H
  Vector bz, br, bc;              // H
};

/// z = sigma(Wz a + Uz h + bz), r = sigma(Wr a + Ur h + br),
/// c = tanh(Wc a + Uc (r . h) + bc), h' = (1 - z) . h + z . c.
Vector gru_update(const GruParameters& p, const Vector& h_prev, const Vector& a);

/// Name of the aggregation tensors for one (edge kind, direction) pair, e.g.
/// `agg[has:in]` and `aggb[has:in]`.
std::string aggregation_name(EdgeKind kind, Direction direction);
std::string aggregation_bias_name(EdgeKind kind, Direction direction);

/// Adds, each name prefixed by `prefix`: `input` (H x input_dim), the eight
/// aggregation matrices and biases, and `gru.{wz,uz,bz,wr,ur,br,wc,uc,bc}`.
void add_gated_parameters(ParameterSet& params, std::string_view prefix, std::size_t hidden,
                          std::size_t input_dim, std::uint64_t seed);

GruParameters gru_parameters(const ParameterSet& params, std::string_view prefix = "");

/// Intermediates of one gated propagation, kept for the reverse pass.
struct GatedTape {
  Matrix inputs;              // D_in x V
  std::vector<Matrix> states;  // h(0) .. h(K)
  std::vector<Matrix> aggregates, update, reset, candidate;  // per step
};

/// h(0) = input * inputs; then K steps of a_v = sum over adjacent (v', k, dir)
/// of A[k,dir] h_v' + b[k,dir] followed by a GRU update of every node.
/// Throws DivergenceError with the step on a non-finite state.
Matrix gated_forward(const ParameterSet& params, std::string_view prefix, const GraphPlan& plan,
                     const Matrix& inputs, std::size_t steps, GatedTape* tape);

/// Accumulates gradients of every tensor under `prefix` given
/// d(loss)/d(h(K)); returns d(loss)/d(inputs).
Matrix gated_backward(const ParameterSet& params, std::string_view prefix, const GraphPlan& plan,
                      const GatedTape& tape, Matrix d_states, ParameterSet& grads);

/// GG-NN for single detection output: gated propagation plus the readout of
/// gnn.hpp at the Damaged node.
struct GatedGnnModel {
  ParameterSet params;
  std::size_t hidden_size = 0;
  std::size_t steps = 0;
  std::size_t input_dim = 0;

  void validate() const;
};

GatedGnnModel make_gated_gnn(std::size_t input_dim, const TrainingConfig& config);

NodeStates ggnn_propagate(const KnowledgeGraph& g, const GatedGnnModel& m, const Matrix& annotations);

Detection predict_single_gated(const KnowledgeGraph& g, const GatedGnnModel& m);

/// As gnn_sample_loss, for the gated model.
SampleResult ggnn_sample_loss(const GatedGnnModel& m, const ParameterSet& params,
                              const GraphPlan& plan, const Matrix& annotations,
                              Eigen::Index target, HealthState label, ParameterSet* grads,
                              Rng* dropout, double dropout_p);

struct GatedTraining {
  GatedGnnModel model;
  TrainingLog log;
};

GatedTraining train_gated_gnn(const std::vector<LabeledGraph>& train,
                              const std::vector<LabeledGraph>& dev, const TrainingConfig& config);

}  // namespace sfgnn
