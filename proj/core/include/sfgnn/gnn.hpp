#pragma once

#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/propagation.hpp"
#include "sfgnn/readout.hpp"
#include "sfgnn/signal_source.hpp"
#include "sfgnn/training.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace sfgnn {

/// H x V matrix; column i is the state of nodes()[i].
using NodeStates = Matrix;

/// Basic GNN. Tensors in `params`:
///   input             H x D   annotation -> initial state
///   w[<triple>]       H x H   one per label triple
///   b[<triple>]       H x 1
///   readout.*                 see readout.hpp
struct GnnModel {
  ParameterSet params;
  std::vector<LabelTriple> triples;
  std::size_t hidden_size = 0;
  std::size_t steps = 0;
  std::size_t input_dim = 0;

  void validate() const;
};

std::string weight_name(const LabelTriple& t);
std::string bias_name(const LabelTriple& t);

/// Glorot weights and zero biases for every triple of `triples`.
GnnModel make_gnn(const std::vector<LabelTriple>& triples, std::size_t input_dim,
                  const TrainingConfig& config);
GnnModel make_gnn(const KnowledgeGraph& g, std::size_t input_dim, const TrainingConfig& config);

/// x_v(0) = input * annotation_v.
NodeStates init_states(const KnowledgeGraph& g, const GnnModel& m);

/// x_v <- sum over neighbors v' of tanh(w[t] x_v' + b[t]), t the label
/// triple of the message. Nodes without neighbors get the zero vector.
/// Throws kConfiguration naming the triple when the model lacks one.
NodeStates propagate_step(const KnowledgeGraph& g, const GnnModel& m, const NodeStates& states);

/// `steps` applications of propagate_step to init_states. Throws
/// DivergenceError with the timestep on a non-finite state.
NodeStates embed(const KnowledgeGraph& g, const GnnModel& m);

/// Readout at the Damaged node of the embedded graph.
Detection predict_single(const KnowledgeGraph& g, const GnnModel& m);

struct LabeledGraph {
  KnowledgeGraph graph;
  HealthState label = HealthState::kHealthy;
};

/// Cross entropy of the Damaged-node readout against `label`, using `params`
/// in place of m.params. Accumulates d(loss)/d(params) into `grads` when
/// non-null; applies readout dropout when `dropout` is non-null.
SampleResult gnn_sample_loss(const GnnModel& m, const ParameterSet& params,
                             const GraphPlan& plan, const Matrix& annotations,
                             Eigen::Index target, HealthState label, ParameterSet* grads,
                             Rng* dropout, double dropout_p);

struct GnnTraining {
  GnnModel model;
  TrainingLog log;
};

/// Backpropagation through the unrolled steps with Adam, L2 and early
/// stopping on the dev loss. Triples are the union over the training graphs.
GnnTraining train_gnn(const std::vector<LabeledGraph>& train, const std::vector<LabeledGraph>& dev,
                      const TrainingConfig& config);

}  // namespace sfgnn
