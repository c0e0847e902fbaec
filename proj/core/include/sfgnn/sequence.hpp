#pragma once

#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/propagation.hpp"
#include "sfgnn/training.hpp"

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace sfgnn {

struct Triple {
  NodeId subject = 0;
  EdgeKind relation = EdgeKind::kHas;
  NodeId object = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct SequenceOutput {
  std::vector<Triple> triples;
  bool complete = false;   // the requested number of terminal triples was emitted
  bool dead_end = false;   // stopped at a subject without outgoing edges
  std::size_t corrected = 0;  // steps whose unrestricted argmax was not a graph edge
};

/// Step index slots appended to each node input; later steps share the last.
inline constexpr std::size_t kStepSlots = 8;

/// Chained GG-NN pair shared across sequence steps. Node input at step k is
/// [annotation (D); is-subject; visited; one-hot(min(k, 7))].
///
///   out.*          gated propagation producing the step output
///   out.node.w     1 x H   node-selection score from each node state
///   out.node.bias  V x 1   per-node score offset
///   out.rel.w      4 x H   relation scores from the subject's state
///   out.rel.b      4 x 1
///   annot.*        gated propagation producing the next annotations
///   annot.head.w   D x H   annotations(k+1) = annotations(k) + head(h)
///   annot.head.b   D x 1
struct SequenceModel {
  ParameterSet params;
  std::size_t hidden_size = 0;
  std::size_t steps = 0;
  std::size_t annotation_dim = 0;
  std::size_t node_count = 0;

  std::size_t input_dim() const noexcept { return annotation_dim + 2 + kStepSlots; }
  void validate() const;
};

SequenceModel make_sequence_model(std::size_t annotation_dim, std::size_t node_count,
                                  const TrainingConfig& config);

/// Subject after emitting `t`: reset to `start` after a causes edge into a
/// state node, unchanged when the object is a meta or state node, otherwise
/// the object.
NodeId next_subject(const KnowledgeGraph& g, NodeId start, const Triple& t);

/// True for a causes edge into a state node.
bool is_terminal(const KnowledgeGraph& g, const Triple& t);

/// Node inputs for one step (see SequenceModel).
Matrix step_inputs(const Matrix& annotations, Eigen::Index subject_col,
                   const std::vector<bool>& visited, std::size_t step);

struct StepResult {
  Triple triple;
  bool corrected = false;
  Vector node_scores;      // V
  Vector relation_scores;  // 4, in EdgeKind order
  Matrix next_annotations; // D x V
};

/// Highest-scoring edge leaving `subject`, scoring (kind, object) as
/// log_softmax(relation)[kind] + log_softmax(node)[object]. Ties go to the
/// lowest object id, then to the earlier edge kind. Throws kState when the
/// subject has no outgoing edge.
Triple decode_step(const KnowledgeGraph& g, NodeId subject, const Vector& node_scores,
                   const Vector& relation_scores, bool* corrected = nullptr);

/// One output/annotation step from `annotations` (D x V).
StepResult ggsnn_step(const KnowledgeGraph& g, const SequenceModel& m, const Matrix& annotations,
                      NodeId subject, const std::vector<bool>& visited, std::size_t step);

/// Decodes from the Gearbox node until `terminals` terminal triples have
/// been emitted or `max_steps` is reached. Every emitted triple is an edge.
SequenceOutput predict_sequence(const KnowledgeGraph& g, const SequenceModel& m,
                                std::size_t max_steps, std::size_t terminals = 1);

/// Target for faults on `sensors`: for each, in ascending sensor order, the
/// has-path from the Gearbox, then its is-a, measures and causes-Damaged
/// edges.
std::vector<Triple> fault_sequence(const KnowledgeGraph& g, std::vector<std::string> sensors);

/// Throws kData naming the first triple that is not an edge or does not
/// start at the subject implied by the preceding triples.
void check_sequence(const KnowledgeGraph& g, const std::vector<Triple>& target);

/// `<subject> <relation> <object>` with node names, e.g. `AN3 causes Damaged`.
std::string render_record(const KnowledgeGraph& g, const Triple& t);
/// English sentence, e.g. `the gearbox has a ring gear`, `AN3 causes fault operations`.
std::string render_sentence(const KnowledgeGraph& g, const Triple& t);

struct SequenceExample {
  KnowledgeGraph graph;
  std::vector<Triple> target;
};

/// Teacher-forced loss: sum over steps of node and relation cross entropy.
/// `correct` is true when every step decodes to its target triple.
SampleResult ggsnn_sample_loss(const SequenceModel& m, const ParameterSet& params,
                               const GraphPlan& plan, const KnowledgeGraph& g,
                               const std::vector<Triple>& target, ParameterSet* grads);

struct SequenceTraining {
  SequenceModel model;
  TrainingLog log;
};

SequenceTraining train_ggsnn(const std::vector<SequenceExample>& train,
                             const std::vector<SequenceExample>& dev, const TrainingConfig& config);

}  // namespace sfgnn
