#include "sfgnn/sequence.hpp"

#include "sfgnn/error.hpp"
#include "sfgnn/signal_source.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace sfgnn {
namespace {

constexpr std::string_view kOut = "out.";
constexpr std::string_view kAnnot = "annot.";

NodeId start_node(const KnowledgeGraph& g) {
  const auto id = g.find_id(ontology::kGearbox);
  require(id.has_value(), ErrorCode::kLookup, "graph has no Gearbox node to start sequences from");
  return *id;
}

Vector log_softmax(const Vector& s) {
  const double m = s.maxCoeff();
  const double lse = m + std::log((s.array() - m).exp().sum());
  return (s.array() - lse).matrix();
}

std::string triple_label(const KnowledgeGraph& g, const Triple& t) {
  auto name = [&](NodeId id) { return g.contains(id) ? g.node(id).name : "#" + std::to_string(id); };
  return "(" + name(t.subject) + ", " + std::string(to_string(t.relation)) + ", " + name(t.object) + ")";
}

// Lowercases words that are capitalized common words; acronyms such as
// "HS-SH" or "AN3" keep their case.
std::string lower_words(std::string_view name) {
  std::string out(name);
  std::size_t start = 0;
  while (start < out.size()) {
    std::size_t end = out.find_first_of(" -", start);
    if (end == std::string::npos) end = out.size();
    const auto word = std::string_view(out).substr(start, end - start);
    const auto upper = std::count_if(word.begin(), word.end(),
                                     [](unsigned char c) { return std::isupper(c) != 0; });
    const bool digits = std::any_of(word.begin(), word.end(),
                                    [](unsigned char c) { return std::isdigit(c) != 0; });
    if (upper == 1 && !digits && std::isupper(static_cast<unsigned char>(word.front()))) {
      out[start] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[start])));
    }
    start = end + 1;
  }
  return out;
}

std::string with_article(const std::string& phrase) {
  const bool vowel = !phrase.empty() && std::string_view("aeiou").find(phrase.front()) != std::string_view::npos;
  return (vowel ? "an " : "a ") + phrase;
}

struct Teacher {
  std::vector<Eigen::Index> subject_cols;
  std::vector<std::vector<bool>> visited;
  std::vector<Eigen::Index> object_cols;
};

Teacher teacher_forcing(const KnowledgeGraph& g, const std::vector<Triple>& target) {
  Teacher t;
  const NodeId start = start_node(g);
  NodeId subject = start;
  std::vector<bool> visited(g.node_count(), false);
  for (const auto& tr : target) {
    t.subject_cols.push_back(static_cast<Eigen::Index>(g.index_of(subject)));
    t.visited.push_back(visited);
    t.object_cols.push_back(static_cast<Eigen::Index>(g.index_of(tr.object)));
    visited[g.index_of(tr.subject)] = true;
    visited[g.index_of(tr.object)] = true;
    subject = next_subject(g, start, tr);
  }
  return t;
}

struct StepTape {
  GatedTape out;
  GatedTape annot;
  bool has_annot = false;
  Vector node_grad;
  Vector relation_grad;
};

}  // namespace

void SequenceModel::validate() const {
  require(hidden_size >= 1 && steps >= 1 && annotation_dim >= 1 && node_count >= 1,
          ErrorCode::kParameter, "sequence model needs positive sizes");
  require(params.at("out.node.bias").rows() == static_cast<Eigen::Index>(node_count),
          ErrorCode::kShape, "node score offsets do not match the node count");
  require(params.at("annot.head.w").rows() == static_cast<Eigen::Index>(annotation_dim),
          ErrorCode::kShape, "annotation head does not match the annotation dimension");
}

SequenceModel make_sequence_model(std::size_t annotation_dim, std::size_t node_count,
                                  const TrainingConfig& config) {
  config.validate();
  require(annotation_dim >= 1 && node_count >= 1, ErrorCode::kParameter,
          "sequence model needs annotation_dim and node_count >= 1");
  SequenceModel m;
  m.hidden_size = config.hidden_size;
  m.steps = config.steps;
  m.annotation_dim = annotation_dim;
  m.node_count = node_count;
  const auto h = config.hidden_size;
  auto& p = m.params;
  add_gated_parameters(p, kOut, h, m.input_dim(), config.seed);
  p.add("out.node.w", glorot_init(1, h, derive_seed(config.seed, p.size())));
  p.add("out.node.bias", Matrix::Zero(static_cast<Eigen::Index>(node_count), 1), false);
  p.add("out.rel.w", glorot_init(kEdgeKindCount, h, derive_seed(config.seed, p.size())));
  p.add("out.rel.b", Matrix::Zero(kEdgeKindCount, 1), false);
  add_gated_parameters(p, kAnnot, h, m.input_dim(), config.seed);
  // Zero head: annotations initially pass through unchanged.
  p.add("annot.head.w", Matrix::Zero(static_cast<Eigen::Index>(annotation_dim), static_cast<Eigen::Index>(h)));
  p.add("annot.head.b", Matrix::Zero(static_cast<Eigen::Index>(annotation_dim), 1), false);
  return m;
}

bool is_terminal(const KnowledgeGraph& g, const Triple& t) {
  return t.relation == EdgeKind::kCauses && g.node(t.object).kind == NodeKind::kState;
}

NodeId next_subject(const KnowledgeGraph& g, NodeId start, const Triple& t) {
  if (is_terminal(g, t)) return start;
  const auto kind = g.node(t.object).kind;
  if (kind == NodeKind::kMeta || kind == NodeKind::kState) return t.subject;
  return t.object;
}

Matrix step_inputs(const Matrix& annotations, Eigen::Index subject_col,
                   const std::vector<bool>& visited, std::size_t step) {
  const auto d = annotations.rows();
  const auto v = annotations.cols();
  require(static_cast<Eigen::Index>(visited.size()) == v && subject_col >= 0 && subject_col < v,
          ErrorCode::kShape, "step inputs do not cover the graph");
  Matrix in = Matrix::Zero(d + 2 + static_cast<Eigen::Index>(kStepSlots), v);
  in.topRows(d) = annotations;
  in(d, subject_col) = 1.0;
  for (Eigen::Index i = 0; i < v; ++i) {
    if (visited[static_cast<std::size_t>(i)]) in(d + 1, i) = 1.0;
  }
  in.row(d + 2 + static_cast<Eigen::Index>(std::min(step, kStepSlots - 1))).setOnes();
  return in;
}

Triple decode_step(const KnowledgeGraph& g, NodeId subject, const Vector& node_scores,
                   const Vector& relation_scores, bool* corrected) {
  require(node_scores.size() == static_cast<Eigen::Index>(g.node_count()) &&
              relation_scores.size() == static_cast<Eigen::Index>(kEdgeKindCount),
          ErrorCode::kShape, "decode scores do not match the graph");
  const auto candidates = g.neighbors(subject, Direction::kOut);
  require(!candidates.empty(), ErrorCode::kState,
          "node " + g.node(subject).name + " has no outgoing edge to decode");
  const Vector ln = log_softmax(node_scores);
  const Vector lr = log_softmax(relation_scores);
  Triple best{subject, candidates.front().kind, candidates.front().id};
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double s = lr(static_cast<Eigen::Index>(c.kind)) + ln(static_cast<Eigen::Index>(g.index_of(c.id)));
    if (s > best_score) {
      best_score = s;
      best = {subject, c.kind, c.id};
    }
  }
  if (corrected) {
    Eigen::Index node_col = 0, rel = 0;
    node_scores.maxCoeff(&node_col);
    relation_scores.maxCoeff(&rel);
    *corrected = !g.has_edge(subject, static_cast<EdgeKind>(rel), g.nodes()[static_cast<std::size_t>(node_col)].id);
  }
  return best;
}

StepResult ggsnn_step(const KnowledgeGraph& g, const SequenceModel& m, const Matrix& annotations,
                      NodeId subject, const std::vector<bool>& visited, std::size_t step) {
  require(g.node_count() == m.node_count, ErrorCode::kConfiguration,
          "sequence model expects " + std::to_string(m.node_count) + " nodes, graph has " +
              std::to_string(g.node_count()));
  const auto& p = m.params;
  const GraphPlan plan = compile_plan(g);
  const auto s = static_cast<Eigen::Index>(g.index_of(subject));
  const Matrix in = step_inputs(annotations, s, visited, step);

  StepResult r;
  const Matrix h = gated_forward(p, kOut, plan, in, m.steps, nullptr);
  r.node_scores = (p.at("out.node.w") * h).transpose() + p.at("out.node.bias").col(0);
  r.relation_scores = p.at("out.rel.w") * h.col(s) + p.at("out.rel.b").col(0);
  r.triple = decode_step(g, subject, r.node_scores, r.relation_scores, &r.corrected);

  const Matrix ha = gated_forward(p, kAnnot, plan, in, m.steps, nullptr);
  r.next_annotations = annotations + p.at("annot.head.w") * ha;
  r.next_annotations.colwise() += p.at("annot.head.b").col(0);
  return r;
}

SequenceOutput predict_sequence(const KnowledgeGraph& g, const SequenceModel& m,
                                std::size_t max_steps, std::size_t terminals) {
  require(terminals >= 1, ErrorCode::kParameter, "terminal count must be >= 1");
  require(m.params.all_finite(), ErrorCode::kState, "sequence model parameters are not finite");
  SequenceOutput out;
  const NodeId start = start_node(g);
  Matrix annotations = require_annotations(g);
  std::vector<bool> visited(g.node_count(), false);
  NodeId subject = start;
  std::size_t seen = 0;
  for (std::size_t k = 0; k < max_steps; ++k) {
    if (g.neighbors(subject, Direction::kOut).empty()) {
      out.dead_end = true;
      break;
    }
    StepResult r = ggsnn_step(g, m, annotations, subject, visited, k);
    out.triples.push_back(r.triple);
    out.corrected += r.corrected ? 1 : 0;
    visited[g.index_of(r.triple.subject)] = true;
    visited[g.index_of(r.triple.object)] = true;
    annotations = std::move(r.next_annotations);
    if (is_terminal(g, r.triple) && ++seen == terminals) {
      out.complete = true;
      break;
    }
    subject = next_subject(g, start, r.triple);
  }
  return out;
}

std::vector<Triple> fault_sequence(const KnowledgeGraph& g, std::vector<std::string> sensors) {
  require(!sensors.empty(), ErrorCode::kParameter, "fault sequence needs at least one sensor");
  auto order = [](const std::string& s) {
    const auto it = std::find(kSensorIds.begin(), kSensorIds.end(), s);
    return std::pair(static_cast<std::size_t>(it - kSensorIds.begin()), s);
  };
  std::sort(sensors.begin(), sensors.end(),
            [&](const std::string& a, const std::string& b) { return order(a) < order(b); });

  const NodeId start = start_node(g);
  const NodeId damaged = g.find(ontology::kDamaged).id;
  std::vector<Triple> out;
  for (const auto& name : sensors) {
    const Node& sensor = g.find(name);
    require(sensor.kind == NodeKind::kData, ErrorCode::kData, "'" + name + "' is not a data node");

    // Breadth-first search along has edges; neighbors come sorted by id.
    std::map<NodeId, NodeId> parent;
    std::deque<NodeId> queue{start};
    parent[start] = start;
    while (!queue.empty() && !parent.count(sensor.id)) {
      const NodeId u = queue.front();
      queue.pop_front();
      for (const auto& n : g.neighbors(u, Direction::kOut)) {
        if (n.kind == EdgeKind::kHas && !parent.count(n.id)) {
          parent[n.id] = u;
          queue.push_back(n.id);
        }
      }
    }
    require(parent.count(sensor.id) != 0, ErrorCode::kData,
            "no has-path from the Gearbox to '" + name + "'");
    std::vector<Triple> path;
    for (NodeId v = sensor.id; v != start; v = parent[v]) path.push_back({parent[v], EdgeKind::kHas, v});
    out.insert(out.end(), path.rbegin(), path.rend());

    for (auto kind : {EdgeKind::kIsA, EdgeKind::kMeasures}) {
      const auto nbrs = g.neighbors(sensor.id, Direction::kOut);
      const auto it = std::find_if(nbrs.begin(), nbrs.end(), [&](const Neighbor& n) { return n.kind == kind; });
      require(it != nbrs.end(), ErrorCode::kData,
              "'" + name + "' has no " + std::string(to_string(kind)) + " edge");
      out.push_back({sensor.id, kind, it->id});
    }
    require(g.has_edge(sensor.id, EdgeKind::kCauses, damaged), ErrorCode::kData,
            "'" + name + "' has no causes edge to Damaged");
    out.push_back({sensor.id, EdgeKind::kCauses, damaged});
  }
  return out;
}

void check_sequence(const KnowledgeGraph& g, const std::vector<Triple>& target) {
  require(!target.empty(), ErrorCode::kData, "target sequence is empty");
  const NodeId start = start_node(g);
  NodeId subject = start;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const auto& t = target[k];
    require(g.contains(t.subject) && g.contains(t.object) && g.has_edge(t.subject, t.relation, t.object),
            ErrorCode::kData,
            "target triple " + std::to_string(k) + " " + triple_label(g, t) + " is not a graph edge");
    require(t.subject == subject, ErrorCode::kData,
            "target triple " + std::to_string(k) + " " + triple_label(g, t) + " does not start at " +
                g.node(subject).name);
    subject = next_subject(g, start, t);
  }
}

std::string render_record(const KnowledgeGraph& g, const Triple& t) {
  return g.node(t.subject).name + " " + std::string(to_string(t.relation)) + " " + g.node(t.object).name;
}

std::string render_sentence(const KnowledgeGraph& g, const Triple& t) {
  const Node& s = g.node(t.subject);
  const Node& o = g.node(t.object);
  std::string subject = s.kind == NodeKind::kData ? s.name : lower_words(s.name);
  if (s.kind == NodeKind::kTerminology) subject = "the " + subject;

  std::string verb;
  switch (t.relation) {
    case EdgeKind::kHas: verb = "has"; break;
    case EdgeKind::kIsA: verb = "is"; break;
    case EdgeKind::kMeasures: verb = "measures"; break;
    case EdgeKind::kCauses: verb = "causes"; break;
  }

  std::string object;
  switch (o.kind) {
    case NodeKind::kData: object = o.name; break;
    case NodeKind::kTerminology: object = with_article(lower_words(o.name)); break;
    case NodeKind::kMeta:
      object = t.relation == EdgeKind::kIsA ? with_article(lower_words(o.name)) : lower_words(o.name);
      break;
    case NodeKind::kState:
      if (o.name == ontology::kDamaged) {
        object = "fault operations";
      } else if (o.name == ontology::kHealthy) {
        object = "normal operations";
      } else {
        object = lower_words(o.name);
      }
      break;
  }
  return subject + " " + verb + " " + object;
}

SampleResult ggsnn_sample_loss(const SequenceModel& m, const ParameterSet& params,
                               const GraphPlan& plan, const KnowledgeGraph& g,
                               const std::vector<Triple>& target, ParameterSet* grads) {
  const Teacher teacher = teacher_forcing(g, target);
  const Matrix& node_w = params.at("out.node.w");
  const Matrix& node_b = params.at("out.node.bias");
  const Matrix& rel_w = params.at("out.rel.w");
  const Matrix& rel_b = params.at("out.rel.b");
  const Matrix& head_w = params.at("annot.head.w");
  const Matrix& head_b = params.at("annot.head.b");
  const auto d = static_cast<Eigen::Index>(m.annotation_dim);

  SampleResult result{0.0, true};
  std::vector<StepTape> tapes(target.size());
  Matrix annotations = require_annotations(g);
  for (std::size_t k = 0; k < target.size(); ++k) {
    const auto s = teacher.subject_cols[k];
    const Matrix in = step_inputs(annotations, s, teacher.visited[k], k);
    auto& tape = tapes[k];
    const Matrix h = gated_forward(params, kOut, plan, in, m.steps, &tape.out);
    const Vector node_scores = (node_w * h).transpose() + node_b.col(0);
    const Vector rel_scores = rel_w * h.col(s) + rel_b.col(0);
    const auto node_ce = cross_entropy(node_scores, static_cast<std::size_t>(teacher.object_cols[k]));
    const auto rel_ce = cross_entropy(rel_scores, static_cast<std::size_t>(target[k].relation));
    result.loss += node_ce.loss + rel_ce.loss;
    tape.node_grad = node_ce.grad;
    tape.relation_grad = rel_ce.grad;
    if (result.correct) {
      const Triple decoded = decode_step(g, target[k].subject, node_scores, rel_scores);
      result.correct = decoded == target[k];
    }
    if (k + 1 < target.size()) {
      const Matrix ha = gated_forward(params, kAnnot, plan, in, m.steps, &tape.annot);
      tape.has_annot = true;
      Matrix next = annotations + head_w * ha;
      next.colwise() += head_b.col(0);
      annotations = std::move(next);
    }
  }
  if (!grads) return result;

  Matrix d_annotations = Matrix::Zero(d, static_cast<Eigen::Index>(plan.node_count));
  for (std::size_t k = target.size(); k-- > 0;) {
    const auto s = teacher.subject_cols[k];
    const auto& tape = tapes[k];
    const Matrix& h = tape.out.states.back();
    grads->at("out.node.w").noalias() += tape.node_grad.transpose() * h.transpose();
    grads->at("out.node.bias").col(0) += tape.node_grad;
    grads->at("out.rel.w").noalias() += tape.relation_grad * h.col(s).transpose();
    grads->at("out.rel.b").col(0) += tape.relation_grad;
    Matrix d_h = node_w.transpose() * tape.node_grad.transpose();
    d_h.col(s) += rel_w.transpose() * tape.relation_grad;
    Matrix d_in = gated_backward(params, kOut, plan, tape.out, std::move(d_h), *grads);

    if (tape.has_annot) {
      const Matrix& ha = tape.annot.states.back();
      grads->at("annot.head.w").noalias() += d_annotations * ha.transpose();
      grads->at("annot.head.b").col(0) += d_annotations.rowwise().sum();
      d_in += gated_backward(params, kAnnot, plan, tape.annot, head_w.transpose() * d_annotations, *grads);
    }
    d_annotations += d_in.topRows(d);
  }
  return result;
}

SequenceTraining train_ggsnn(const std::vector<SequenceExample>& train,
                             const std::vector<SequenceExample>& dev, const TrainingConfig& config) {
  require(!train.empty(), ErrorCode::kParameter, "training set is empty");
  for (const auto* set : {&train, &dev}) {
    for (const auto& ex : *set) check_sequence(ex.graph, ex.target);
  }
  const auto& first = train.front().graph;
  const auto dim = static_cast<std::size_t>(require_annotations(first).rows());
  SequenceTraining out{make_sequence_model(dim, first.node_count(), config), {}};

  std::vector<GraphPlan> train_plans, dev_plans;
  for (const auto& ex : train) train_plans.push_back(compile_plan(ex.graph));
  for (const auto& ex : dev) dev_plans.push_back(compile_plan(ex.graph));
  const SequenceModel& shape = out.model;
  auto objective = [&shape](const std::vector<SequenceExample>& set, const std::vector<GraphPlan>& plans) {
    return [&set, &plans, &shape](std::size_t i, const ParameterSet& params, ParameterSet* grads, Rng*) {
      return ggsnn_sample_loss(shape, params, plans[i], set[i].graph, set[i].target, grads);
    };
  };
  out.log = fit(out.model.params, train.size(), dev.size(), objective(train, train_plans),
                objective(dev, dev_plans), config);
  return out;
}

}  // namespace sfgnn
