#include "sfgnn/propagation.hpp"

#include "sfgnn/error.hpp"

#include <set>

namespace sfgnn {

std::string to_string(const LabelTriple& t) {
  std::string out(to_string(t.target));
  out += ':';
  out += to_string(t.edge);
  out += ':';
  out += to_string(t.direction);
  out += ':';
  out += to_string(t.neighbor);
  return out;
}

std::optional<LabelTriple> parse_label_triple(std::string_view text) {
  std::array<std::string_view, 4> parts;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto colon = text.find(':');
    if ((i < 3) == (colon == std::string_view::npos)) return std::nullopt;
    parts[i] = text.substr(0, colon);
    text = i < 3 ? text.substr(colon + 1) : std::string_view{};
  }
  const auto target = parse_node_kind(parts[0]);
  const auto edge = parse_edge_kind(parts[1]);
  const auto neighbor = parse_node_kind(parts[3]);
  if (!target || !edge || !neighbor) return std::nullopt;
  Direction dir;
  if (parts[2] == "in") {
    dir = Direction::kIn;
  } else if (parts[2] == "out") {
    dir = Direction::kOut;
  } else {
    return std::nullopt;
  }
  return LabelTriple{*target, *edge, dir, *neighbor};
}

GraphPlan compile_plan(const KnowledgeGraph& g) {
  GraphPlan plan;
  plan.node_count = g.node_count();
  for (const auto& n : g.nodes()) plan.kinds.push_back(n.kind);
  for (const auto& e : g.edges()) {
    const auto s = static_cast<Eigen::Index>(g.index_of(e.source));
    const auto t = static_cast<Eigen::Index>(g.index_of(e.target));
    const auto sk = plan.kinds[static_cast<std::size_t>(s)];
    const auto tk = plan.kinds[static_cast<std::size_t>(t)];

    auto& in_rel = plan.by_relation[relation_index(e.kind, Direction::kIn)];
    in_rel.targets.push_back(t);
    in_rel.sources.push_back(s);
    auto& out_rel = plan.by_relation[relation_index(e.kind, Direction::kOut)];
    out_rel.targets.push_back(s);
    out_rel.sources.push_back(t);

    auto& in_tri = plan.by_triple[LabelTriple{tk, e.kind, Direction::kIn, sk}];
    in_tri.targets.push_back(t);
    in_tri.sources.push_back(s);
    auto& out_tri = plan.by_triple[LabelTriple{sk, e.kind, Direction::kOut, tk}];
    out_tri.targets.push_back(s);
    out_tri.sources.push_back(t);
  }
  return plan;
}

std::vector<LabelTriple> label_triples(const KnowledgeGraph& g) {
  std::vector<LabelTriple> out;
  for (const auto& [triple, group] : compile_plan(g).by_triple) out.push_back(triple);
  return out;
}

const Matrix& require_annotations(const KnowledgeGraph& g) {
  require(g.annotations().has_value(), ErrorCode::kState, "graph carries no node annotations");
  return *g.annotations();
}

Eigen::Index damaged_column(const KnowledgeGraph& g) {
  const auto id = g.find_id(ontology::kDamaged);
  require(id.has_value() && g.node(*id).kind == NodeKind::kState, ErrorCode::kLookup,
          "graph has no Damaged state node");
  return static_cast<Eigen::Index>(g.index_of(*id));
}

void scatter_add(Matrix& out, const Matrix& messages, const std::vector<Eigen::Index>& targets) {
  for (std::size_t m = 0; m < targets.size(); ++m) {
    out.col(targets[m]) += messages.col(static_cast<Eigen::Index>(m));
  }
}

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  return out;
}

}  // namespace sfgnn
