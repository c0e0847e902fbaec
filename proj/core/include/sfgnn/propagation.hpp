#pragma once

#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/parameters.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

/// Key of one basic-GNN aggregation function: the node receiving the message,
/// the edge it travels along (with direction as seen from the receiver) and
/// the node sending it. An edge u -> v gives v an `in` message from u and u an
/// `out` message from v.
struct LabelTriple {
  NodeKind target = NodeKind::kTerminology;
  EdgeKind edge = EdgeKind::kHas;
  Direction direction = Direction::kIn;
  NodeKind neighbor = NodeKind::kTerminology;

  friend auto operator<=>(const LabelTriple&, const LabelTriple&) = default;
};

/// `target:edge:direction:neighbor`, e.g. `data:has:in:terminology`.
std::string to_string(const LabelTriple& t);
std::optional<LabelTriple> parse_label_triple(std::string_view text);

/// Index of an (edge kind, direction) pair in [0, 8).
constexpr std::size_t relation_index(EdgeKind kind, Direction direction) noexcept {
  return static_cast<std::size_t>(kind) * 2 + static_cast<std::size_t>(direction);
}
inline constexpr std::size_t kRelationCount = 8;

/// Messages sharing one set of aggregation parameters: message m goes from
/// node column sources[m] to node column targets[m].
struct MessageGroup {
  std::vector<Eigen::Index> targets;
  std::vector<Eigen::Index> sources;

  std::size_t size() const noexcept { return targets.size(); }
};

/// Graph lowered to column indices (nodes() order) for the propagation
/// kernels. Messages inside each group are ordered by edge, so summation
/// order is fixed.
struct GraphPlan {
  std::size_t node_count = 0;
  std::vector<NodeKind> kinds;
  std::map<LabelTriple, MessageGroup> by_triple;
  std::array<MessageGroup, kRelationCount> by_relation;
};

GraphPlan compile_plan(const KnowledgeGraph& g);

/// Distinct label triples of the graph in sorted order.
std::vector<LabelTriple> label_triples(const KnowledgeGraph& g);

/// D x V matrix of node annotations; throws kState when none are attached.
const Matrix& require_annotations(const KnowledgeGraph& g);

/// Column of the Damaged state node, the node whose readout is the
/// single detection output. Throws kLookup if the graph has none.
Eigen::Index damaged_column(const KnowledgeGraph& g);

/// out[:, targets[m]] += messages[:, m] for every message.
void scatter_add(Matrix& out, const Matrix& messages, const std::vector<Eigen::Index>& targets);

/// Columns `cols` of `m`, in order.
Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& cols);

}  // namespace sfgnn
