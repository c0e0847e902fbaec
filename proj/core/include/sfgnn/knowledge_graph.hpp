#pragma once

#include "sfgnn/parameters.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

enum class NodeKind : std::uint8_t { kTerminology = 0, kData = 1, kState = 2, kMeta = 3 };
inline constexpr std::size_t kNodeKindCount = 4;

/// Declaration order is the canonical tie-break order.
enum class EdgeKind : std::uint8_t { kHas = 0, kIsA = 1, kMeasures = 2, kCauses = 3 };
inline constexpr std::size_t kEdgeKindCount = 4;
inline constexpr std::array<EdgeKind, 4> kEdgeKinds = {EdgeKind::kHas, EdgeKind::kIsA,
                                                       EdgeKind::kMeasures, EdgeKind::kCauses};

enum class Direction : std::uint8_t { kIn = 0, kOut = 1 };

std::string_view to_string(NodeKind k);
std::string_view to_string(EdgeKind k);
std::string_view to_string(Direction d);
std::optional<NodeKind> parse_node_kind(std::string_view token);
std::optional<EdgeKind> parse_edge_kind(std::string_view token);

using NodeId = std::uint32_t;

struct Node {
  NodeId id = 0;
  std::string name;
  NodeKind kind = NodeKind::kTerminology;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  EdgeKind kind = EdgeKind::kHas;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge& a, const Edge& b) {
    if (auto c = a.source <=> b.source; c != 0) return c;
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    return a.target <=> b.target;
  }
};

struct Neighbor {
  NodeId id = 0;
  EdgeKind kind = EdgeKind::kHas;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Violation {
  std::string code;     // e.g. "dangling edge"
  std::string message;  // names the node / edge ids involved
};

/// Typed, directed, optionally annotated graph. Immutable once built; nodes
/// are kept sorted by id so every derived view is canonical.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(std::vector<Node> nodes, std::vector<Edge> edges);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  bool contains(NodeId id) const noexcept;
  /// Position of `id` in nodes(); throws kLookup for unknown ids.
  std::size_t index_of(NodeId id) const;
  const Node& node(NodeId id) const;
  /// Throws kLookup when no node carries `name`.
  const Node& find(std::string_view name) const;
  std::optional<NodeId> find_id(std::string_view name) const noexcept;

  bool has_edge(NodeId source, EdgeKind kind, NodeId target) const noexcept;

  /// Neighbors sorted by (id, edge kind).
  std::vector<Neighbor> neighbors(NodeId v, Direction direction) const;

  /// Annotation matrix D x V (column per node in nodes() order), if attached.
  const std::optional<Matrix>& annotations() const noexcept { return annotations_; }
  std::size_t annotation_dim() const noexcept;
  Vector annotation(NodeId id) const;

  /// Copy of this graph carrying the given D x V annotation matrix.
  KnowledgeGraph with_annotations(Matrix annotations) const;
  KnowledgeGraph without_annotations() const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::optional<Matrix> annotations_;
  std::map<NodeId, std::size_t> index_;
};

/// The 35-node wind-turbine ontology: 21 terminology, 8 data (AN3..AN10),
/// 2 state and 4 meta nodes.
KnowledgeGraph build_default_graph();

/// Every structural invariant; returns all violations (empty when valid).
std::vector<Violation> validate(const KnowledgeGraph& g);

/// Data nodes get the given vectors, every other node a zero vector of the
/// same length.
KnowledgeGraph attach_annotations(const KnowledgeGraph& g,
                                  const std::map<std::string, Vector>& features);

/// Line-oriented text: `node <id> <kind> <name>`, `edge <src> <kind> <dst>`,
/// `annot <id> <v1> ...`. Output is canonical (sorted), so equal graphs give
/// identical bytes.
std::string serialize(const KnowledgeGraph& g);
KnowledgeGraph deserialize(std::string_view text);

std::vector<Neighbor> neighbors(const KnowledgeGraph& g, NodeId v, Direction direction);

/// Node names of the default graph that other modules refer to.
namespace ontology {
inline constexpr std::string_view kGearbox = "Gearbox";
inline constexpr std::string_view kHealthy = "Healthy";
inline constexpr std::string_view kDamaged = "Damaged";
inline constexpr std::string_view kSensorType = "Accelerometer";  // sensor type
inline constexpr std::string_view kDataType = "Vibration";        // data type
inline constexpr std::string_view kComponentType = "Rotating";    // component type
inline constexpr std::string_view kConditionType = "Operational"; // condition type
}  // namespace ontology

}  // namespace sfgnn
