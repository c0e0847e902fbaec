#include "sfgnn/knowledge_graph.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace sfgnn {
namespace {

std::string edge_label(const Edge& e) {
  return "(" + std::to_string(e.source) + " " + std::string(to_string(e.kind)) + " " +
         std::to_string(e.target) + ")";
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits off the next whitespace-delimited token.
std::string_view next_token(std::string_view& rest) {
  rest = trim(rest);
  const auto end = rest.find_first_of(" \t");
  const auto token = rest.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return token;
}

NodeId parse_id(std::string_view token, std::size_t line) {
  NodeId id = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(ErrorCode::kParse, line, "invalid node id '" + std::string(token) + "'");
  }
  return id;
}

}  // namespace

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kTerminology: return "terminology";
    case NodeKind::kData: return "data";
    case NodeKind::kState: return "state";
    case NodeKind::kMeta: return "meta";
  }
  return "?";
}

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::kHas: return "has";
    case EdgeKind::kIsA: return "is-a";
    case EdgeKind::kMeasures: return "measures";
    case EdgeKind::kCauses: return "causes";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::kIn ? "in" : "out"; }

std::optional<NodeKind> parse_node_kind(std::string_view token) {
  for (auto k : {NodeKind::kTerminology, NodeKind::kData, NodeKind::kState, NodeKind::kMeta}) {
    if (to_string(k) == token) return k;
  }
  return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view token) {
  for (auto k : kEdgeKinds) {
    if (to_string(k) == token) return k;
  }
  return std::nullopt;
}

KnowledgeGraph::KnowledgeGraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
}

bool KnowledgeGraph::contains(NodeId id) const noexcept { return index_.count(id) != 0; }

std::size_t KnowledgeGraph::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) raise(ErrorCode::kLookup, "unknown node id " + std::to_string(id));
  return it->second;
}

const Node& KnowledgeGraph::node(NodeId id) const { return nodes_[index_of(id)]; }

std::optional<NodeId> KnowledgeGraph::find_id(std::string_view name) const noexcept {
  for (const auto& n : nodes_) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

const Node& KnowledgeGraph::find(std::string_view name) const {
  const auto id = find_id(name);
  if (!id) raise(ErrorCode::kLookup, "no node named '" + std::string(name) + "'");
  return node(*id);
}

bool KnowledgeGraph::has_edge(NodeId source, EdgeKind kind, NodeId target) const noexcept {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{source, target, kind});
}

std::vector<Neighbor> KnowledgeGraph::neighbors(NodeId v, Direction direction) const {
  index_of(v);
  std::vector<Neighbor> out;
  for (const auto& e : edges_) {
    if (direction == Direction::kOut && e.source == v) out.push_back({e.target, e.kind});
    if (direction == Direction::kIn && e.target == v) out.push_back({e.source, e.kind});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return std::tie(a.id, a.kind) < std::tie(b.id, b.kind);
  });
  return out;
}

std::size_t KnowledgeGraph::annotation_dim() const noexcept {
  return annotations_ ? static_cast<std::size_t>(annotations_->rows()) : 0;
}

Vector KnowledgeGraph::annotation(NodeId id) const {
  require(annotations_.has_value(), ErrorCode::kState, "graph carries no annotations");
  return annotations_->col(static_cast<Eigen::Index>(index_of(id)));
}

KnowledgeGraph KnowledgeGraph::with_annotations(Matrix annotations) const {
  require(static_cast<std::size_t>(annotations.cols()) == nodes_.size(), ErrorCode::kShape,
          "annotation matrix has " + std::to_string(annotations.cols()) + " columns for " +
              std::to_string(nodes_.size()) + " nodes");
  require(annotations.rows() >= 1, ErrorCode::kShape, "annotation dimension must be >= 1");
  KnowledgeGraph out = *this;
  out.annotations_ = std::move(annotations);
  return out;
}

KnowledgeGraph KnowledgeGraph::without_annotations() const {
  KnowledgeGraph out = *this;
  out.annotations_.reset();
  return out;
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  if (a.nodes_ != b.nodes_ || a.edges_ != b.edges_) return false;
  if (a.annotations_.has_value() != b.annotations_.has_value()) return false;
  if (!a.annotations_) return true;
  return a.annotations_->rows() == b.annotations_->rows() &&
         a.annotations_->cols() == b.annotations_->cols() && *a.annotations_ == *b.annotations_;
}

KnowledgeGraph build_default_graph() {
  static constexpr std::array<std::string_view, 21> kTerminology = {
      "Wind Turbine",       "Drivetrain",          "Gearbox",
      "Ring Gear",          "Planet Carrier",      "Planet Gear Set",
      "Sun Gear",           "Low-Speed Shaft",     "Intermediate-Speed Shaft",
      "High-Speed Shaft",   "Main Shaft",          "LS-SH Bearing",
      "IMS-SH Bearing",     "HS-SH Upwind Bearing", "HS-SH Downwind Bearing",
      "Carrier Bearing",    "Generator",           "Rotor",
      "Hub",                "Nacelle",             "Lubrication System"};
  static constexpr std::array<std::string_view, 8> kData = {"AN3", "AN4", "AN5", "AN6",
                                                            "AN7", "AN8", "AN9", "AN10"};
  // Component each accelerometer is mounted on.
  static constexpr std::array<std::string_view, 8> kMount = {
      "Ring Gear",        "Ring Gear",            "Low-Speed Shaft",        "Intermediate-Speed Shaft",
      "High-Speed Shaft", "HS-SH Upwind Bearing", "HS-SH Downwind Bearing", "Carrier Bearing"};
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 20> kSpine = {{
      {"Wind Turbine", "Rotor"},
      {"Wind Turbine", "Nacelle"},
      {"Rotor", "Hub"},
      {"Nacelle", "Drivetrain"},
      {"Nacelle", "Generator"},
      {"Drivetrain", "Main Shaft"},
      {"Drivetrain", "Gearbox"},
      {"Gearbox", "Ring Gear"},
      {"Gearbox", "Planet Carrier"},
      {"Gearbox", "Sun Gear"},
      {"Gearbox", "Low-Speed Shaft"},
      {"Gearbox", "Intermediate-Speed Shaft"},
      {"Gearbox", "High-Speed Shaft"},
      {"Gearbox", "Lubrication System"},
      {"Planet Carrier", "Planet Gear Set"},
      {"Planet Carrier", "Carrier Bearing"},
      {"Low-Speed Shaft", "LS-SH Bearing"},
      {"Intermediate-Speed Shaft", "IMS-SH Bearing"},
      {"High-Speed Shaft", "HS-SH Upwind Bearing"},
      {"High-Speed Shaft", "HS-SH Downwind Bearing"},
  }};

  std::vector<Node> nodes;
  auto add = [&](std::string_view name, NodeKind kind) {
    nodes.push_back({static_cast<NodeId>(nodes.size()), std::string(name), kind});
  };
  for (auto n : kTerminology) add(n, NodeKind::kTerminology);
  for (auto n : kData) add(n, NodeKind::kData);
  add(ontology::kHealthy, NodeKind::kState);
  add(ontology::kDamaged, NodeKind::kState);
  add(ontology::kSensorType, NodeKind::kMeta);
  add(ontology::kDataType, NodeKind::kMeta);
  add(ontology::kComponentType, NodeKind::kMeta);
  add(ontology::kConditionType, NodeKind::kMeta);

  auto id = [&](std::string_view name) {
    const auto it = std::find_if(nodes.begin(), nodes.end(),
                                 [&](const Node& n) { return n.name == name; });
    return it->id;
  };
  std::vector<Edge> edges;
  auto link = [&](std::string_view a, EdgeKind k, std::string_view b) {
    edges.push_back({id(a), id(b), k});
  };
  for (const auto& [parent, child] : kSpine) link(parent, EdgeKind::kHas, child);
  for (std::size_t i = 0; i < kData.size(); ++i) {
    link(kMount[i], EdgeKind::kHas, kData[i]);
    link(kData[i], EdgeKind::kIsA, ontology::kSensorType);
    link(kData[i], EdgeKind::kMeasures, ontology::kDataType);
    link(kData[i], EdgeKind::kCauses, ontology::kHealthy);
    link(kData[i], EdgeKind::kCauses, ontology::kDamaged);
  }
  // Meta attributes: the accelerometer type measures vibration; the drivetrain
  // is a rotating component; the operational condition has both health
  // states, which stay sinks.
  link(ontology::kSensorType, EdgeKind::kMeasures, ontology::kDataType);
  link("Drivetrain", EdgeKind::kIsA, ontology::kComponentType);
  link(ontology::kConditionType, EdgeKind::kHas, ontology::kHealthy);
  link(ontology::kConditionType, EdgeKind::kHas, ontology::kDamaged);
  return KnowledgeGraph(std::move(nodes), std::move(edges));
}

std::vector<Violation> validate(const KnowledgeGraph& g) {
  std::vector<Violation> out;
  const auto& nodes = g.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].id == nodes[i - 1].id) {
      out.push_back({"duplicate node id", "node id " + std::to_string(nodes[i].id) + " repeated"});
    }
  }

  std::set<Edge> seen;
  for (const auto& e : g.edges()) {
    if (!g.contains(e.source) || !g.contains(e.target)) {
      out.push_back({"dangling edge", "edge " + edge_label(e) + " references a missing node"});
    }
    if (e.source == e.target) {
      out.push_back({"self loop", "edge " + edge_label(e) + " is a self loop"});
    }
    if (!seen.insert(e).second) {
      out.push_back({"duplicate edge", "edge " + edge_label(e) + " appears more than once"});
    }
  }

  for (const auto& n : nodes) {
    if (n.kind != NodeKind::kData) continue;
    std::size_t measures = 0, is_a = 0, causes_state = 0;
    for (const auto& e : g.edges()) {
      if (e.source != n.id) continue;
      if (e.kind == EdgeKind::kMeasures) ++measures;
      if (e.kind == EdgeKind::kIsA) ++is_a;
      if (e.kind == EdgeKind::kCauses && g.contains(e.target) &&
          g.node(e.target).kind == NodeKind::kState) {
        ++causes_state;
      }
    }
    const std::string who = "data node " + std::to_string(n.id) + " (" + n.name + ")";
    if (measures != 1) {
      out.push_back({"data measures count",
                     who + " has " + std::to_string(measures) + " outgoing measures edges"});
    }
    if (is_a != 1) {
      out.push_back({"data is-a count", who + " has " + std::to_string(is_a) + " outgoing is-a edges"});
    }
    if (causes_state == 0) {
      out.push_back({"data without causes", who + " has no causes edge to a state node"});
    }
  }

  if (!nodes.empty()) {
    DisjointSets sets(nodes.size());
    for (const auto& e : g.edges()) {
      if (g.contains(e.source) && g.contains(e.target)) {
        sets.unite(g.index_of(e.source), g.index_of(e.target));
      }
    }
    const std::size_t root = sets.find(0);
    std::vector<NodeId> detached;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (sets.find(i) != root) detached.push_back(nodes[i].id);
    }
    if (!detached.empty()) {
      std::string ids;
      for (auto id : detached) ids += (ids.empty() ? "" : ",") + std::to_string(id);
      out.push_back({"not weakly connected", "nodes {" + ids + "} unreachable from node " +
                                                 std::to_string(nodes.front().id)});
    }
  }

  if (g.annotations() && !g.annotations()->allFinite()) {
    out.push_back({"non-finite annotation", "annotation matrix holds non-finite values"});
  }
  return out;
}

KnowledgeGraph attach_annotations(const KnowledgeGraph& g,
                                  const std::map<std::string, Vector>& features) {
  require(!features.empty(), ErrorCode::kParameter,
          "attach_annotations needs at least one feature vector to infer the dimension");
  const auto dim = features.begin()->second.size();
  require(dim >= 1, ErrorCode::kShape, "feature vectors must be non-empty");
  Matrix annotations = Matrix::Zero(dim, static_cast<Eigen::Index>(g.node_count()));
  for (const auto& [name, vec] : features) {
    const auto id = g.find_id(name);
    require(id.has_value() && g.node(*id).kind == NodeKind::kData, ErrorCode::kLookup,
            "'" + name + "' is not a data node");
    require(vec.size() == dim, ErrorCode::kShape,
            "feature vector for '" + name + "' has length " + std::to_string(vec.size()) +
                ", expected " + std::to_string(dim));
    annotations.col(static_cast<Eigen::Index>(g.index_of(*id))) = vec;
  }
  return g.with_annotations(std::move(annotations));
}

std::string serialize(const KnowledgeGraph& g) {
  std::ostringstream out;
  out << "# sfgnn knowledge graph\n";
  for (const auto& n : g.nodes()) {
    out << "node " << n.id << ' ' << to_string(n.kind) << ' ' << n.name << '\n';
  }
  for (const auto& e : g.edges()) {
    out << "edge " << e.source << ' ' << to_string(e.kind) << ' ' << e.target << '\n';
  }
  if (const auto& a = g.annotations()) {
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      out << "annot " << g.nodes()[i].id;
      for (Eigen::Index r = 0; r < a->rows(); ++r) {
        out << ' ' << io::format_double((*a)(r, static_cast<Eigen::Index>(i)));
      }
      out << '\n';
    }
  }
  return out.str();
}

KnowledgeGraph deserialize(std::string_view text) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::pair<NodeId, std::vector<double>>> annots;
  std::vector<std::size_t> annot_lines;

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::string_view rest = line;
    const auto keyword = next_token(rest);
    if (keyword == "node") {
      const NodeId id = parse_id(next_token(rest), line_no);
      const auto kind_token = next_token(rest);
      const auto kind = parse_node_kind(kind_token);
      if (!kind) {
        throw ParseError(ErrorCode::kParse, line_no, "unknown node kind '" + std::string(kind_token) + "'");
      }
      const auto name = trim(rest);
      if (name.empty()) throw ParseError(ErrorCode::kParse, line_no, "node without a name");
      nodes.push_back({id, std::string(name), *kind});
    } else if (keyword == "edge") {
      const NodeId src = parse_id(next_token(rest), line_no);
      const auto kind_token = next_token(rest);
      const auto kind = parse_edge_kind(kind_token);
      if (!kind) {
        throw ParseError(ErrorCode::kParse, line_no, "unknown edge kind '" + std::string(kind_token) + "'");
      }
      const NodeId dst = parse_id(next_token(rest), line_no);
      if (!trim(rest).empty()) {
        throw ParseError(ErrorCode::kParse, line_no, "trailing text after edge");
      }
      edges.push_back({src, dst, *kind});
    } else if (keyword == "annot") {
      const NodeId id = parse_id(next_token(rest), line_no);
      std::vector<double> values;
      for (auto tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
          throw ParseError(ErrorCode::kParse, line_no, "invalid annotation value '" + std::string(tok) + "'");
        }
        values.push_back(v);
      }
      if (values.empty()) throw ParseError(ErrorCode::kParse, line_no, "annotation without values");
      annots.emplace_back(id, std::move(values));
      annot_lines.push_back(line_no);
    } else {
      throw ParseError(ErrorCode::kParse, line_no, "unknown record '" + std::string(keyword) + "'");
    }
  }

  KnowledgeGraph g(std::move(nodes), std::move(edges));
  if (annots.empty()) return g;

  const std::size_t dim = annots.front().second.size();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(g.node_count()));
  for (std::size_t i = 0; i < annots.size(); ++i) {
    const auto& [id, values] = annots[i];
    if (!g.contains(id)) {
      throw ParseError(ErrorCode::kParse, annot_lines[i], "annotation for unknown node " + std::to_string(id));
    }
    if (values.size() != dim) {
      throw ParseError(ErrorCode::kParse, annot_lines[i],
                       "annotation has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(dim));
    }
    a.col(static_cast<Eigen::Index>(g.index_of(id))) =
        Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(dim));
  }
  return g.with_annotations(std::move(a));
}

std::vector<Neighbor> neighbors(const KnowledgeGraph& g, NodeId v, Direction direction) {
  return g.neighbors(v, direction);
}

}  // namespace sfgnn
