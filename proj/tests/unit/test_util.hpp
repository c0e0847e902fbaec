#pragma once

#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/rng.hpp"

#include <set>
#include <tuple>

namespace sfgnn::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

// Random typed graph with 2..max_nodes nodes, no self loops or duplicate
// edges, node ids shuffled so that id order differs from insertion order.
inline KnowledgeGraph random_graph(Rng& rng, std::size_t max_nodes, std::size_t dim) {
  const std::size_t n = 2 + static_cast<std::size_t>(rng.below(max_nodes - 1));
  std::vector<Node> nodes;
  const auto ids = permutation(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({static_cast<NodeId>(ids[i] * 3 + 1), "n" + std::to_string(i),
                     static_cast<NodeKind>(rng.below(kNodeKindCount))});
  }
  std::set<std::tuple<NodeId, int, NodeId>> seen;
  std::vector<Edge> edges;
  const std::size_t m = rng.below(3 * n);
  for (std::size_t e = 0; e < m; ++e) {
    const NodeId s = nodes[rng.below(n)].id;
    const NodeId t = nodes[rng.below(n)].id;
    const auto kind = static_cast<EdgeKind>(rng.below(kEdgeKindCount));
    if (s == t || !seen.insert({s, static_cast<int>(kind), t}).second) continue;
    edges.push_back({s, t, kind});
  }
  KnowledgeGraph g(std::move(nodes), std::move(edges));
  return g.with_annotations(random_matrix(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(n), rng));
}

}  // namespace sfgnn::testing
