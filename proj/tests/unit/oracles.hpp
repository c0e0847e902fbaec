#pragma once

#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/knowledge_graph.hpp"

#include <cmath>

// Naive loop implementations used as oracles for the vectorized propagation.
namespace sfgnn::testing {

inline Vector matvec(const Matrix& a, const Vector& x) {
  Vector y = Vector::Zero(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) y(r) += a(r, c) * x(c);
  }
  return y;
}

inline double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One basic-GNN step by scanning the edge list for every node.
inline Matrix naive_gnn_step(const KnowledgeGraph& g, const GnnModel& m, const Matrix& x) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  const auto& nodes = g.nodes();
  auto col = [&](NodeId id) { return static_cast<Eigen::Index>(g.index_of(id)); };
  for (const auto& v : nodes) {
    Vector acc = Vector::Zero(x.rows());
    for (const auto& e : g.edges()) {
      for (Direction d : {Direction::kIn, Direction::kOut}) {
        const bool incident = d == Direction::kIn ? e.target == v.id : e.source == v.id;
        if (!incident) continue;
        const NodeId other = d == Direction::kIn ? e.source : e.target;
        const LabelTriple t{v.kind, e.kind, d, g.node(other).kind};
        const Vector pre = matvec(m.params.at(weight_name(t)), x.col(col(other))) +
                           Vector(m.params.at(bias_name(t)));
        for (Eigen::Index i = 0; i < pre.size(); ++i) acc(i) += std::tanh(pre(i));
      }
    }
    out.col(col(v.id)) = acc;
  }
  return out;
}

// K gated steps with explicit loops for aggregation and the GRU.
inline Matrix naive_ggnn(const KnowledgeGraph& g, const GatedGnnModel& m, const Matrix& annotations) {
  const auto& p = m.params;
  const Eigen::Index H = static_cast<Eigen::Index>(m.hidden_size);
  const Eigen::Index V = static_cast<Eigen::Index>(g.node_count());
  Matrix h(H, V);
  for (Eigen::Index v = 0; v < V; ++v) h.col(v) = matvec(p.at("input"), annotations.col(v));
  auto col = [&](NodeId id) { return static_cast<Eigen::Index>(g.index_of(id)); };
  for (std::size_t k = 0; k < m.steps; ++k) {
    Matrix a = Matrix::Zero(H, V);
    for (const auto& e : g.edges()) {
      const auto s = col(e.source), t = col(e.target);
      a.col(t) += matvec(p.at(aggregation_name(e.kind, Direction::kIn)), h.col(s)) +
                  Vector(p.at(aggregation_bias_name(e.kind, Direction::kIn)));
      a.col(s) += matvec(p.at(aggregation_name(e.kind, Direction::kOut)), h.col(t)) +
                  Vector(p.at(aggregation_bias_name(e.kind, Direction::kOut)));
    }
    Matrix next(H, V);
    for (Eigen::Index v = 0; v < V; ++v) {
      const Vector av = a.col(v), hv = h.col(v);
      const Vector zp = matvec(p.at("gru.wz"), av) + matvec(p.at("gru.uz"), hv) + Vector(p.at("gru.bz"));
      const Vector rp = matvec(p.at("gru.wr"), av) + matvec(p.at("gru.ur"), hv) + Vector(p.at("gru.br"));
      Vector rh(H);
      for (Eigen::Index i = 0; i < H; ++i) rh(i) = naive_sigmoid(rp(i)) * hv(i);
      const Vector cp = matvec(p.at("gru.wc"), av) + matvec(p.at("gru.uc"), rh) + Vector(p.at("gru.bc"));
      for (Eigen::Index i = 0; i < H; ++i) {
        const double z = naive_sigmoid(zp(i));
        next(i, v) = (1.0 - z) * hv(i) + z * std::tanh(cp(i));
      }
    }
    h = next;
  }
  return h;
}

}  // namespace sfgnn::testing
