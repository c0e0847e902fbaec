#include "sfgnn/error.hpp"
#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/propagation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sfgnn {
namespace {

using testing::random_graph;
using testing::random_matrix;
using testing::naive_ggnn;
using testing::naive_gnn_step;
using testing::naive_sigmoid;

void randomize(ParameterSet& params, Rng& rng, double scale) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] = random_matrix(params[i].rows(), params[i].cols(), rng, scale);
  }
}

TrainingConfig small(std::size_t hidden, std::size_t steps) {
  TrainingConfig c;
  c.hidden_size = hidden;
  c.steps = steps;
  c.seed = 3;
  return c;
}

TEST(PropagateStep, MatchesNaiveOracleOnRandomGraphs) {
  Rng rng(101);
  for (int t = 0; t < 120; ++t) {
    const auto g = random_graph(rng, 10, 3);
    GnnModel m = make_gnn(g, 3, small(4, 2));
    randomize(m.params, rng, 0.7);
    const Matrix x = random_matrix(4, static_cast<Eigen::Index>(g.node_count()), rng);
    const Matrix fast = propagate_step(g, m, x);
    const Matrix slow = naive_gnn_step(g, m, x);
    ASSERT_EQ(fast.rows(), slow.rows());
    ASSERT_EQ(fast.cols(), slow.cols());
    EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-12) << "graph " << t;
  }
}

TEST(PropagateStep, IsolatedNodeGetsZero) {
  std::vector<Node> nodes = {{0, "a", NodeKind::kData}, {1, "b", NodeKind::kData}, {2, "c", NodeKind::kMeta}};
  const KnowledgeGraph g(nodes, {{0, 1, EdgeKind::kCauses}});
  Rng rng(1);
  GnnModel m = make_gnn(g, 2, small(3, 1));
  randomize(m.params, rng, 1.0);
  const Matrix out = propagate_step(g, m, random_matrix(3, 3, rng));
  EXPECT_TRUE(out.col(2).isZero(0.0));
  EXPECT_FALSE(out.col(0).isZero(0.0));
}

TEST(PropagateStep, MissingTripleIsConfigurationError) {
  std::vector<Node> nodes = {{0, "a", NodeKind::kData}, {1, "b", NodeKind::kMeta}};
  const KnowledgeGraph g(nodes, {{0, 1, EdgeKind::kIsA}});
  const KnowledgeGraph other(nodes, {{0, 1, EdgeKind::kMeasures}});
  const GnnModel m = make_gnn(g, 2, small(3, 1));
  try {
    propagate_step(other, m, Matrix::Zero(3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
    EXPECT_NE(std::string(e.what()).find("measures"), std::string::npos);
  }
}

TEST(Embed, StateDependsOnlyOnNodesWithinTHops) {
  // Chain 0 - 1 - 2 - 3 - 4 - 5 of has edges, T = 2.
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 6; ++i) nodes.push_back({i, "n" + std::to_string(i), NodeKind::kTerminology});
  for (NodeId i = 0; i + 1 < 6; ++i) edges.push_back({i, i + 1, EdgeKind::kHas});
  const KnowledgeGraph base(nodes, edges);
  Rng rng(7);
  Matrix a = random_matrix(2, 6, rng);
  GnnModel m = make_gnn(base, 2, small(3, 2));
  randomize(m.params, rng, 0.8);
  const Matrix before = embed(base.with_annotations(a), m);
  a.col(5) += Vector::Ones(2);
  const Matrix after = embed(base.with_annotations(a), m);
  EXPECT_EQ(before.col(0), after.col(0));
  EXPECT_EQ(before.col(1), after.col(1));
  EXPECT_NE(before.col(3), after.col(3));
}

TEST(GgnnPropagate, MatchesNaiveOracleOnRandomGraphs) {
  Rng rng(202);
  for (int t = 0; t < 120; ++t) {
    const auto g = random_graph(rng, 10, 3);
    GatedGnnModel m = make_gated_gnn(3, small(4, 1 + rng.below(3)));
    randomize(m.params, rng, 0.6);
    const Matrix fast = ggnn_propagate(g, m, *g.annotations());
    const Matrix slow = naive_ggnn(g, m, *g.annotations());
    EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-12) << "graph " << t;
  }
}

TEST(GgnnPropagate, LocalityAcrossSteps) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 5; ++i) nodes.push_back({i, "n" + std::to_string(i), NodeKind::kTerminology});
  for (NodeId i = 0; i + 1 < 5; ++i) edges.push_back({i, i + 1, EdgeKind::kHas});
  const KnowledgeGraph g(nodes, edges);
  Rng rng(8);
  GatedGnnModel m = make_gated_gnn(2, small(3, 2));
  randomize(m.params, rng, 0.5);
  Matrix a = random_matrix(2, 5, rng);
  const Matrix before = ggnn_propagate(g, m, a);
  a.col(4) *= -3.0;
  const Matrix after = ggnn_propagate(g, m, a);
  EXPECT_EQ(before.col(0), after.col(0));
  EXPECT_EQ(before.col(1), after.col(1));
  EXPECT_NE(before.col(2), after.col(2));
}

GruParameters random_gru(Eigen::Index h, Rng& rng, double scale) {
  GruParameters p;
  for (Matrix* w : {&p.wz, &p.uz, &p.wr, &p.ur, &p.wc, &p.uc}) *w = random_matrix(h, h, rng, scale);
  for (Vector* b : {&p.bz, &p.br, &p.bc}) *b = random_matrix(h, 1, rng, scale);
  return p;
}

TEST(GruUpdate, ConvexCombinationOfPreviousAndCandidate) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_gru(4, rng, 1.0);
    const Vector h = random_matrix(4, 1, rng, 0.8).array().tanh().matrix();
    const Vector a = random_matrix(4, 1, rng, 2.0);
    const Vector out = gru_update(p, h, a);
    for (Eigen::Index i = 0; i < 4; ++i) {
      // c lies in (-1, 1), so h' lies between h and some value in (-1, 1).
      EXPECT_LE(out(i), std::max(h(i), 1.0));
      EXPECT_GE(out(i), std::min(h(i), -1.0));
      EXPECT_LT(std::abs(out(i)), 1.0);
    }
  }
}

TEST(GruUpdate, ClosedUpdateGateCopiesState) {
  Rng rng(10);
  auto p = random_gru(5, rng, 0.1);
  p.bz = Vector::Constant(5, -50.0);
  const Vector h = random_matrix(5, 1, rng);
  const Vector out = gru_update(p, h, random_matrix(5, 1, rng));
  EXPECT_LT((out - h).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GruUpdate, OpenUpdateGateTakesCandidate) {
  Rng rng(11);
  auto p = random_gru(3, rng, 0.1);
  p.bz = Vector::Constant(3, 50.0);
  const Vector h = random_matrix(3, 1, rng);
  const Vector a = random_matrix(3, 1, rng);
  const Vector out = gru_update(p, h, a);
  Vector rh(3);
  for (Eigen::Index i = 0; i < 3; ++i) rh(i) = naive_sigmoid((p.wr * a + p.ur * h + p.br)(i)) * h(i);
  const Vector c = (p.wc * a + p.uc * rh + p.bc).array().tanh().matrix();
  EXPECT_LT((out - c).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Plan, MessagesCoverEveryEdgeTwice) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_graph(rng, 10, 1);
    const auto plan = compile_plan(g);
    std::size_t by_triple = 0, by_relation = 0;
    for (const auto& [k, group] : plan.by_triple) by_triple += group.size();
    for (const auto& group : plan.by_relation) by_relation += group.size();
    EXPECT_EQ(by_triple, 2 * g.edges().size());
    EXPECT_EQ(by_relation, 2 * g.edges().size());
    const auto triples = label_triples(g);
    EXPECT_TRUE(std::is_sorted(triples.begin(), triples.end()));
    EXPECT_EQ(triples.size(), plan.by_triple.size());
  }
}

TEST(LabelTriple, TextRoundTrip) {
  const LabelTriple t{NodeKind::kData, EdgeKind::kHas, Direction::kIn, NodeKind::kTerminology};
  EXPECT_EQ(to_string(t), "data:has:in:terminology");
  EXPECT_EQ(parse_label_triple(to_string(t)), t);
  EXPECT_FALSE(parse_label_triple("data:has:sideways:terminology").has_value());
}

TEST(ScatterGather, Basics) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Matrix g = gather(m, {2, 0, 2});
  EXPECT_EQ(g.col(0), m.col(2));
  Matrix out = Matrix::Zero(2, 3);
  scatter_add(out, g, {1, 1, 0});
  EXPECT_EQ(out.col(1), m.col(2) + m.col(0));
  EXPECT_EQ(out.col(0), m.col(2));
}

TEST(DamagedColumn, LooksUpStateNode) {
  const auto g = build_default_graph();
  EXPECT_EQ(damaged_column(g), static_cast<Eigen::Index>(g.index_of(g.find(ontology::kDamaged).id)));
  EXPECT_THROW(require_annotations(g), Error);
  const KnowledgeGraph tiny({{0, "x", NodeKind::kData}}, {});
  EXPECT_THROW(damaged_column(tiny), Error);
}

}  // namespace
}  // namespace sfgnn
