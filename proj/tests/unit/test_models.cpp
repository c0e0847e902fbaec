#include "sfgnn/error.hpp"
#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/gradient_suite.hpp"
#include "sfgnn/readout.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sfgnn {
namespace {

using testing::random_matrix;

void randomize(ParameterSet& params, Rng& rng, double scale) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] = random_matrix(params[i].rows(), params[i].cols(), rng, scale);
  }
}

TrainingConfig small(std::size_t hidden, std::size_t steps, std::uint64_t seed = 5) {
  TrainingConfig c;
  c.hidden_size = hidden;
  c.steps = steps;
  c.seed = seed;
  return c;
}

KnowledgeGraph annotated_default(Rng& rng, std::size_t dim, double damaged_shift) {
  std::map<std::string, Vector> f;
  for (auto s : kSensorIds) {
    f[std::string(s)] = random_matrix(static_cast<Eigen::Index>(dim), 1, rng, 0.3).array() + damaged_shift;
  }
  return attach_annotations(build_default_graph(), f);
}

std::vector<LabeledGraph> toy_detection_set(std::uint64_t seed, std::size_t per_class, std::size_t dim) {
  Rng rng(seed);
  std::vector<LabeledGraph> out;
  for (std::size_t i = 0; i < per_class; ++i) {
    out.push_back({annotated_default(rng, dim, 0.0), HealthState::kHealthy});
    out.push_back({annotated_default(rng, dim, 1.0), HealthState::kDamaged});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basic GNN

TEST(InitStates, ZeroAnnotationsGiveZeroStates) {
  const auto g = build_default_graph().with_annotations(Matrix::Zero(3, 35));
  const auto m = make_gnn(g, 3, small(4, 1));
  EXPECT_TRUE(init_states(g, m).isZero(0.0));
}

TEST(InitStates, IdentityProjection) {
  const auto base = small_fault_graph();
  Matrix a = Matrix::Zero(3, 6);
  a(0, 2) = 1.0;
  const auto g = base.with_annotations(a);
  auto m = make_gnn(g, 3, small(3, 1));
  m.params.at("input") = Matrix::Identity(3, 3);
  const Matrix x = init_states(g, m);
  EXPECT_EQ(Vector(x.col(2)), Vector::Unit(3, 0));
}

TEST(InitStates, MatchesNaiveProduct) {
  Rng rng(1);
  const auto g = annotated_default(rng, 5, 0.0);
  auto m = make_gnn(g, 5, small(4, 1));
  const Matrix x = init_states(g, m);
  const Matrix& w = m.params.at("input");
  for (Eigen::Index v = 0; v < 35; ++v) {
    for (Eigen::Index i = 0; i < 4; ++i) {
      double s = 0.0;
      for (Eigen::Index d = 0; d < 5; ++d) s += w(i, d) * (*g.annotations())(d, v);
      EXPECT_NEAR(x(i, v), s, 1e-12);
    }
  }
}

TEST(PropagateStep, ZeroParametersGiveZeroStates) {
  Rng rng(2);
  const auto g = annotated_default(rng, 3, 0.0);
  auto m = make_gnn(g, 3, small(4, 1));
  m.params.set_zero();
  EXPECT_TRUE(propagate_step(g, m, random_matrix(4, 35, rng)).isZero(0.0));
}

TEST(PropagateStep, SingleEdgeUsesOneTerm) {
  const KnowledgeGraph g({{0, "u", NodeKind::kTerminology}, {1, "v", NodeKind::kData}},
                         {{0, 1, EdgeKind::kHas}});
  Rng rng(3);
  auto m = make_gnn(g, 2, small(3, 1));
  randomize(m.params, rng, 1.0);
  const Matrix x = random_matrix(3, 2, rng);
  const LabelTriple t{NodeKind::kData, EdgeKind::kHas, Direction::kIn, NodeKind::kTerminology};
  const Vector expected =
      (m.params.at(weight_name(t)) * x.col(0) + Vector(m.params.at(bias_name(t)))).array().tanh().matrix();
  EXPECT_LT((propagate_step(g, m, x).col(1) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Embed, EqualsManualComposition) {
  Rng rng(4);
  const auto g = annotated_default(rng, 3, 0.0);
  for (std::size_t T : {1u, 3u}) {
    auto m = make_gnn(g, 3, small(4, T));
    randomize(m.params, rng, 0.5);
    Matrix x = init_states(g, m);
    for (std::size_t t = 0; t < T; ++t) x = propagate_step(g, m, x);
    EXPECT_LE((embed(g, m) - x).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Embed, ZeroParametersGiveZeroEmbedding) {
  Rng rng(5);
  const auto g = annotated_default(rng, 3, 0.0);
  auto m = make_gnn(g, 3, small(4, 3));
  m.params.set_zero();
  EXPECT_TRUE(embed(g, m).isZero(0.0));
}

// ---------------------------------------------------------------------------
// Readout

Vector naive_readout(const ParameterSet& p, const Vector& state, NodeKind kind) {
  Vector in = Vector::Zero(state.size() + 4);
  in.head(state.size()) = state;
  in(state.size() + static_cast<Eigen::Index>(kind)) = 1.0;
  const Matrix& w1 = p.at("readout.w1");
  const Matrix& w2 = p.at("readout.w2");
  Vector h(w1.rows());
  for (Eigen::Index i = 0; i < w1.rows(); ++i) {
    double s = p.at("readout.b1")(i, 0);
    for (Eigen::Index j = 0; j < w1.cols(); ++j) s += w1(i, j) * in(j);
    h(i) = -std::log1p(std::exp(-s));
  }
  Vector out(2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    double s = p.at("readout.b2")(i, 0);
    for (Eigen::Index j = 0; j < h.size(); ++j) s += w2(i, j) * h(j);
    out(i) = s;
  }
  return out;
}

TEST(Readout, MatchesNaiveTwoLayerEvaluation) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    ParameterSet p;
    add_readout_parameters(p, 4, 5, 11);
    randomize(p, rng, 0.8);
    const Vector s = random_matrix(4, 1, rng);
    const auto kind = static_cast<NodeKind>(t % 4);
    EXPECT_LT((readout(p, s, kind) - naive_readout(p, s, kind)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Readout, ZeroWeightsGiveEvenOdds) {
  ParameterSet p;
  add_readout_parameters(p, 4, 5, 11);
  p.set_zero();
  const auto d = decide(readout(p, Vector::Ones(4), NodeKind::kState));
  EXPECT_EQ(d.probabilities(0), 0.5);
  EXPECT_EQ(d.probabilities(1), 0.5);
  EXPECT_EQ(d.state, HealthState::kHealthy);
}

TEST(Readout, OutputBiasShiftKeepsProbabilities) {
  Rng rng(7);
  ParameterSet p;
  add_readout_parameters(p, 3, 4, 2);
  randomize(p, rng, 1.0);
  const Vector s = random_matrix(3, 1, rng);
  const auto before = decide(readout(p, s, NodeKind::kState));
  p.at("readout.b2").array() += 123.0;
  const auto after = decide(readout(p, s, NodeKind::kState));
  EXPECT_LT((before.probabilities - after.probabilities).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(before.state, after.state);
}

TEST(Decide, NeedsTwoScores) { EXPECT_THROW(decide(Vector::Zero(3)), Error); }

// ---------------------------------------------------------------------------
// Detection

TEST(PredictSingle, ZeroParametersTieToHealthy) {
  Rng rng(8);
  const auto g = annotated_default(rng, 3, 0.0);
  auto m = make_gnn(g, 3, small(4, 2));
  m.params.set_zero();
  const auto d = predict_single(g, m);
  EXPECT_EQ(d.state, HealthState::kHealthy);
  EXPECT_EQ(d.probabilities(0), 0.5);

  auto gm = make_gated_gnn(3, small(4, 2));
  gm.params.set_zero();
  const auto dg = predict_single_gated(g, gm);
  EXPECT_EQ(dg.state, HealthState::kHealthy);
  EXPECT_EQ(dg.probabilities(1), 0.5);
}

TEST(PredictSingle, InvariantToLineOrderOfSerializedGraph) {
  Rng rng(9);
  const auto g = annotated_default(rng, 3, 0.5);
  auto m = make_gnn(g, 3, small(4, 2));
  randomize(m.params, rng, 0.5);
  auto gm = make_gated_gnn(3, small(4, 2));
  randomize(gm.params, rng, 0.5);

  std::istringstream in(serialize(g));
  std::vector<std::string> nodes, edges, annots;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("node", 0) == 0) nodes.push_back(line);
    if (line.rfind("edge", 0) == 0) edges.push_back(line);
    if (line.rfind("annot", 0) == 0) annots.push_back(line);
  }
  for (auto* v : {&nodes, &edges, &annots}) std::reverse(v->begin(), v->end());
  std::string text;
  for (auto* v : {&nodes, &edges, &annots}) {
    for (const auto& l : *v) text += l + "\n";
  }
  const auto shuffled = deserialize(text);
  EXPECT_EQ(predict_single(shuffled, m).probabilities, predict_single(g, m).probabilities);
  EXPECT_EQ(predict_single_gated(shuffled, gm).probabilities, predict_single_gated(g, gm).probabilities);
}

TEST(PredictSingle, NonFiniteParametersAreStateError) {
  Rng rng(10);
  const auto g = annotated_default(rng, 3, 0.0);
  auto m = make_gnn(g, 3, small(4, 2));
  m.params.at("input")(0, 0) = std::nan("");
  try {
    predict_single(g, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kState);
  }
}

TEST(PredictSingle, MissingAnnotationsIsStateError) {
  const auto g = build_default_graph();
  const auto m = make_gnn(g, 3, small(4, 2));
  EXPECT_THROW(predict_single(g, m), Error);
}

TEST(GnnModel, OneTensorPairPerTriple) {
  const auto g = build_default_graph();
  const auto m = make_gnn(g, 3, small(4, 2));
  const auto triples = label_triples(g);
  EXPECT_EQ(m.triples, triples);
  for (const auto& t : triples) {
    EXPECT_EQ(m.params.at(weight_name(t)).rows(), 4);
    EXPECT_EQ(m.params.at(bias_name(t)).cols(), 1);
    EXPECT_FALSE(m.params.regularized(m.params.index_of(bias_name(t))));
  }
  EXPECT_NO_THROW(m.validate());
}

// ---------------------------------------------------------------------------
// Gated GNN

TEST(GruUpdate, AllZeroGivesZero) {
  GruParameters p;
  for (Matrix* w : {&p.wz, &p.uz, &p.wr, &p.ur, &p.wc, &p.uc}) *w = Matrix::Zero(3, 3);
  for (Vector* b : {&p.bz, &p.br, &p.bc}) *b = Vector::Zero(3);
  EXPECT_TRUE(gru_update(p, Vector::Zero(3), Vector::Zero(3)).isZero(0.0));
}

TEST(GgnnPropagate, OneStepEqualsManualComposition) {
  Rng rng(11);
  const auto g = small_fault_graph().with_annotations(random_matrix(2, 6, rng));
  auto m = make_gated_gnn(2, small(3, 1));
  randomize(m.params, rng, 0.5);
  const auto plan = compile_plan(g);
  const Matrix h0 = m.params.at("input") * *g.annotations();
  Matrix a = Matrix::Zero(3, 6);
  for (auto k : kEdgeKinds) {
    for (auto d : {Direction::kIn, Direction::kOut}) {
      const auto& group = plan.by_relation[relation_index(k, d)];
      for (std::size_t i = 0; i < group.size(); ++i) {
        a.col(group.targets[i]) += m.params.at(aggregation_name(k, d)) * h0.col(group.sources[i]) +
                                   Vector(m.params.at(aggregation_bias_name(k, d)));
      }
    }
  }
  const auto gru = gru_parameters(m.params);
  const Matrix out = ggnn_propagate(g, m, *g.annotations());
  for (Eigen::Index v = 0; v < 6; ++v) {
    const Vector expected = gru_update(gru, h0.col(v), a.col(v));
    EXPECT_LT((out.col(v) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(GgnnPropagate, IsolatedNodeEvolvesWithZeroAggregate) {
  const KnowledgeGraph g({{0, "a", NodeKind::kData}, {1, "b", NodeKind::kMeta}, {2, "c", NodeKind::kState}},
                         {{0, 1, EdgeKind::kIsA}});
  Rng rng(12);
  auto m = make_gated_gnn(2, small(3, 3));
  randomize(m.params, rng, 0.5);
  const Matrix a = random_matrix(2, 3, rng);
  const auto gru = gru_parameters(m.params);
  Vector h = m.params.at("input") * a.col(2);
  for (int k = 0; k < 3; ++k) h = gru_update(gru, h, Vector::Zero(3));
  EXPECT_LT((ggnn_propagate(g, m, a).col(2) - h).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GatedModel, DeterministicEvaluation) {
  Rng rng(13);
  const auto g = annotated_default(rng, 3, 0.0);
  auto m = make_gated_gnn(3, small(4, 2));
  randomize(m.params, rng, 0.5);
  EXPECT_EQ(predict_single_gated(g, m).probabilities, predict_single_gated(g, m).probabilities);
}

// ---------------------------------------------------------------------------
// Gradients and training

class GradientSuite : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradientSuite, AllChecksBelowTolerance) {
  GradSuiteOptions o;
  o.seed = GetParam();
  for (const auto& r : run_gradient_suite({}, o)) {
    EXPECT_LT(r.check.max_relative_error, 1e-4) << r.name << " seed " << o.seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradientSuite, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(GradientSuiteOptions, PerturbedGradientsFail) {
  GradSuiteOptions o;
  o.perturb = 2.0;
  for (const auto& r : run_gradient_suite({"sf", "gnn"}, o)) EXPECT_FALSE(r.passed(o.tolerance)) << r.name;
  EXPECT_THROW(run_gradient_suite({"rnn"}, o), Error);
}

TEST(GradientSuiteOptions, CoversSmallSizes) {
  const auto g = small_fault_graph();
  EXPECT_EQ(g.node_count(), 6u);
  // Six nodes leave no room for a Vibration node, so AN3 has no measures edge.
  const auto v = validate(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].code, "data measures count");
}

TEST(TrainGnn, ZeroEpochsReturnsInitialization) {
  const auto data = toy_detection_set(1, 2, 3);
  auto c = small(4, 2);
  c.max_epochs = 0;
  const auto t = train_gnn(data, data, c);
  EXPECT_TRUE(t.log.epochs.empty());
  const auto init = make_gnn(t.model.triples, 3, c);
  for (std::size_t i = 0; i < init.params.size(); ++i) EXPECT_EQ(t.model.params[i], init.params[i]);
}

TEST(TrainGnn, SameSeedSameLog) {
  const auto data = toy_detection_set(2, 3, 3);
  auto c = small(4, 2);
  c.max_epochs = 3;
  const auto a = train_gnn(data, data, c);
  const auto b = train_gnn(data, data, c);
  EXPECT_EQ(to_csv(a.log), to_csv(b.log));
  EXPECT_EQ(a.log.epochs.size(), 3u);
}

TEST(TrainGnn, LearnsSeparableToySet) {
  const auto train = toy_detection_set(3, 10, 3);
  const auto dev = toy_detection_set(4, 5, 3);
  // The basic update has no self term, so the data nodes reach Damaged only
  // after an odd number of steps.
  auto c = small(8, 3);
  c.max_epochs = 80;
  c.lr = 0.01;
  c.batch_size = 4;
  const auto t = train_gnn(train, dev, c);
  std::size_t correct = 0;
  for (const auto& s : dev) correct += predict_single(s.graph, t.model).state == s.label;
  EXPECT_GE(correct, 9u);
}

TEST(TrainGatedGnn, LearnsSeparableToySetDeterministically) {
  const auto train = toy_detection_set(5, 10, 3);
  const auto dev = toy_detection_set(6, 5, 3);
  auto c = small(8, 2);
  c.max_epochs = 60;
  c.lr = 0.01;
  c.batch_size = 4;
  const auto a = train_gated_gnn(train, dev, c);
  const auto b = train_gated_gnn(train, dev, c);
  EXPECT_EQ(to_csv(a.log), to_csv(b.log));
  std::size_t correct = 0;
  for (const auto& s : dev) correct += predict_single_gated(s.graph, a.model).state == s.label;
  EXPECT_GE(correct, 9u);
}

TEST(Fit, EarlyStopKeepsBestParameters) {
  ParameterSet p;
  p.add("x", Matrix::Constant(1, 1, 3.0));
  // Training pulls x to 0; the dev loss prefers x = 2.
  const SampleObjective train = [](std::size_t, const ParameterSet& q, ParameterSet* g, Rng*) {
    if (g) (*g)[0](0, 0) += 2.0 * q[0](0, 0);
    return SampleResult{q[0](0, 0) * q[0](0, 0), true};
  };
  const SampleObjective dev = [](std::size_t, const ParameterSet& q, ParameterSet*, Rng*) {
    const double d = q[0](0, 0) - 2.0;
    return SampleResult{d * d, true};
  };
  TrainingConfig c;
  c.lr = 0.1;
  c.l2_lambda = 0.0;
  c.patience = 5;
  c.max_epochs = 500;
  const auto log = fit(p, 1, 1, train, dev, c);
  EXPECT_TRUE(log.stopped_early);
  EXPECT_LT(log.epochs.size(), 500u);
  EXPECT_NEAR(p[0](0, 0), 2.0, 0.1);
  EXPECT_EQ(log.epochs[log.best_epoch - 1].dev_loss,
            std::min_element(log.epochs.begin(), log.epochs.end(), [](const auto& a, const auto& b) {
              return a.dev_loss < b.dev_loss;
            })->dev_loss);
}

TEST(Fit, DivergenceReportsEpoch) {
  ParameterSet p;
  p.add("x", Matrix::Constant(1, 1, 1.0));
  const SampleObjective bad = [](std::size_t, const ParameterSet&, ParameterSet*, Rng*) {
    return SampleResult{std::numeric_limits<double>::infinity(), false};
  };
  try {
    fit(p, 1, 0, bad, bad, TrainingConfig{});
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
}

}  // namespace
}  // namespace sfgnn
