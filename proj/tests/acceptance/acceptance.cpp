// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include "oracles.hpp"
#include "test_util.hpp"

#include "sfgnn/error.hpp"
#include "sfgnn/gradient_suite.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/pipeline.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace sfgnn;

namespace {

// Tolerances and limits.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSuiteSeconds = 60.0;
constexpr double kNormTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-12;
constexpr double kDetectionTargetPct = 95.0;
constexpr double kDetectionSeconds = 600.0;
constexpr std::size_t kDetectionEpochs = 200;
constexpr double kSequenceTarget = 0.90;
constexpr std::size_t kOverfitEpochs = 500;
constexpr double kSweepMarginPts = 3.0;
constexpr std::size_t kSweepInversions = 1;
constexpr double kNumericsTolerance = 1e-12;
constexpr double kAdamTolerance = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Criterion 1
Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GradSuiteOptions o;
    o.seed = seed;
    for (const auto& r : run_gradient_suite({}, o)) {
      if (r.check.max_relative_error >= worst) {
        worst = r.check.max_relative_error;
        worst_name = r.name;
      }
    }
  }
  const double s = seconds_since(t0);
  return {worst < kGradTolerance && s < kGradSuiteSeconds,
          "max rel err " + fmt(worst) + " (" + worst_name + "), " + fmt(s) + " s"};
}

// Criterion 2
Outcome normalization() {
  Rng rng(2024);
  double worst = 0.0;
  std::size_t bound_failures = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto p = 1 + static_cast<Eigen::Index>(rng.below(6));
    const auto d = 2 + static_cast<Eigen::Index>(rng.below(20));
    SparseFilterModel m;
    m.weights = testing::random_matrix(n, p, rng);
    const Matrix X = testing::random_matrix(n, d, rng);
    const auto rows = normalize_rows(forward(m, X));
    for (Eigen::Index i = 0; i < p; ++i) worst = std::max(worst, std::abs(rows.values.row(i).norm() - 1.0));
    const auto cols = normalize_cols(rows);
    for (Eigen::Index j = 0; j < d; ++j) worst = std::max(worst, std::abs(cols.values.col(j).norm() - 1.0));
    const double J = objective(m, X);
    const double D = static_cast<double>(d);
    if (J < D - kNormTolerance || J > D * std::sqrt(static_cast<double>(p)) + kNormTolerance) ++bound_failures;
  }
  return {worst <= kNormTolerance && bound_failures == 0,
          "max norm deviation " + fmt(worst) + ", bound violations " + std::to_string(bound_failures)};
}

// Criterion 3
Outcome oracle_equivalence() {
  Rng rng(303);
  double worst = 0.0;
  constexpr int kGraphs = 120;
  for (int t = 0; t < kGraphs; ++t) {
    const auto g = testing::random_graph(rng, 10, 3);
    TrainingConfig c;
    c.hidden_size = 4;
    c.steps = 1 + rng.below(3);
    c.seed = static_cast<std::uint64_t>(t);
    GnnModel gnn = make_gnn(g, 3, c);
    for (std::size_t i = 0; i < gnn.params.size(); ++i) {
      gnn.params[i] = testing::random_matrix(gnn.params[i].rows(), gnn.params[i].cols(), rng, 0.7);
    }
    const Matrix x = testing::random_matrix(4, static_cast<Eigen::Index>(g.node_count()), rng);
    worst = std::max(worst, (propagate_step(g, gnn, x) - testing::naive_gnn_step(g, gnn, x)).cwiseAbs().maxCoeff());

    GatedGnnModel ggnn = make_gated_gnn(3, c);
    for (std::size_t i = 0; i < ggnn.params.size(); ++i) {
      ggnn.params[i] = testing::random_matrix(ggnn.params[i].rows(), ggnn.params[i].cols(), rng, 0.7);
    }
    const Matrix fast = ggnn_propagate(g, ggnn, *g.annotations());
    worst = std::max(worst, (fast - testing::naive_ggnn(g, ggnn, *g.annotations())).cwiseAbs().maxCoeff());
  }
  return {worst <= kOracleTolerance, std::to_string(kGraphs) + " graphs, max abs diff " + fmt(worst)};
}

// Criterion 4
Outcome default_graph() {
  const auto g = build_default_graph();
  std::array<std::size_t, kNodeKindCount> counts{};
  std::vector<std::string> data;
  for (const auto& n : g.nodes()) {
    ++counts[static_cast<std::size_t>(n.kind)];
    if (n.kind == NodeKind::kData) data.push_back(n.name);
  }
  std::vector<std::string> sensors(kSensorIds.begin(), kSensorIds.end());
  std::sort(data.begin(), data.end());
  std::sort(sensors.begin(), sensors.end());
  const bool kinds = counts == std::array<std::size_t, kNodeKindCount>{21, 8, 2, 4};
  const bool valid = validate(g).empty();
  const std::string text = serialize(g);
  const auto back = deserialize(text);
  const bool canonical = back == g && serialize(back) == text;
  return {kinds && data == sensors && valid && canonical,
          "kinds " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
              std::to_string(counts[2]) + "/" + std::to_string(counts[3]) + ", valid " +
              (valid ? "yes" : "no") + ", canonical " + (canonical ? "yes" : "no")};
}

TrainingConfig detection_config() {
  TrainingConfig c;
  c.max_epochs = kDetectionEpochs;
  c.seed = 7;
  return c;
}

struct Benchmark {
  PreparedFeatures features;
  double sf_seconds = 0.0;
};

Benchmark benchmark_features() {
  DataOptions o;  // 1000 segments per class, gain 5, seed 7
  const auto corpus = generate_corpus(o);
  FeatureOptions f;  // p = 100
  f.seed = 7;
  const auto t0 = std::chrono::steady_clock::now();
  Benchmark b{prepare_features(corpus, f), 0.0};
  b.sf_seconds = seconds_since(t0);
  return b;
}

// Criterion 5
Outcome end_to_end(const Benchmark& b, ExperimentReport& ggnn) {
  const auto t0 = std::chrono::steady_clock::now();
  ggnn = run_model(ModelKind::kGgnn, build_default_graph(), b.features, detection_config()).report;
  const double s = b.sf_seconds + seconds_since(t0);
  return {ggnn.accuracy_pct >= kDetectionTargetPct && s < kDetectionSeconds && ggnn.epochs <= kDetectionEpochs,
          "sf-ggnn " + fmt(ggnn.accuracy_pct, 4) + "% after " + std::to_string(ggnn.epochs) + " epochs, " +
              fmt(s) + " s"};
}

// Criterion 6
Outcome model_ordering(const Benchmark& b, const ExperimentReport& ggnn) {
  const auto base = build_default_graph();
  const auto gnn = run_model(ModelKind::kGnn, base, b.features, detection_config()).report;
  const auto soft = run_model(ModelKind::kSoftmax, base, b.features, detection_config()).report;
  return {gnn.accuracy_pct >= soft.accuracy_pct && ggnn.accuracy_pct >= soft.accuracy_pct,
          "sf-gnn " + fmt(gnn.accuracy_pct, 4) + "%, sf-ggnn " + fmt(ggnn.accuracy_pct, 4) + "%, sf-softmax " +
              fmt(soft.accuracy_pct, 4) + "%"};
}

// Criterion 7
Outcome sequences(const Benchmark& b) {
  const auto base = build_default_graph();
  const auto train = fault_examples(base, b.features.splits.train);
  const auto dev = fault_examples(base, b.features.splits.dev);
  const auto test = fault_examples(base, b.features.splits.test);

  const auto untrained = evaluate_sequences(make_sequence_model(100, base.node_count(), detection_config()), test);
  const auto trained = train_ggsnn(train, dev, detection_config());
  const auto ev = evaluate_sequences(trained.model, test);

  TrainingConfig single = detection_config();
  single.max_epochs = kOverfitEpochs;
  single.patience = kOverfitEpochs;
  single.l2_lambda = 0.0;
  single.dropout_p = 0.0;
  single.lr = 0.01;
  const std::vector<SequenceExample> one{train.front()};
  const auto overfit = evaluate_sequences(train_ggsnn(one, {}, single).model, one);

  const bool grammar = untrained.grammar_valid == untrained.total && ev.grammar_valid == ev.total;
  return {grammar && ev.mean_accuracy >= kSequenceTarget && overfit.mean_accuracy == 1.0,
          "grammar-valid " + std::to_string(ev.grammar_valid + untrained.grammar_valid) + "/" +
              std::to_string(ev.total + untrained.total) + ", sequence accuracy " + fmt(ev.mean_accuracy, 4) +
              ", single-example " + fmt(overfit.mean_accuracy, 4)};
}

// Criterion 8
Outcome dimension_sweep() {
  const auto corpus = generate_corpus(DataOptions{});
  FeatureOptions f;
  f.seed = 7;
  const std::vector<std::size_t> dims = {50, 100, 300, 500};
  const auto reports = run_dimension_sweep(dims, corpus, f, detection_config());
  std::size_t inversions = 0;
  double best = 0.0, at100 = 0.0;
  std::string detail;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i > 0 && reports[i].runtime_s < reports[i - 1].runtime_s) ++inversions;
    best = std::max(best, reports[i].accuracy_pct);
    if (reports[i].p == 100) at100 = reports[i].accuracy_pct;
    detail += (i ? ", p=" : "p=") + std::to_string(reports[i].p) + " " + fmt(reports[i].accuracy_pct, 4) + "% " +
              fmt(reports[i].runtime_s) + " s";
  }
  return {inversions <= kSweepInversions && best - at100 <= kSweepMarginPts, detail};
}

// Criterion 9
Outcome numerics() {
  std::vector<std::string> failed;
  if (std::abs(log_sigmoid(0.0) + std::log(2.0)) > kNumericsTolerance) failed.push_back("log_sigmoid(0)");
  const double hi = log_sigmoid(1000.0), lo = log_sigmoid(-1000.0);
  if (!std::isfinite(hi) || !std::isfinite(lo) || std::abs(hi) > kNumericsTolerance ||
      std::abs(lo + 1000.0) > kNumericsTolerance) {
    failed.push_back("log_sigmoid(+-1000)");
  }
  for (std::size_t c = 2; c <= 10; ++c) {
    if (std::abs(cross_entropy(Vector::Zero(static_cast<Eigen::Index>(c)), 0).loss -
                 std::log(static_cast<double>(c))) > kNumericsTolerance) {
      failed.push_back("uniform cross entropy C=" + std::to_string(c));
    }
  }
  {
    Rng rng(9);
    ParameterSet p;
    p.add("w", Matrix::Zero(3, 4));
    ParameterSet g = p.zeros_like();
    g[0] = testing::random_matrix(3, 4, rng);
    AdamState s = AdamState::for_parameters(p, AdamConfig{0.01});
    adam_step(s, p, g);
    // t = 1: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
    const Matrix expected = -0.01 * g[0].array() / (g[0].array().abs() + 1e-8);
    if ((p[0] - expected).cwiseAbs().maxCoeff() > kAdamTolerance) failed.push_back("adam first step");
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    if (glorot_init(3, 3, seed).cwiseAbs().maxCoeff() > 1.0) {
      failed.push_back("glorot 3x3 bound");
      break;
    }
  }
  std::vector<double> history;
  for (std::size_t n = 1; n <= 21; ++n) {
    history.push_back(0.5);
    const bool stop = early_stop(history, 20) == StopDecision::kStop;
    if (stop != (n == 21)) {
      failed.push_back("early_stop at " + std::to_string(n));
      break;
    }
  }
  std::string detail = failed.empty() ? "all checks hold" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

// Criterion 10
#ifdef SFGNN_CLI_PATH
int sh(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(SFGNN_CLI_PATH) + " " + args + " > '" + stdout_file.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("sfgnn_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::string> diffs;
  int failures = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path r = root / run;
    failures += sh("gen-data --segments 96 --segment-len 1024 --out " + (r / "data").string(), r.string() + ".gen");
    for (const char* model : {"ggnn", "ggsnn"}) {
      const fs::path out = r / model;
      failures += sh("train --data " + (r / "data").string() + " --model " + model +
                         " --features 16 --sf-iterations 10 --hidden 8 --epochs 5 --out " + out.string(),
                     out.string() + ".train");
      failures += sh("detect --format json --checkpoint " + (out / "checkpoint.bin").string() + " --graph " +
                         (out / "test" / "graph_0000.txt").string() + " --out " + (out / "detect").string(),
                     out.string() + ".detect");
    }
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    const auto name = rel.filename().string();
    // Wall-clock fields live in the manifests, report.json and the train summary.
    if (name == "manifest.json" || name == "report.json" || name.ends_with(".train")) continue;
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / rel)) diffs.push_back(rel.string());
  }
  for (const char* model : {"ggnn", "ggsnn"}) {
    auto strip = [](std::string s) {
      std::istringstream in(s);
      std::string line, out;
      while (std::getline(in, line)) {
        if (line.find("runtime_s") == std::string::npos) out += line + "\n";
      }
      return out;
    };
    if (strip(slurp(root / "a" / model / "report.json")) != strip(slurp(root / "b" / model / "report.json"))) {
      diffs.push_back(std::string(model) + "/report.json");
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared) + " files compared, " + std::to_string(failures) + " failed commands";
  for (const auto& d : diffs) detail += ", differs: " + d;
  return {failures == 0 && diffs.empty() && compared > 0, detail};
}
#else
Outcome determinism() { return {false, "CLI not built"}; }
#endif

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail
              << "] (" << fmt(seconds_since(t0)) << " s)" << std::endl;
  };

  report(1, "gradient suite", gradient_suite);
  report(2, "normalization invariants", normalization);
  report(3, "oracle equivalence", oracle_equivalence);
  report(4, "default graph", default_graph);

  std::optional<Benchmark> bench;
  ExperimentReport ggnn;
  report(5, "end-to-end detection", [&] {
    bench = benchmark_features();
    return end_to_end(*bench, ggnn);
  });
  report(6, "model ordering", [&] { return bench ? model_ordering(*bench, ggnn) : Outcome{false, "no benchmark"}; });
  report(7, "sequence output", [&] { return bench ? sequences(*bench) : Outcome{false, "no benchmark"}; });
  bench.reset();
  report(8, "dimension sweep", dimension_sweep);
  report(9, "numerics", numerics);
  report(10, "determinism", determinism);

  std::cout << (failed == 0 ? "all criteria PASS" : std::to_string(failed) + " criteria FAIL") << std::endl;
  return failed == 0 ? 0 : 1;
}
