#pragma once

#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sfgnn {

/// Six-node fault graph used by the small gradient checks:
/// Gearbox -has-> Ring Gear -has-> AN3; AN3 is-a Accelerometer and causes
/// Healthy and Damaged.
KnowledgeGraph small_fault_graph();

struct GradSuiteOptions {
  std::size_t hidden = 4;
  std::size_t steps = 2;
  std::size_t annotation_dim = 3;
  std::size_t sf_inputs = 8;     // N
  std::size_t sf_features = 4;   // p
  std::size_t sf_examples = 10;  // D
  double l2_lambda = 0.05;
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Multiplies every analytic gradient before comparison; 1 checks the real
  /// reverse pass, anything else must fail.
  double perturb = 1.0;
  std::uint64_t seed = 1;
};

struct GradSuiteResult {
  std::string name;  // sf, gnn, ggnn or ggsnn
  GradCheckResult check;
  double seconds = 0.0;

  bool passed(double tolerance) const noexcept { return check.max_relative_error < tolerance; }
};

GradSuiteResult check_sparse_filter_gradient(const GradSuiteOptions& o);
/// Cross entropy at the Damaged node plus the L2 penalty, T = o.steps.
GradSuiteResult check_gnn_gradient(const GradSuiteOptions& o);
GradSuiteResult check_ggnn_gradient(const GradSuiteOptions& o);
/// Two-step teacher-forced sequence loss.
GradSuiteResult check_ggsnn_gradient(const GradSuiteOptions& o);

/// `names` from {sf, gnn, ggnn, ggsnn}; empty runs all four.
std::vector<GradSuiteResult> run_gradient_suite(const std::vector<std::string>& names,
                                                const GradSuiteOptions& o);

}  // namespace sfgnn
