#pragma once

#include "sfgnn/parameters.hpp"
#include "sfgnn/signal_source.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sfgnn {

inline constexpr double kSoftAbsEpsilon = 1e-8;
inline constexpr std::size_t kDefaultFeatureCount = 100;

/// Learned filter bank. `weights` is N x p: column i is filter i applied to
/// an N-sample segment.
struct SparseFilterModel {
  Matrix weights;
  double epsilon = kSoftAbsEpsilon;
  std::uint64_t seed = 0;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  std::size_t feature_count() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  void validate() const;
};

enum class FeatureStage { kRaw, kRowNormalized, kFullyNormalized };

/// p x D feature matrix: row i is feature i, column d is example d.
struct FeatureMatrix {
  Matrix values;
  FeatureStage stage = FeatureStage::kRaw;
};

/// F(i, d) = sqrt((w_i . x_d)^2 + epsilon), the soft absolute value of the
/// linear filter response. X is N x D.
FeatureMatrix forward(const SparseFilterModel& model, const Matrix& X);

/// Divides each feature row by its L2 norm across examples.
FeatureMatrix normalize_rows(FeatureMatrix F);

/// Divides each example column by its L2 norm across features.
FeatureMatrix normalize_cols(FeatureMatrix F);

/// Sum over examples of the L1 norm of the fully normalized feature column.
double objective(const SparseFilterModel& model, const Matrix& X);

/// Gradient of `objective` with respect to the weights (N x p).
Matrix objective_grad(const SparseFilterModel& model, const Matrix& X);

struct ObjectiveAndGrad {
  double value = 0.0;
  Matrix grad;
};
ObjectiveAndGrad objective_and_grad(const SparseFilterModel& model, const Matrix& X);

struct SparseFilterOptions {
  double lr = 0.001;
  double tolerance = 1e-8;  // stop when the relative improvement drops below this
  /// Called after evaluating the objective at iteration `iter`, before the
  /// update, with the weights that produced it. Iteration 0 is the
  /// initialization.
  std::function<void(std::size_t iter, double objective, const Matrix& weights)> on_iteration;
};

struct SparseFilterTrace {
  std::vector<double> objective;  // one entry per evaluated iterate
  std::size_t iterations = 0;     // Adam updates performed
  bool converged = false;
};

/// Glorot-initialized weights refined by Adam for at most `max_iters` updates.
/// Returns the iterate with the lowest objective, so the result never scores
/// worse than the initialization. Throws DivergenceError on a non-finite
/// objective.
SparseFilterModel train_sparse_filter(const Matrix& X, std::size_t p, std::size_t max_iters,
                                      std::uint64_t seed, const SparseFilterOptions& options = {},
                                      SparseFilterTrace* trace = nullptr);

/// Column-per-segment data matrix (N x D) in set order.
Matrix to_data_matrix(const SegmentSet& set);

using SensorFeatures = std::map<std::string, std::vector<Vector>>;

/// Fully normalized feature vector of every segment, grouped by sensor in set
/// order. Normalization statistics are computed jointly over the whole set.
SensorFeatures extract_features(const SparseFilterModel& model, const SegmentSet& set);

/// Population sparsity (column L1 norms), lifetime sparsity (row L1 norms)
/// and dispersal (mean squared activation per column, 1/p after full
/// normalization) of a feature matrix. Reported only; no thresholds apply.
struct SparsityStats {
  Vector population;  // length D
  Vector lifetime;    // length p
  Vector dispersal;   // length D
};
SparsityStats sparsity_stats(const FeatureMatrix& normalized);

/// Text header `sparse-filter <N> <p> <epsilon> <seed>` followed by a newline
/// and the weights as row-major little-endian binary64.
void save_model(const std::filesystem::path& path, const SparseFilterModel& model);
SparseFilterModel load_model(const std::filesystem::path& path);

/// One row per segment, p comma-separated columns.
void write_features_csv(const std::filesystem::path& path, const std::vector<Vector>& features);

}  // namespace sfgnn
