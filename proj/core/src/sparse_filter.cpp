#include "sfgnn/sparse_filter.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"
#include "sfgnn/numerics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sfgnn {
namespace {

void check_shapes(const SparseFilterModel& model, const Matrix& X) {
  model.validate();
  require(static_cast<std::size_t>(X.rows()) == model.input_dim(), ErrorCode::kShape,
          "data has " + std::to_string(X.rows()) + " rows, model expects " +
              std::to_string(model.input_dim()));
  require(X.cols() >= 1, ErrorCode::kShape, "data matrix has no examples");
}

// Forward pass with every intermediate kept for the reverse pass.
struct Tape {
  Matrix response;    // Y = W^T X
  Matrix soft_abs;    // F
  Vector row_norms;   // ||F_i||
  Matrix row_normed;  // G
  Vector col_norms;   // ||G^d||
  Matrix normalized;  // Hn
};

Tape run_forward(const SparseFilterModel& model, const Matrix& X) {
  Tape t;
  t.response.noalias() = model.weights.transpose() * X;
  t.soft_abs = (t.response.array().square() + model.epsilon).sqrt().matrix();
  t.row_norms = t.soft_abs.rowwise().norm();
  t.row_normed = t.row_norms.cwiseInverse().asDiagonal() * t.soft_abs;
  t.col_norms = t.row_normed.colwise().norm().transpose();
  t.normalized = t.row_normed * t.col_norms.cwiseInverse().asDiagonal();
  return t;
}

}  // namespace

void SparseFilterModel::validate() const {
  require(weights.rows() >= 1 && weights.cols() >= 1, ErrorCode::kShape,
          "sparse filter weights must be non-empty");
  require(epsilon > 0.0, ErrorCode::kParameter, "epsilon must be positive");
  require(weights.allFinite(), ErrorCode::kState, "sparse filter weights are not finite");
}

FeatureMatrix forward(const SparseFilterModel& model, const Matrix& X) {
  check_shapes(model, X);
  Matrix response = model.weights.transpose() * X;
  return {(response.array().square() + model.epsilon).sqrt().matrix(), FeatureStage::kRaw};
}

FeatureMatrix normalize_rows(FeatureMatrix F) {
  require(F.stage == FeatureStage::kRaw, ErrorCode::kState, "normalize_rows expects raw features");
  const Vector norms = F.values.rowwise().norm();
  require((norms.array() > 0.0).all(), ErrorCode::kState, "feature row with zero norm");
  F.values = norms.cwiseInverse().asDiagonal() * F.values;
  F.stage = FeatureStage::kRowNormalized;
  return F;
}

FeatureMatrix normalize_cols(FeatureMatrix F) {
  require(F.stage == FeatureStage::kRowNormalized, ErrorCode::kState,
          "normalize_cols expects row-normalized features");
  const Vector norms = F.values.colwise().norm().transpose();
  require((norms.array() > 0.0).all(), ErrorCode::kState, "feature column with zero norm");
  F.values = F.values * norms.cwiseInverse().asDiagonal();
  F.stage = FeatureStage::kFullyNormalized;
  return F;
}

double objective(const SparseFilterModel& model, const Matrix& X) {
  check_shapes(model, X);
  return run_forward(model, X).normalized.sum();
}

ObjectiveAndGrad objective_and_grad(const SparseFilterModel& model, const Matrix& X) {
  check_shapes(model, X);
  const Tape t = run_forward(model, X);

  // d/dG of sum(G^d / ||G^d||) per column: (1 - Hn^d * sum(Hn^d)) / ||G^d||.
  const Eigen::RowVectorXd col_sums = t.normalized.colwise().sum();
  Matrix d_row_normed =
      (Matrix::Ones(t.normalized.rows(), t.normalized.cols()) -
       t.normalized * col_sums.asDiagonal()) *
      t.col_norms.cwiseInverse().asDiagonal();

  // Row normalization: dF_i = (dG_i - G_i (G_i . dG_i)) / ||F_i||.
  const Vector row_dots = t.row_normed.cwiseProduct(d_row_normed).rowwise().sum();
  Matrix d_soft_abs = t.row_norms.cwiseInverse().asDiagonal() *
                      (d_row_normed - row_dots.asDiagonal() * t.row_normed);

  // Soft absolute value: dY = dF * Y / F.
  const Matrix d_response = d_soft_abs.cwiseProduct(t.response).cwiseQuotient(t.soft_abs);

  ObjectiveAndGrad out;
  out.value = t.normalized.sum();
  out.grad.noalias() = X * d_response.transpose();
  return out;
}

Matrix objective_grad(const SparseFilterModel& model, const Matrix& X) {
  return objective_and_grad(model, X).grad;
}

SparseFilterModel train_sparse_filter(const Matrix& X, std::size_t p, std::size_t max_iters,
                                      std::uint64_t seed, const SparseFilterOptions& options,
                                      SparseFilterTrace* trace) {
  require(X.cols() >= 2, ErrorCode::kParameter, "sparse filtering needs at least 2 examples");
  require(p >= 1, ErrorCode::kParameter, "feature count p must be >= 1");
  require(X.allFinite(), ErrorCode::kParameter, "data matrix contains non-finite values");

  SparseFilterModel model;
  model.seed = seed;
  model.weights = glorot_init(static_cast<std::size_t>(X.rows()), p, seed);

  ParameterSet params;
  params.add("weights", model.weights);
  ParameterSet grads = params.zeros_like();
  AdamState adam = AdamState::for_parameters(params, AdamConfig{options.lr});

  SparseFilterTrace local;
  SparseFilterTrace& tr = trace ? *trace : local;
  tr = {};

  Matrix best = model.weights;
  double best_value = 0.0;
  double previous = 0.0;
  for (std::size_t iter = 0;; ++iter) {
    model.weights = params[0];
    ObjectiveAndGrad og = objective_and_grad(model, X);
    if (!std::isfinite(og.value) || !og.grad.allFinite()) {
      throw DivergenceError(iter, "sparse filtering objective is not finite");
    }
    tr.objective.push_back(og.value);
    if (options.on_iteration) options.on_iteration(iter, og.value, model.weights);
    if (iter == 0 || og.value < best_value) {
      best_value = og.value;
      best = model.weights;
    }
    if (iter > 0 && std::abs(previous - og.value) < options.tolerance * std::abs(previous)) {
      tr.converged = true;
      break;
    }
    if (iter == max_iters) break;
    previous = og.value;
    grads[0] = std::move(og.grad);
    adam_step(adam, params, grads);
    ++tr.iterations;
  }
  model.weights = std::move(best);
  return model;
}

Matrix to_data_matrix(const SegmentSet& set) {
  set.validate();
  const auto n = static_cast<Eigen::Index>(set.segment_length());
  Matrix X(n, static_cast<Eigen::Index>(set.size()));
  for (std::size_t d = 0; d < set.size(); ++d) {
    X.col(static_cast<Eigen::Index>(d)) =
        Eigen::Map<const Vector>(set.segments[d].samples.data(), n);
  }
  return X;
}

SensorFeatures extract_features(const SparseFilterModel& model, const SegmentSet& set) {
  require(!set.empty(), ErrorCode::kParameter, "cannot extract features from an empty set");
  require(set.segment_length() == model.input_dim(), ErrorCode::kShape,
          "segment length " + std::to_string(set.segment_length()) +
              " does not match model input dimension " + std::to_string(model.input_dim()));
  const FeatureMatrix F = normalize_cols(normalize_rows(forward(model, to_data_matrix(set))));
  SensorFeatures out;
  for (std::size_t d = 0; d < set.size(); ++d) {
    out[set.segments[d].sensor_id].push_back(F.values.col(static_cast<Eigen::Index>(d)));
  }
  return out;
}

SparsityStats sparsity_stats(const FeatureMatrix& normalized) {
  const auto& v = normalized.values;
  SparsityStats s;
  s.population = v.cwiseAbs().colwise().sum().transpose();
  s.lifetime = v.cwiseAbs().rowwise().sum();
  s.dispersal = v.array().square().colwise().mean().transpose();
  return s;
}

void save_model(const std::filesystem::path& path, const SparseFilterModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "sparse-filter " << model.input_dim() << ' ' << model.feature_count() << ' '
      << io::format_double(model.epsilon) << ' ' << model.seed << '\n';
  io::write_matrix_le(out, model.weights);
}

SparseFilterModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  std::size_t n = 0, p = 0;
  SparseFilterModel model;
  hs >> magic >> n >> p >> model.epsilon >> model.seed;
  require(!hs.fail() && magic == "sparse-filter" && n >= 1 && p >= 1, ErrorCode::kFormat,
          "'" + path.string() + "' is not a sparse filter model");
  model.weights.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  io::read_matrix_le(in, model.weights);
  model.validate();
  return model;
}

void write_features_csv(const std::filesystem::path& path, const std::vector<Vector>& features) {
  std::ostringstream ss;
  for (const auto& f : features) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (i) ss << ',';
      ss << io::format_double(f(i));
    }
    ss << '\n';
  }
  io::write_text_file(path, ss.str());
}

}  // namespace sfgnn
