#include "sfgnn/numerics.hpp"

#include "sfgnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfgnn {

void TrainingConfig::validate() const {
  require(hidden_size >= 1, ErrorCode::kParameter, "hidden_size must be >= 1");
  require(lr > 0.0, ErrorCode::kParameter, "lr must be positive");
  require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorCode::kParameter,
          "dropout must lie in [0, 1)");
  require(l2_lambda >= 0.0, ErrorCode::kParameter, "l2 lambda must be >= 0");
  require(patience >= 1, ErrorCode::kParameter, "patience must be >= 1");
  require(steps >= 1, ErrorCode::kParameter, "propagation steps must be >= 1");
  require(batch_size >= 1, ErrorCode::kParameter, "batch size must be >= 1");
}

Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  require(rows >= 1 && cols >= 1, ErrorCode::kParameter, "glorot_init needs rows, cols >= 1");
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(seed, streams::kGlorot);
  Matrix w(rows, cols);
  // Row-major fill so the draw order matches the on-disk layout.
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-a, a);
  }
  return w;
}

double log_sigmoid(double x) noexcept { return std::min(0.0, x) - std::log1p(std::exp(-std::abs(x))); }

Vector log_sigmoid(const Vector& x) {
  return x.unaryExpr([](double v) { return log_sigmoid(v); });
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector softmax(const Vector& scores) {
  const double m = scores.maxCoeff();
  Vector e = (scores.array() - m).exp().matrix();
  return e / e.sum();
}

LossAndGrad cross_entropy(const Vector& scores, std::size_t target) {
  require(target < static_cast<std::size_t>(scores.size()), ErrorCode::kParameter,
          "target class " + std::to_string(target) + " out of range");
  require(scores.allFinite(), ErrorCode::kParameter, "scores must be finite");
  const double m = scores.maxCoeff();
  const double lse = m + std::log((scores.array() - m).exp().sum());
  LossAndGrad out;
  out.loss = lse - scores(static_cast<Eigen::Index>(target));
  out.grad = (scores.array() - lse).exp().matrix();
  out.grad(static_cast<Eigen::Index>(target)) -= 1.0;
  return out;
}

AdamState AdamState::for_parameters(const ParameterSet& params, AdamConfig config) {
  require(config.lr > 0.0, ErrorCode::kParameter, "adam lr must be positive");
  require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
          ErrorCode::kParameter, "adam betas must lie in [0, 1)");
  AdamState s;
  s.config = config;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  return s;
}

void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads) {
  require(params.same_layout(grads) && params.same_layout(state.first_moment), ErrorCode::kShape,
          "adam_step: parameter, gradient and state layouts differ");
  const auto& c = state.config;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    params[i].array() -=
        c.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + c.eps);
  }
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng, bool training) {
  require(p >= 0.0 && p < 1.0, ErrorCode::kParameter, "dropout p must lie in [0, 1)");
  Matrix mask = Matrix::Ones(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (!training || p == 0.0) return mask;
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) mask(r, c) = rng.uniform() < p ? 0.0 : keep;
  }
  return mask;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, std::uint64_t seed,
                    bool training) {
  Rng rng(seed, streams::kDropout);
  return dropout_mask(rows, cols, p, rng, training);
}

PenaltyAndGrad l2_penalty(const ParameterSet& params, double lambda) {
  require(lambda >= 0.0, ErrorCode::kParameter, "l2 lambda must be >= 0");
  PenaltyAndGrad out{0.0, params.zeros_like()};
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.regularized(i)) continue;
    out.loss += 0.5 * lambda * params[i].squaredNorm();
    out.grads[i] = lambda * params[i];
  }
  return out;
}

StopDecision early_stop(std::span<const double> history, std::size_t patience) {
  require(patience >= 1, ErrorCode::kParameter, "patience must be >= 1");
  if (history.size() < patience + 1) return StopDecision::kContinue;
  const auto split = history.end() - static_cast<std::ptrdiff_t>(patience);
  const double best_before = *std::min_element(history.begin(), split);
  const double best_recent = *std::min_element(split, history.end());
  return best_recent < best_before - 1e-12 ? StopDecision::kContinue : StopDecision::kStop;
}

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<double(const ParameterSet&)>& f,
                           const ParameterSet& params, const ParameterSet& analytic, double h) {
  require(h > 0.0, ErrorCode::kParameter, "finite-difference step must be positive");
  require(params.same_layout(analytic), ErrorCode::kShape,
          "grad_check: analytic gradient layout differs from parameters");
  GradCheckResult result;
  ParameterSet probe = params;
  std::size_t coordinate = 0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    TensorCheck check{probe.name(i), 0.0};
    Matrix& w = probe[i];
    for (Eigen::Index k = 0; k < w.size(); ++k, ++coordinate) {
      const double saved = w.data()[k];
      w.data()[k] = saved + h;
      const double up = f(probe);
      w.data()[k] = saved - h;
      const double down = f(probe);
      w.data()[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw DivergenceError(coordinate, "non-finite objective in gradient check of '" +
                                              probe.name(i) + "'");
      }
      const double numeric = (up - down) / (2.0 * h);
      check.max_relative_error =
          std::max(check.max_relative_error, relative_error(analytic[i].data()[k], numeric));
    }
    result.max_relative_error = std::max(result.max_relative_error, check.max_relative_error);
    result.tensors.push_back(std::move(check));
  }
  return result;
}

}  // namespace sfgnn
