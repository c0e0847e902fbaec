#include "sfgnn/readout.hpp"

#include "sfgnn/error.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/rng.hpp"

namespace sfgnn {

void add_readout_parameters(ParameterSet& params, std::size_t state_dim, std::size_t hidden,
                            std::uint64_t seed) {
  const std::size_t in = state_dim + kNodeKindCount;
  params.add("readout.w1", glorot_init(hidden, in, derive_seed(seed, params.size())));
  params.add("readout.b1", Matrix::Zero(static_cast<Eigen::Index>(hidden), 1), false);
  params.add("readout.w2", glorot_init(2, hidden, derive_seed(seed, params.size())));
  params.add("readout.b2", Matrix::Zero(2, 1), false);
}

Vector readout(const ParameterSet& params, const Vector& state, NodeKind label) {
  return readout_forward(params, state, label, nullptr, nullptr);
}

Vector readout_forward(const ParameterSet& params, const Vector& state, NodeKind label,
                       const Vector* mask, ReadoutTape* tape) {
  const Matrix& w1 = params.at("readout.w1");
  const Matrix& b1 = params.at("readout.b1");
  const Matrix& w2 = params.at("readout.w2");
  const Matrix& b2 = params.at("readout.b2");
  const auto h = state.size();
  require(w1.cols() == h + static_cast<Eigen::Index>(kNodeKindCount), ErrorCode::kShape,
          "readout expects a state of length " +
              std::to_string(w1.cols() - static_cast<Eigen::Index>(kNodeKindCount)) + ", got " +
              std::to_string(h));

  Vector input = Vector::Zero(w1.cols());
  input.head(h) = state;
  input(h + static_cast<Eigen::Index>(label)) = 1.0;
  Vector pre = w1 * input + b1.col(0);
  Vector hidden = log_sigmoid(pre);
  if (mask) {
    require(mask->size() == hidden.size(), ErrorCode::kShape, "dropout mask length mismatch");
    hidden = hidden.cwiseProduct(*mask);
  }
  Vector scores = w2 * hidden + b2.col(0);
  if (tape) {
    tape->input = std::move(input);
    tape->pre = std::move(pre);
    tape->hidden = std::move(hidden);
    tape->mask = mask ? *mask : Vector::Ones(tape->pre.size());
  }
  return scores;
}

Vector readout_backward(const ParameterSet& params, ParameterSet& grads, const ReadoutTape& tape,
                        const Vector& d_scores) {
  const Matrix& w1 = params.at("readout.w1");
  const Matrix& w2 = params.at("readout.w2");
  grads.at("readout.w2").noalias() += d_scores * tape.hidden.transpose();
  grads.at("readout.b2").col(0) += d_scores;
  // d log_sigmoid(u) / du = sigmoid(-u).
  const Vector sig_neg = (-tape.pre).unaryExpr([](double u) { return sigmoid(u); });
  const Vector d_pre = (w2.transpose() * d_scores).cwiseProduct(tape.mask).cwiseProduct(sig_neg);
  grads.at("readout.w1").noalias() += d_pre * tape.input.transpose();
  grads.at("readout.b1").col(0) += d_pre;
  const auto h = tape.input.size() - static_cast<Eigen::Index>(kNodeKindCount);
  return w1.leftCols(h).transpose() * d_pre;
}

Detection decide(const Vector& scores) {
  require(scores.size() == 2, ErrorCode::kShape, "detection needs exactly two class scores");
  Detection d;
  d.probabilities = softmax(scores);
  d.state = d.probabilities(1) > d.probabilities(0) ? HealthState::kDamaged : HealthState::kHealthy;
  return d;
}

}  // namespace sfgnn
