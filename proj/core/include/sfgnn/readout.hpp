#pragma once

#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/signal_source.hpp"

#include <cstddef>
#include <cstdint>

namespace sfgnn {

/// Adds `readout.w1` (hidden x (state_dim + 4)), `readout.b1`, `readout.w2`
/// (2 x hidden) and `readout.b2`. Weights are Glorot-initialized, biases zero.
void add_readout_parameters(ParameterSet& params, std::size_t state_dim, std::size_t hidden,
                            std::uint64_t seed);

struct ReadoutTape {
  Vector input;   // [state; one-hot node kind]
  Vector pre;     // hidden pre-activation
  Vector hidden;  // log-sigmoid activation after dropout
  Vector mask;    // dropout mask (all ones at inference)
};

/// Two-layer classifier: log_sigmoid(W1 [state; onehot(label)] + b1), then
/// W2 h + b2. Returns the two class scores (Healthy, Damaged).
Vector readout(const ParameterSet& params, const Vector& state, NodeKind label);

/// As `readout`, applying `mask` to the hidden layer when non-null and
/// recording intermediates in `tape` when non-null.
Vector readout_forward(const ParameterSet& params, const Vector& state, NodeKind label,
                       const Vector* mask, ReadoutTape* tape);

/// Accumulates readout gradients into `grads` and returns d(loss)/d(state).
Vector readout_backward(const ParameterSet& params, ParameterSet& grads, const ReadoutTape& tape,
                        const Vector& d_scores);

struct Detection {
  HealthState state = HealthState::kHealthy;
  Vector probabilities;  // (Healthy, Damaged)
};

/// Softmax of the two scores; Damaged only when its probability is strictly
/// larger, so exact ties resolve to Healthy.
Detection decide(const Vector& scores);

}  // namespace sfgnn
