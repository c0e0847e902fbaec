#pragma once

#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/parameters.hpp"
#include "sfgnn/propagation.hpp"
#include "sfgnn/sequence.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

enum class ModelKind { kGnn, kGgnn, kGgsnn, kSoftmax };

std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view text);

/// Trained parameters of any model plus the sizes needed to rebuild it.
///
/// File layout: a text header
///
///   sfgnn-checkpoint 1
///   model <gnn|ggnn|ggsnn|softmax>
///   hidden <H>
///   steps <T>
///   input_dim <D>
///   node_count <V>
///   triple <target:edge:direction:neighbor>      (zero or more)
///   tensor <name> <rows> <cols> <regularized>    (one per tensor)
///   end
///
/// followed by every tensor, in header order, as row-major little-endian
/// binary64.
struct Checkpoint {
  ModelKind kind = ModelKind::kGnn;
  std::size_t hidden_size = 0;
  std::size_t steps = 0;
  std::size_t input_dim = 0;
  std::size_t node_count = 0;
  std::vector<LabelTriple> triples;
  ParameterSet params;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint to_checkpoint(const GnnModel& m);
Checkpoint to_checkpoint(const GatedGnnModel& m);
Checkpoint to_checkpoint(const SequenceModel& m);

/// Throw kConfiguration naming the expected and found model kinds when the
/// checkpoint holds a different model.
GnnModel gnn_from(const Checkpoint& c);
GatedGnnModel gated_gnn_from(const Checkpoint& c);
SequenceModel sequence_model_from(const Checkpoint& c);

void require_kind(const Checkpoint& c, ModelKind expected);

}  // namespace sfgnn
