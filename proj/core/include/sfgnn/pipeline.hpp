#pragma once

#include "sfgnn/checkpoint.hpp"
#include "sfgnn/evaluation.hpp"
#include "sfgnn/gated_gnn.hpp"
#include "sfgnn/gnn.hpp"
#include "sfgnn/knowledge_graph.hpp"
#include "sfgnn/sequence.hpp"
#include "sfgnn/signal_source.hpp"
#include "sfgnn/sparse_filter.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sfgnn {

struct DataOptions {
  std::size_t segments_per_class = 1000;  // across all eight sensors
  std::size_t segment_length = kDefaultSegmentLength;
  double sample_rate = kDefaultSampleRate;
  double impulse_rate = kDefaultImpulseRate;
  double impulse_gain = kDefaultImpulseGain;
  std::uint64_t seed = 7;
  std::vector<std::string> sensors{kSensorIds.begin(), kSensorIds.end()};
};

struct SensorRecording {
  std::string sensor;
  SegmentSet healthy;
  SegmentSet damaged;
};

/// One recording pair per sensor; each class gets segments_per_class
/// segments split evenly over the sensors.
std::vector<SensorRecording> generate_corpus(const DataOptions& options);

/// Directories `<sensor>_healthy` and `<sensor>_damaged` under `dir`.
void write_corpus(const std::filesystem::path& dir, const std::vector<SensorRecording>& corpus);
std::vector<SensorRecording> read_corpus(const std::filesystem::path& dir);

struct FeatureOptions {
  std::size_t features = kDefaultFeatureCount;
  std::size_t sf_iterations = 40;
  double sf_lr = 0.001;
  std::uint64_t seed = 7;
};

/// Sparse-filtering features of one split, per sensor and class, in split
/// order.
struct FeatureSplit {
  std::map<std::string, std::vector<Vector>> healthy;
  std::map<std::string, std::vector<Vector>> damaged;
};

struct PreparedFeatures {
  SparseFilterModel sf;
  SparseFilterTrace sf_trace;
  Split<FeatureSplit> splits;
  double sf_seconds = 0.0;
};

/// Splits every recording 60/20/20, trains sparse filtering on all training
/// segments and extracts features split by split.
PreparedFeatures prepare_features(const std::vector<SensorRecording>& corpus,
                                  const FeatureOptions& options);

/// Graph i of each class carries the i-th feature vector of every sensor.
std::vector<LabeledGraph> detection_graphs(const KnowledgeGraph& base, const FeatureSplit& split);

/// Graph i has sensor (i mod 8) damaged and the others healthy; the target
/// is that sensor's fault sequence.
std::vector<SequenceExample> fault_examples(const KnowledgeGraph& base, const FeatureSplit& split);

/// Per-segment features with labels, sensors in order.
LabeledFeatures segment_features(const FeatureSplit& split);

struct ModelRun {
  ExperimentReport report;
  Checkpoint checkpoint;
  TrainingLog log;
};

/// Trains `kind` on the train split (early stopping on dev) and reports test
/// accuracy: graph-level for gnn and ggnn, per segment for softmax and mean
/// sequence accuracy for ggsnn.
ModelRun run_model(ModelKind kind, const KnowledgeGraph& base, const PreparedFeatures& data,
                   const TrainingConfig& config);

/// Sequence accuracy of every example plus the grammar check of the outputs.
struct SequenceEvaluation {
  double mean_accuracy = 0.0;
  std::size_t grammar_valid = 0;
  std::size_t total = 0;
};
SequenceEvaluation evaluate_sequences(const SequenceModel& m, const std::vector<SequenceExample>& data);

ConfusionMatrix evaluate_detection(const std::vector<LabeledGraph>& data, const Checkpoint& c);

/// SF followed by one model per feature count. Runtime covers sparse
/// filtering, model training and test inference. Needs at least two values.
std::vector<ExperimentReport> run_dimension_sweep(const std::vector<std::size_t>& dims,
                                                  const std::vector<SensorRecording>& corpus,
                                                  const FeatureOptions& features,
                                                  const TrainingConfig& config,
                                                  ModelKind kind = ModelKind::kGgnn);

}  // namespace sfgnn
