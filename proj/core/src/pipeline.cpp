#include "sfgnn/pipeline.hpp"

#include "sfgnn/error.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace sfgnn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t split_count(const std::map<std::string, std::vector<Vector>>& by_sensor) {
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& [sensor, v] : by_sensor) n = std::min(n, v.size());
  return by_sensor.empty() ? 0 : n;
}

KnowledgeGraph annotate(const KnowledgeGraph& base, const std::map<std::string, Vector>& features) {
  return attach_annotations(base, features);
}

// Appends every segment of `from` to `into`.
void append(SegmentSet& into, const SegmentSet& from) {
  into.sample_rate = from.sample_rate;
  into.provenance = from.provenance;
  into.segments.insert(into.segments.end(), from.segments.begin(), from.segments.end());
}

FeatureSplit extract_split(const SparseFilterModel& sf, const std::vector<SegmentSet>& healthy,
                           const std::vector<SegmentSet>& damaged) {
  // Both classes are normalized jointly so no label information leaks into
  // the feature statistics.
  SegmentSet all;
  for (std::size_t s = 0; s < healthy.size(); ++s) {
    append(all, healthy[s]);
    append(all, damaged[s]);
  }
  FeatureSplit out;
  if (all.empty()) return out;
  auto features = extract_features(sf, all);
  for (std::size_t s = 0; s < healthy.size(); ++s) {
    if (healthy[s].empty() && damaged[s].empty()) continue;
    const std::string& sensor = !healthy[s].empty() ? healthy[s].segments.front().sensor_id
                                                    : damaged[s].segments.front().sensor_id;
    auto& v = features.at(sensor);
    const auto nh = static_cast<std::ptrdiff_t>(healthy[s].size());
    out.healthy[sensor].assign(v.begin(), v.begin() + nh);
    out.damaged[sensor].assign(v.begin() + nh, v.end());
  }
  return out;
}

}  // namespace

std::vector<SensorRecording> generate_corpus(const DataOptions& options) {
  require(!options.sensors.empty(), ErrorCode::kParameter, "no sensors selected");
  const std::size_t per_sensor = options.segments_per_class / options.sensors.size();
  require(per_sensor >= 1, ErrorCode::kParameter,
          "segments per class must be at least the number of sensors");
  std::vector<SensorRecording> out;
  for (const auto& sensor : options.sensors) {
    SensorRecording r;
    r.sensor = sensor;
    r.healthy = generate_healthy(options.seed, per_sensor, options.segment_length,
                                 options.sample_rate, sensor);
    r.damaged = generate_faulty(options.seed, per_sensor, options.segment_length,
                                options.sample_rate, sensor, options.impulse_rate,
                                options.impulse_gain);
    out.push_back(std::move(r));
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<SensorRecording>& corpus) {
  for (const auto& r : corpus) {
    write_segment_set(dir / (r.sensor + "_healthy"), r.healthy);
    write_segment_set(dir / (r.sensor + "_damaged"), r.damaged);
  }
}

std::vector<SensorRecording> read_corpus(const std::filesystem::path& dir) {
  std::vector<SensorRecording> out;
  for (auto sensor : kSensorIds) {
    const std::string name(sensor);
    const auto h = dir / (name + "_healthy");
    const auto d = dir / (name + "_damaged");
    if (!std::filesystem::exists(h) && !std::filesystem::exists(d)) continue;
    out.push_back({name, read_segment_set(h), read_segment_set(d)});
  }
  require(!out.empty(), ErrorCode::kIo, "no segment sets found under '" + dir.string() + "'");
  return out;
}

PreparedFeatures prepare_features(const std::vector<SensorRecording>& corpus,
                                  const FeatureOptions& options) {
  require(!corpus.empty(), ErrorCode::kParameter, "empty corpus");
  const SplitRatios ratios;
  std::vector<SegmentSet> tr_h, tr_d, te_h, te_d, dv_h, dv_d;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto h = split_dataset(corpus[s].healthy, ratios, derive_seed(options.seed, 2 * s));
    const auto d = split_dataset(corpus[s].damaged, ratios, derive_seed(options.seed, 2 * s + 1));
    tr_h.push_back(h.train);
    tr_d.push_back(d.train);
    te_h.push_back(h.test);
    te_d.push_back(d.test);
    dv_h.push_back(h.dev);
    dv_d.push_back(d.dev);
  }

  SegmentSet train_all;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    append(train_all, tr_h[s]);
    append(train_all, tr_d[s]);
  }
  PreparedFeatures out;
  const auto t0 = Clock::now();
  SparseFilterOptions sf_options;
  sf_options.lr = options.sf_lr;
  out.sf = train_sparse_filter(to_data_matrix(train_all), options.features, options.sf_iterations,
                               options.seed, sf_options, &out.sf_trace);
  out.sf_seconds = seconds_since(t0);
  out.splits.train = extract_split(out.sf, tr_h, tr_d);
  out.splits.test = extract_split(out.sf, te_h, te_d);
  out.splits.dev = extract_split(out.sf, dv_h, dv_d);
  return out;
}

std::vector<LabeledGraph> detection_graphs(const KnowledgeGraph& base, const FeatureSplit& split) {
  std::vector<LabeledGraph> out;
  for (auto [set, label] : {std::pair{&split.healthy, HealthState::kHealthy},
                            std::pair{&split.damaged, HealthState::kDamaged}}) {
    const std::size_t n = split_count(*set);
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::string, Vector> f;
      for (const auto& [sensor, v] : *set) f[sensor] = v[i];
      out.push_back({annotate(base, f), label});
    }
  }
  return out;
}

std::vector<SequenceExample> fault_examples(const KnowledgeGraph& base, const FeatureSplit& split) {
  std::vector<SequenceExample> out;
  std::vector<std::string> sensors;
  for (const auto& [sensor, v] : split.damaged) sensors.push_back(sensor);
  if (sensors.empty()) return out;
  std::sort(sensors.begin(), sensors.end(), [](const std::string& a, const std::string& b) {
    return sensor_index(a) < sensor_index(b);
  });
  const std::size_t n = std::min(split_count(split.healthy), split_count(split.damaged));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& faulty = sensors[i % sensors.size()];
    std::map<std::string, Vector> f;
    for (const auto& s : sensors) f[s] = s == faulty ? split.damaged.at(s)[i] : split.healthy.at(s)[i];
    const KnowledgeGraph g = annotate(base, f);
    out.push_back({g, fault_sequence(g, {faulty})});
  }
  return out;
}

LabeledFeatures segment_features(const FeatureSplit& split) {
  LabeledFeatures out;
  for (auto [set, label] : {std::pair{&split.healthy, HealthState::kHealthy},
                            std::pair{&split.damaged, HealthState::kDamaged}}) {
    for (const auto& [sensor, v] : *set) {
      for (const auto& x : v) {
        out.features.push_back(x);
        out.labels.push_back(label);
      }
    }
  }
  return out;
}

ConfusionMatrix evaluate_detection(const std::vector<LabeledGraph>& data, const Checkpoint& c) {
  ConfusionMatrix cm;
  if (c.kind == ModelKind::kGnn) {
    const GnnModel m = gnn_from(c);
    for (const auto& s : data) cm.add(s.label, predict_single(s.graph, m).state);
  } else {
    const GatedGnnModel m = gated_gnn_from(c);
    for (const auto& s : data) cm.add(s.label, predict_single_gated(s.graph, m).state);
  }
  return cm;
}

SequenceEvaluation evaluate_sequences(const SequenceModel& m, const std::vector<SequenceExample>& data) {
  SequenceEvaluation ev;
  for (const auto& ex : data) {
    const std::size_t terminals = static_cast<std::size_t>(std::count_if(
        ex.target.begin(), ex.target.end(), [&](const Triple& t) { return is_terminal(ex.graph, t); }));
    const auto out = predict_sequence(ex.graph, m, 2 * ex.target.size(), std::max<std::size_t>(1, terminals));
    ev.mean_accuracy += sequence_accuracy(out.triples, ex.target);
    const bool valid = std::all_of(out.triples.begin(), out.triples.end(), [&](const Triple& t) {
      return ex.graph.has_edge(t.subject, t.relation, t.object);
    });
    ev.grammar_valid += valid ? 1 : 0;
    ++ev.total;
  }
  if (ev.total > 0) ev.mean_accuracy /= static_cast<double>(ev.total);
  return ev;
}

ModelRun run_model(ModelKind kind, const KnowledgeGraph& base, const PreparedFeatures& data,
                   const TrainingConfig& config) {
  ModelRun run;
  auto& r = run.report;
  r.p = data.sf.feature_count();
  r.seed = config.seed;
  r.config = config;
  const auto t0 = Clock::now();
  switch (kind) {
    case ModelKind::kGnn:
    case ModelKind::kGgnn: {
      const auto train = detection_graphs(base, data.splits.train);
      const auto dev = detection_graphs(base, data.splits.dev);
      const auto test = detection_graphs(base, data.splits.test);
      if (kind == ModelKind::kGnn) {
        auto t = train_gnn(train, dev, config);
        run.checkpoint = to_checkpoint(t.model);
        run.log = std::move(t.log);
        r.model = "sf-gnn";
      } else {
        auto t = train_gated_gnn(train, dev, config);
        run.checkpoint = to_checkpoint(t.model);
        run.log = std::move(t.log);
        r.model = "sf-ggnn";
      }
      r.accuracy_pct = 100.0 * accuracy(evaluate_detection(test, run.checkpoint));
      r.train_size = train.size();
      r.dev_size = dev.size();
      r.test_size = test.size();
      break;
    }
    case ModelKind::kGgsnn: {
      const auto train = fault_examples(base, data.splits.train);
      const auto dev = fault_examples(base, data.splits.dev);
      const auto test = fault_examples(base, data.splits.test);
      auto t = train_ggsnn(train, dev, config);
      run.checkpoint = to_checkpoint(t.model);
      run.log = std::move(t.log);
      r.model = "sf-ggsnn";
      r.accuracy_pct = 100.0 * evaluate_sequences(t.model, test).mean_accuracy;
      r.train_size = train.size();
      r.dev_size = dev.size();
      r.test_size = test.size();
      break;
    }
    case ModelKind::kSoftmax: {
      const auto train = segment_features(data.splits.train);
      const auto dev = segment_features(data.splits.dev);
      const auto test = segment_features(data.splits.test);
      SoftmaxTraining t;
      const auto report = softmax_baseline(train, dev, test, config, &t);
      run.checkpoint = to_checkpoint(t.model);
      run.log = std::move(t.log);
      r = report;
      break;
    }
  }
  r.runtime_s = seconds_since(t0);
  r.epochs = run.log.epochs.size();
  return run;
}

std::vector<ExperimentReport> run_dimension_sweep(const std::vector<std::size_t>& dims,
                                                  const std::vector<SensorRecording>& corpus,
                                                  const FeatureOptions& features,
                                                  const TrainingConfig& config, ModelKind kind) {
  require(dims.size() >= 2, ErrorCode::kParameter, "a dimension sweep needs at least two values");
  const KnowledgeGraph base = build_default_graph();
  std::vector<ExperimentReport> out;
  for (const auto p : dims) {
    require(p >= 1, ErrorCode::kParameter, "feature counts must be >= 1");
    FeatureOptions f = features;
    f.features = p;
    const auto prepared = prepare_features(corpus, f);
    auto run = run_model(kind, base, prepared, config);
    run.report.runtime_s += prepared.sf_seconds;
    out.push_back(run.report);
  }
  return out;
}

}  // namespace sfgnn
