#include "CLI11.hpp"
#include "manifest.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"
#include "sfgnn/gradient_suite.hpp"
#include "sfgnn/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace sfgnn::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitGradcheck = 4;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
    case ErrorCode::kParse:
      return kExitIo;
    case ErrorCode::kDivergence:
      return kExitDivergence;
    default:
      return kExitUsage;
  }
}

struct Common {
  std::string format = "text";
  std::size_t threads = 1;
  std::uint64_t seed = 7;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  // Accepted for scripting compatibility; every computation is single-threaded.
  sub->add_option("--threads", c.threads, "Worker cap")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Seed for every random stream");
  auto* out = sub->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
}

std::map<std::string, std::string> collect_flags(const CLI::App& sub) {
  std::map<std::string, std::string> flags;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.rfind("--", 0) != 0 || name == "--help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    flags[name.substr(2)] = value;
  }
  return flags;
}

RunManifest make_manifest(const CLI::App& sub, const Common& c, std::vector<std::string> inputs,
                          std::vector<std::string> outputs) {
  RunManifest m;
  m.command = sub.get_name();
  m.flags = collect_flags(sub);
  m.seed = c.seed;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  m.tool_version = SFGNN_VERSION;
  m.timestamp = utc_timestamp();
  return m;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "AN3..AN10" or a comma list.
std::vector<std::string> parse_sensors(const std::string& text) {
  std::vector<std::string> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t lo = sensor_index(text.substr(0, dots));
    const std::size_t hi = sensor_index(text.substr(dots + 2));
    require(lo <= hi, ErrorCode::kParameter, "empty sensor range '" + text + "'");
    for (std::size_t i = lo; i <= hi; ++i) out.emplace_back(kSensorIds[i]);
    return out;
  }
  for (auto& s : split_list(text)) {
    sensor_index(s);
    out.push_back(s);
  }
  require(!out.empty(), ErrorCode::kParameter, "no sensors given");
  return out;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string join_records(const KnowledgeGraph& g, const std::vector<Triple>& ts) {
  std::string s;
  for (const auto& t : ts) s += (s.empty() ? "" : ";") + render_record(g, t);
  return s;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataFlags {
  std::size_t segments = 1000;
  std::size_t segment_length = kDefaultSegmentLength;
  double sample_rate = kDefaultSampleRate;
  double impulse_gain = kDefaultImpulseGain;
  double impulse_rate = kDefaultImpulseRate;
  std::string sensors = "AN3..AN10";
};

int cmd_gen_data(const CLI::App& sub, const Common& c, const GenDataFlags& f) {
  DataOptions o;
  o.segments_per_class = f.segments;
  o.segment_length = f.segment_length;
  o.sample_rate = f.sample_rate;
  o.impulse_gain = f.impulse_gain;
  o.impulse_rate = f.impulse_rate;
  o.seed = c.seed;
  o.sensors = parse_sensors(f.sensors);
  require(f.segments >= 1, ErrorCode::kParameter, "--segments must be >= 1");

  std::vector<std::string> outputs;
  for (const auto& s : o.sensors) {
    outputs.push_back(s + "_healthy");
    outputs.push_back(s + "_damaged");
  }
  RunGuard guard(c.out, make_manifest(sub, c, {}, outputs));
  const auto corpus = generate_corpus(o);
  write_corpus(c.out, corpus);
  guard.finish();

  const std::size_t per_sensor = corpus.front().healthy.size();
  if (c.format == "json") {
    std::cout << Json{{"out", c.out}, {"sets", outputs}, {"segments_per_set", per_sensor}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << outputs.size() << " segment sets (" << per_sensor << " segments each) to "
              << c.out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags {
  std::string data;
  std::string model = "ggnn";
  std::size_t features = kDefaultFeatureCount;
  std::size_t sf_iterations = 40;
  TrainingConfig config;
};

void write_test_set(const fs::path& dir, ModelKind kind, const KnowledgeGraph& base,
                    const FeatureSplit& test) {
  fs::create_directories(dir);
  char name[32];
  if (kind == ModelKind::kSoftmax) {
    std::string rows = "sensor,label\n";
    std::string features;
    for (auto [set, label] : {std::pair{&test.healthy, HealthState::kHealthy},
                              std::pair{&test.damaged, HealthState::kDamaged}}) {
      for (const auto& [sensor, vs] : *set) {
        for (const auto& v : vs) {
          std::string line = sensor;
          for (Eigen::Index i = 0; i < v.size(); ++i) line += "," + io::format_double(v(i));
          features += line + "\n";
          rows += sensor + "," + std::string(to_string(label)) + "\n";
        }
      }
    }
    io::write_text_file(dir / "features.csv", features);
    io::write_text_file(dir / "labels.csv", rows);
    return;
  }
  std::string labels;
  if (kind == ModelKind::kGgsnn) {
    labels = "file,target\n";
    const auto examples = fault_examples(base, test);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      std::snprintf(name, sizeof name, "graph_%04zu.txt", i);
      io::write_text_file(dir / name, serialize(examples[i].graph));
      labels += std::string(name) + "," + join_records(examples[i].graph, examples[i].target) + "\n";
    }
  } else {
    labels = "file,label\n";
    const auto graphs = detection_graphs(base, test);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      std::snprintf(name, sizeof name, "graph_%04zu.txt", i);
      io::write_text_file(dir / name, serialize(graphs[i].graph));
      labels += std::string(name) + "," + std::string(to_string(graphs[i].label)) + "\n";
    }
  }
  io::write_text_file(dir / "labels.csv", labels);
}

int cmd_train(const CLI::App& sub, const Common& c, TrainFlags f) {
  const ModelKind kind = *parse_model_kind(f.model);
  f.config.seed = c.seed;
  f.config.validate();
  require(f.features >= 1, ErrorCode::kParameter, "--features must be >= 1");
  require(f.sf_iterations >= 1, ErrorCode::kParameter, "--sf-iterations must be >= 1");

  const fs::path out(c.out);
  RunGuard guard(out, make_manifest(sub, c, {f.data},
                                    {"checkpoint.bin", "sparse_filter.bin", "training_log.csv",
                                     "report.json", "test"}));
  const auto corpus = read_corpus(f.data);
  FeatureOptions fo;
  fo.features = f.features;
  fo.sf_iterations = f.sf_iterations;
  fo.seed = c.seed;
  const auto prepared = prepare_features(corpus, fo);
  const KnowledgeGraph base = build_default_graph();
  auto run = run_model(kind, base, prepared, f.config);

  save_checkpoint(out / "checkpoint.bin", run.checkpoint);
  save_model(out / "sparse_filter.bin", prepared.sf);
  io::write_text_file(out / "training_log.csv", to_csv(run.log));
  io::write_text_file(out / "report.json", to_json(run.report));
  write_test_set(out / "test", kind, base, prepared.splits.test);
  guard.finish();

  const auto& r = run.report;
  if (c.format == "json") {
    std::cout << to_json(r);
  } else {
    std::cout << "model:        " << r.model << "\n"
              << "features:     " << r.p << "\n"
              << "epochs:       " << r.epochs << " (best " << run.log.best_epoch << ")\n"
              << "accuracy_pct: " << io::format_double(r.accuracy_pct) << "\n"
              << "runtime_s:    " << r.runtime_s << "\n"
              << "output:       " << c.out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect

struct DetectFlags {
  std::string checkpoint;
  std::string graph;
  std::string features;
  std::string mode;  // empty: inferred from the checkpoint
  std::string model;
  std::size_t max_steps = 32;
  std::size_t terminals = 1;
};

struct FeatureRow {
  std::string sensor;
  Vector values;
};

std::vector<FeatureRow> read_feature_rows(const fs::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_list(line);
    if (cells.size() < 2) throw ParseError(ErrorCode::kFormat, line_no, "expected 'sensor,v1,...'");
    FeatureRow r;
    r.sensor = cells[0];
    r.values.resize(static_cast<Eigen::Index>(cells.size() - 1));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        r.values(static_cast<Eigen::Index>(i - 1)) = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
      } catch (const std::logic_error&) {
        throw ParseError(ErrorCode::kFormat, line_no, "not a number: '" + cells[i] + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  require(!rows.empty(), ErrorCode::kFormat, "no feature rows in '" + path.string() + "'");
  return rows;
}

Json detection_json(const Detection& d) {
  return Json{{"state", to_string(d.state)},
              {"probabilities", {{"healthy", d.probabilities(0)}, {"damaged", d.probabilities(1)}}}};
}

std::string detection_text(const Detection& d) {
  return "state: " + std::string(to_string(d.state)) + "\n" +
         "p_healthy: " + io::format_double(d.probabilities(0)) + "\n" +
         "p_damaged: " + io::format_double(d.probabilities(1)) + "\n";
}

int cmd_detect(const CLI::App& sub, const Common& c, const DetectFlags& f) {
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  if (!f.model.empty()) require_kind(ck, *parse_model_kind(f.model));
  const std::string mode = !f.mode.empty() ? f.mode : ck.kind == ModelKind::kGgsnn ? "sequence" : "single";
  if (mode == "sequence") require_kind(ck, ModelKind::kGgsnn);
  if (mode == "single" && ck.kind == ModelKind::kGgsnn) {
    raise(ErrorCode::kConfiguration, "checkpoint holds a 'ggsnn' model, expected one of 'gnn', 'ggnn', 'softmax'");
  }

  std::optional<RunGuard> guard;
  if (!c.out.empty()) {
    std::vector<std::string> inputs = {f.checkpoint};
    if (!f.graph.empty()) inputs.push_back(f.graph);
    if (!f.features.empty()) inputs.push_back(f.features);
    guard.emplace(c.out, make_manifest(sub, c, inputs, {c.format == "json" ? "detection.json" : "detection.txt"}));
  }

  std::vector<FeatureRow> rows;
  if (!f.features.empty()) rows = read_feature_rows(f.features);

  Json j{{"mode", mode}, {"model", to_string(ck.kind)}};
  std::string text;
  if (ck.kind == ModelKind::kSoftmax) {
    require(!rows.empty(), ErrorCode::kParameter, "a softmax checkpoint needs --features");
    const SoftmaxModel m = softmax_from(ck);
    Json results = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Detection d = predict_softmax(m, rows[i].values);
      Json r = detection_json(d);
      r["sensor"] = rows[i].sensor;
      results.push_back(r);
      text += rows[i].sensor + " " + std::string(to_string(d.state)) + " " +
              io::format_double(d.probabilities(0)) + " " + io::format_double(d.probabilities(1)) + "\n";
    }
    j["detections"] = results;
  } else {
    require(!f.graph.empty(), ErrorCode::kParameter, "--graph is required for graph models");
    KnowledgeGraph g = deserialize(io::read_text_file(f.graph));
    if (!rows.empty()) {
      std::map<std::string, Vector> features;
      for (auto& r : rows) {
        require(features.emplace(r.sensor, r.values).second, ErrorCode::kFormat,
                "sensor '" + r.sensor + "' appears twice in --features");
      }
      g = attach_annotations(g, features);
    }
    if (mode == "sequence") {
      const SequenceOutput out = predict_sequence(g, sequence_model_from(ck), f.max_steps, f.terminals);
      Json triples = Json::array();
      std::string records, sentences;
      for (const auto& t : out.triples) {
        triples.push_back({{"subject", g.node(t.subject).name},
                           {"relation", to_string(t.relation)},
                           {"object", g.node(t.object).name},
                           {"record", render_record(g, t)},
                           {"sentence", render_sentence(g, t)}});
        records += render_record(g, t) + "\n";
        sentences += render_sentence(g, t) + "\n";
      }
      j["triples"] = triples;
      j["complete"] = out.complete;
      j["dead_end"] = out.dead_end;
      j["corrected"] = out.corrected;
      text = "records:\n" + records + "\nsentences:\n" + sentences + "\ncomplete: " +
             (out.complete ? "yes" : "no") + "\n";
      if (out.dead_end) text += "stopped at a node without outgoing edges\n";
    } else {
      const Detection d = ck.kind == ModelKind::kGnn ? predict_single(g, gnn_from(ck))
                                                     : predict_single_gated(g, gated_gnn_from(ck));
      j.update(detection_json(d));
      text = detection_text(d);
    }
  }

  const std::string output = c.format == "json" ? j.dump(2) + "\n" : text;
  std::cout << output;
  if (guard) {
    io::write_text_file(guard->dir() / (c.format == "json" ? "detection.json" : "detection.txt"), output);
    guard->finish();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckFlags {
  std::string models = "sf,gnn,ggnn,ggsnn";
  std::string perturb = "1";
  GradSuiteOptions options;
};

double parse_factor(std::string text) {
  if (!text.empty() && (text.back() == 'x' || text.back() == 'X')) text.pop_back();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  raise(ErrorCode::kParameter, "--perturb-analytic expects a factor such as '2x'");
}

int cmd_gradcheck(const CLI::App& sub, const Common& c, GradcheckFlags f) {
  f.options.seed = c.seed;
  f.options.perturb = parse_factor(f.perturb);
  std::optional<RunGuard> guard;
  if (!c.out.empty()) guard.emplace(c.out, make_manifest(sub, c, {}, {"gradcheck.txt"}));

  const auto results = run_gradient_suite(split_list(f.models), f.options);
  bool ok = true;
  Json j = Json::array();
  std::string text;
  for (const auto& r : results) {
    const bool pass = r.passed(f.options.tolerance);
    ok = ok && pass;
    Json tensors = Json::array();
    for (const auto& t : r.check.tensors) {
      tensors.push_back({{"name", t.name}, {"max_relative_error", t.max_relative_error}});
      text += r.name + " " + t.name + " " + sci(t.max_relative_error) + "\n";
    }
    text += r.name + " max " + sci(r.check.max_relative_error) + " " + (pass ? "PASS" : "FAIL") + "\n";
    j.push_back({{"model", r.name},
                 {"max_relative_error", r.check.max_relative_error},
                 {"passed", pass},
                 {"tensors", tensors}});
  }
  const std::string output = c.format == "json" ? Json{{"passed", ok}, {"checks", j}}.dump(2) + "\n" : text;
  std::cout << output;
  if (guard) {
    io::write_text_file(guard->dir() / "gradcheck.txt", output);
    guard->finish();
  }
  return ok ? kExitOk : kExitGradcheck;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
  std::string data;
  std::string dims = "50,100,300,500";
  std::string model = "ggnn";
  std::size_t sf_iterations = 40;
  TrainingConfig config;
};

int cmd_sweep(const CLI::App& sub, const Common& c, SweepFlags f) {
  std::vector<std::size_t> dims;
  for (const auto& d : split_list(f.dims)) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(d, &used);
      require(used == d.size() && v >= 1, ErrorCode::kParameter, "bad dimension '" + d + "'");
      dims.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      raise(ErrorCode::kParameter, "bad dimension '" + d + "'");
    }
  }
  f.config.seed = c.seed;
  f.config.validate();
  const fs::path out(c.out);
  RunGuard guard(out, make_manifest(sub, c, {f.data}, {"sweep.csv"}));
  const auto corpus = read_corpus(f.data);
  FeatureOptions fo;
  fo.sf_iterations = f.sf_iterations;
  fo.seed = c.seed;
  const auto reports = run_dimension_sweep(dims, corpus, fo, f.config, *parse_model_kind(f.model));
  const std::string csv = reports_csv(reports);
  io::write_text_file(out / "sweep.csv", csv);
  guard.finish();
  if (c.format == "json") {
    Json j = Json::array();
    for (const auto& r : reports) j.push_back(Json::parse(to_json(r)));
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << csv;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// graph

int cmd_graph(const CLI::App& sub, const Common& c) {
  const KnowledgeGraph g = build_default_graph();
  const auto violations = validate(g);
  std::optional<RunGuard> guard;
  if (!c.out.empty()) guard.emplace(c.out, make_manifest(sub, c, {}, {"graph.txt"}));
  const std::string text = serialize(g);
  if (guard) {
    io::write_text_file(guard->dir() / "graph.txt", text);
    guard->finish();
  }
  if (c.format == "json") {
    Json v = Json::array();
    for (const auto& x : violations) v.push_back(x.message);
    std::cout << Json{{"nodes", g.node_count()}, {"edges", g.edges().size()}, {"violations", v}}.dump(2) << "\n";
  } else {
    std::cout << text;
    for (const auto& x : violations) std::cerr << "violation: " << x.message << "\n";
  }
  return violations.empty() ? kExitOk : kExitUsage;
}

void add_training_flags(CLI::App* sub, TrainingConfig& t) {
  sub->add_option("--hidden", t.hidden_size, "Hidden state size H");
  sub->add_option("--lr", t.lr, "Adam learning rate");
  sub->add_option("--dropout", t.dropout_p, "Readout dropout probability");
  sub->add_option("--l2", t.l2_lambda, "L2 penalty on weights");
  sub->add_option("--epochs", t.max_epochs, "Maximum epochs");
  sub->add_option("--patience", t.patience, "Early-stopping patience");
  sub->add_option("--steps", t.steps, "Propagation steps T/K");
  sub->add_option("--batch-size", t.batch_size, "Graphs per update");
}

const std::vector<std::string> kModels = {"gnn", "ggnn", "ggsnn", "softmax"};

int run(int argc, char** argv) {
  CLI::App app{"Sparse filtering and graph neural networks for gearbox fault detection", "sfgnn"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(SFGNN_VERSION));

  Common gen_c, train_c, detect_c, grad_c, sweep_c, graph_c;
  grad_c.seed = 1;

  GenDataFlags gen_f;
  auto* gen = app.add_subcommand("gen-data", "Generate synthetic healthy and damaged segment sets");
  add_common(gen, gen_c, true);
  gen->add_option("--segments", gen_f.segments, "Segments per class, spread over the sensors");
  gen->add_option("--segment-len", gen_f.segment_length, "Samples per segment");
  gen->add_option("--sample-rate", gen_f.sample_rate, "Sampling rate in Hz");
  gen->add_option("--impulse-gain", gen_f.impulse_gain, "Fault impulse amplitude relative to noise");
  gen->add_option("--impulse-rate", gen_f.impulse_rate, "Fault impulses per second");
  gen->add_option("--sensors", gen_f.sensors, "Sensor range (AN3..AN10) or comma list");

  TrainFlags train_f;
  auto* train = app.add_subcommand("train", "Train sparse filtering and one model");
  add_common(train, train_c, true);
  train->add_option("--data", train_f.data, "Directory written by gen-data")->required();
  train->add_option("--model", train_f.model, "Model to train")->check(CLI::IsMember(kModels));
  train->add_option("--features", train_f.features, "Sparse-filtering feature count p");
  train->add_option("--sf-iterations", train_f.sf_iterations, "Sparse-filtering iterations");
  add_training_flags(train, train_f.config);

  DetectFlags detect_f;
  auto* detect = app.add_subcommand("detect", "Run a trained model on one graph");
  add_common(detect, detect_c, false);
  detect->add_option("--checkpoint", detect_f.checkpoint, "checkpoint.bin written by train")->required();
  detect->add_option("--graph", detect_f.graph, "Graph text file");
  detect->add_option("--features", detect_f.features, "CSV rows 'sensor,v1,...'");
  detect->add_option("--mode", detect_f.mode, "single or sequence (default from the checkpoint)")
      ->check(CLI::IsMember({"single", "sequence"}));
  detect->add_option("--model", detect_f.model, "Expected model kind")->check(CLI::IsMember(kModels));
  detect->add_option("--max-steps", detect_f.max_steps, "Sequence length cap");
  detect->add_option("--terminals", detect_f.terminals, "Terminal triples to emit before stopping");

  GradcheckFlags grad_f;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  add_common(grad, grad_c, false);
  grad->add_option("--model", grad_f.models, "Comma list from sf,gnn,ggnn,ggsnn");
  grad->add_option("--hidden", grad_f.options.hidden, "Hidden size");
  grad->add_option("--steps", grad_f.options.steps, "Propagation steps");
  grad->add_option("--annotation-dim", grad_f.options.annotation_dim, "Annotation size");
  grad->add_option("--sf-inputs", grad_f.options.sf_inputs, "Sparse-filtering input size N");
  grad->add_option("--features", grad_f.options.sf_features, "Sparse-filtering feature count p");
  grad->add_option("--examples", grad_f.options.sf_examples, "Sparse-filtering examples D");
  grad->add_option("--l2", grad_f.options.l2_lambda, "L2 penalty included in the checked loss");
  grad->add_option("--perturb-analytic", grad_f.perturb, "Scale analytic gradients (debug), e.g. 2x");

  SweepFlags sweep_f;
  auto* sweep = app.add_subcommand("sweep", "Train one model per feature count");
  add_common(sweep, sweep_c, true);
  sweep->add_option("--data", sweep_f.data, "Directory written by gen-data")->required();
  sweep->add_option("--dims", sweep_f.dims, "Comma list of feature counts");
  sweep->add_option("--model", sweep_f.model, "Model to train")->check(CLI::IsMember(kModels));
  sweep->add_option("--sf-iterations", sweep_f.sf_iterations, "Sparse-filtering iterations");
  add_training_flags(sweep, sweep_f.config);

  auto* graph = app.add_subcommand("graph", "Print and validate the default knowledge graph");
  add_common(graph, graph_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(*gen, gen_c, gen_f);
    if (*train) return cmd_train(*train, train_c, train_f);
    if (*detect) return cmd_detect(*detect, detect_c, detect_f);
    if (*grad) return cmd_gradcheck(*grad, grad_c, grad_f);
    if (*sweep) return cmd_sweep(*sweep, sweep_c, sweep_f);
    if (*graph) return cmd_graph(*graph, graph_c);
  } catch (const DivergenceError& e) {
    std::cerr << "error: diverged at step " << e.step() << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ParseError& e) {
    std::cerr << "error: line " << e.line() << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace sfgnn::cli

int main(int argc, char** argv) { return sfgnn::cli::run(argc, argv); }
