#include "sfgnn/checkpoint.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"

#include <sstream>

namespace sfgnn {
namespace {

constexpr std::string_view kMagic = "sfgnn-checkpoint 1";

[[noreturn]] void bad(const std::string& what) { raise(ErrorCode::kFormat, "checkpoint: " + what); }

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kGnn: return "gnn";
    case ModelKind::kGgnn: return "ggnn";
    case ModelKind::kGgsnn: return "ggsnn";
    case ModelKind::kSoftmax: return "softmax";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::kGnn, ModelKind::kGgnn, ModelKind::kGgsnn, ModelKind::kSoftmax}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string encode_checkpoint(const Checkpoint& c) {
  std::ostringstream out(std::ios::binary);
  out << kMagic << '\n'
      << "model " << to_string(c.kind) << '\n'
      << "hidden " << c.hidden_size << '\n'
      << "steps " << c.steps << '\n'
      << "input_dim " << c.input_dim << '\n'
      << "node_count " << c.node_count << '\n';
  for (const auto& t : c.triples) out << "triple " << to_string(t) << '\n';
  for (const auto& e : c.params.entries()) {
    out << "tensor " << e.name << ' ' << e.value.rows() << ' ' << e.value.cols() << ' '
        << (e.regularized ? 1 : 0) << '\n';
  }
  out << "end\n";
  for (const auto& e : c.params.entries()) io::write_matrix_le(out, e.value);
  return out.str();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  std::istringstream in{std::string(bytes), std::ios::binary};
  std::string line;
  if (!std::getline(in, line) || line != kMagic) bad("missing '" + std::string(kMagic) + "' header");

  Checkpoint c;
  struct Pending {
    std::string name;
    Eigen::Index rows, cols;
    bool regularized;
  };
  std::vector<Pending> tensors;
  bool ended = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") {
      ended = true;
      break;
    }
    if (key == "model") {
      std::string v;
      ls >> v;
      const auto kind = parse_model_kind(v);
      if (!kind) bad("unknown model kind '" + v + "'");
      c.kind = *kind;
    } else if (key == "hidden") {
      ls >> c.hidden_size;
    } else if (key == "steps") {
      ls >> c.steps;
    } else if (key == "input_dim") {
      ls >> c.input_dim;
    } else if (key == "node_count") {
      ls >> c.node_count;
    } else if (key == "triple") {
      std::string v;
      ls >> v;
      const auto t = parse_label_triple(v);
      if (!t) bad("invalid label triple '" + v + "'");
      c.triples.push_back(*t);
    } else if (key == "tensor") {
      Pending p{};
      int reg = 0;
      ls >> p.name >> p.rows >> p.cols >> reg;
      if (ls.fail() || p.rows < 1 || p.cols < 1) bad("invalid tensor line '" + line + "'");
      p.regularized = reg != 0;
      tensors.push_back(std::move(p));
    } else {
      bad("unknown header line '" + line + "'");
    }
    if (ls.fail()) bad("invalid header line '" + line + "'");
  }
  if (!ended) bad("header is not terminated by 'end'");
  for (const auto& p : tensors) {
    Matrix m(p.rows, p.cols);
    try {
      io::read_matrix_le(in, m);
    } catch (const Error&) {
      bad("tensor data for '" + p.name + "' is truncated");
    }
    c.params.add(p.name, std::move(m), p.regularized);
  }
  if (in.peek() != std::char_traits<char>::eof()) bad("trailing bytes after tensor data");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  io::write_text_file(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_text_file(path));
}

Checkpoint to_checkpoint(const GnnModel& m) {
  return {ModelKind::kGnn, m.hidden_size, m.steps, m.input_dim, 0, m.triples, m.params};
}

Checkpoint to_checkpoint(const GatedGnnModel& m) {
  return {ModelKind::kGgnn, m.hidden_size, m.steps, m.input_dim, 0, {}, m.params};
}

Checkpoint to_checkpoint(const SequenceModel& m) {
  return {ModelKind::kGgsnn, m.hidden_size, m.steps, m.annotation_dim, m.node_count, {}, m.params};
}

void require_kind(const Checkpoint& c, ModelKind expected) {
  require(c.kind == expected, ErrorCode::kConfiguration,
          "checkpoint holds a '" + std::string(to_string(c.kind)) + "' model, expected '" +
              std::string(to_string(expected)) + "'");
}

GnnModel gnn_from(const Checkpoint& c) {
  require_kind(c, ModelKind::kGnn);
  GnnModel m{c.params, c.triples, c.hidden_size, c.steps, c.input_dim};
  m.validate();
  return m;
}

GatedGnnModel gated_gnn_from(const Checkpoint& c) {
  require_kind(c, ModelKind::kGgnn);
  GatedGnnModel m{c.params, c.hidden_size, c.steps, c.input_dim};
  m.validate();
  return m;
}

SequenceModel sequence_model_from(const Checkpoint& c) {
  require_kind(c, ModelKind::kGgsnn);
  SequenceModel m{c.params, c.hidden_size, c.steps, c.input_dim, c.node_count};
  m.validate();
  return m;
}

}  // namespace sfgnn
