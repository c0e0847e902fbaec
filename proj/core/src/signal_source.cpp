#include "sfgnn/signal_source.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"
#include "sfgnn/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

namespace sfgnn {
namespace {

constexpr double kPhase0 = 0.3;
constexpr double kPhase1 = 1.1;
constexpr double kPhase2 = 2.0;
constexpr double kNoiseSigma = 0.05;
constexpr double kDecay = 1e-3;
// Bursts are truncated once the envelope falls below exp(-10).
constexpr double kTailDecays = 10.0;

constexpr std::array<SensorProfile, 8> kProfiles = {{
    {"AN3", "Ring gear radial 6 o'clock",
     {{{40, 0.20, kPhase0}, {80, 0.10, kPhase1}, {120, 0.05, kPhase2}}}, kNoiseSigma, 3100, kDecay},
    {"AN4", "Ring gear radial 12 o'clock",
     {{{40, 0.18, kPhase0}, {80, 0.09, kPhase1}, {160, 0.06, kPhase2}}}, kNoiseSigma, 3300, kDecay},
    {"AN5", "LS-SH radial",
     {{{40, 0.12, kPhase0}, {160, 0.14, kPhase1}, {320, 0.06, kPhase2}}}, kNoiseSigma, 2500, kDecay},
    {"AN6", "IMS-SH radial",
     {{{160, 0.12, kPhase0}, {320, 0.16, kPhase1}, {640, 0.06, kPhase2}}}, kNoiseSigma, 2700, kDecay},
    {"AN7", "HS-SH radial",
     {{{30, 0.10, kPhase0}, {1340, 0.18, kPhase1}, {2680, 0.07, kPhase2}}}, kNoiseSigma, 3800, kDecay},
    {"AN8", "HS-SH upwind bearing radial",
     {{{30, 0.08, kPhase0}, {1340, 0.14, kPhase1}, {2680, 0.08, kPhase2}}}, kNoiseSigma, 4200, kDecay},
    {"AN9", "HS-SH downwind bearing radial",
     {{{30, 0.08, kPhase0}, {1340, 0.12, kPhase1}, {2680, 0.10, kPhase2}}}, kNoiseSigma, 4500, kDecay},
    {"AN10", "Carrier downwind radial",
     {{{40, 0.10, kPhase0}, {80, 0.12, kPhase1}, {320, 0.06, kPhase2}}}, kNoiseSigma, 2900, kDecay},
}};

void check_generator_args(std::size_t n_segments, std::size_t segment_length, double sample_rate) {
  require(n_segments >= 1, ErrorCode::kParameter, "n_segments must be >= 1");
  require(segment_length >= 2, ErrorCode::kParameter, "segment length must be >= 2");
  require(sample_rate > 0.0 && std::isfinite(sample_rate), ErrorCode::kParameter,
          "sample rate must be positive");
}

SegmentSet baseline(std::uint64_t seed, std::size_t n_segments, std::size_t segment_length,
                    double sample_rate, const SensorProfile& profile, HealthState label) {
  const std::size_t sensor = sensor_index(profile.sensor_id);
  Rng noise = Rng(seed, streams::kSignalNoise).derive(sensor);

  std::vector<double> tones(segment_length, 0.0);
  for (std::size_t n = 0; n < segment_length; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    double v = 0.0;
    for (const auto& tone : profile.tones) {
      v += tone.amplitude * std::sin(2.0 * std::numbers::pi * tone.frequency_hz * t + tone.phase_rad);
    }
    tones[n] = v;
  }

  SegmentSet set;
  set.sample_rate = sample_rate;
  set.provenance = Provenance::kSynthetic;
  set.seed = seed;
  set.segments.reserve(n_segments);
  for (std::size_t i = 0; i < n_segments; ++i) {
    Segment seg{std::string(profile.sensor_id), tones, label, i};
    for (auto& x : seg.samples) x += profile.noise_sigma * noise.normal();
    set.segments.push_back(std::move(seg));
  }
  return set;
}

}  // namespace

std::string_view to_string(HealthState s) {
  return s == HealthState::kHealthy ? "healthy" : "damaged";
}

HealthState parse_health_state(std::string_view text) {
  if (text == "healthy" || text == "Healthy") return HealthState::kHealthy;
  if (text == "damaged" || text == "Damaged") return HealthState::kDamaged;
  raise(ErrorCode::kParameter, "unknown health state '" + std::string(text) + "'");
}

std::string_view to_string(Provenance p) {
  return p == Provenance::kSynthetic ? "synthetic" : "imported";
}

const SensorProfile& sensor_profile(std::string_view sensor_id) {
  return kProfiles[sensor_index(sensor_id)];
}

std::size_t sensor_index(std::string_view sensor_id) {
  for (std::size_t i = 0; i < kSensorIds.size(); ++i) {
    if (kSensorIds[i] == sensor_id) return i;
  }
  raise(ErrorCode::kLookup, "unknown sensor '" + std::string(sensor_id) + "'");
}

std::size_t SegmentSet::segment_length() const noexcept {
  return segments.empty() ? 0 : segments.front().samples.size();
}

void SegmentSet::validate() const {
  require(sample_rate > 0.0, ErrorCode::kParameter, "sample rate must be positive");
  const std::size_t len = segment_length();
  for (const auto& s : segments) {
    require(s.samples.size() == len, ErrorCode::kShape,
            "segments of one set must share a length (" + std::to_string(len) + " vs " +
                std::to_string(s.samples.size()) + ")");
  }
}

void SplitRatios::validate() const {
  for (double r : {train, test, dev}) {
    require(r > 0.0 && r < 1.0, ErrorCode::kParameter, "split ratios must lie in (0, 1)");
  }
  require(std::abs(train + test + dev - 1.0) <= 1e-12, ErrorCode::kParameter,
          "split ratios must sum to 1");
}

SegmentSet generate_healthy(std::uint64_t seed, std::size_t n_segments,
                            std::size_t segment_length, double sample_rate,
                            std::string_view sensor_id) {
  check_generator_args(n_segments, segment_length, sample_rate);
  return baseline(seed, n_segments, segment_length, sample_rate, sensor_profile(sensor_id),
                  HealthState::kHealthy);
}

SegmentSet generate_faulty(std::uint64_t seed, std::size_t n_segments, std::size_t segment_length,
                           double sample_rate, std::string_view sensor_id, double impulse_rate,
                           double impulse_gain) {
  check_generator_args(n_segments, segment_length, sample_rate);
  require(impulse_rate > 0.0 && std::isfinite(impulse_rate), ErrorCode::kParameter,
          "impulse rate must be positive");
  require(impulse_gain >= 0.0 && std::isfinite(impulse_gain), ErrorCode::kParameter,
          "impulse gain must be non-negative");
  const auto& profile = sensor_profile(sensor_id);
  SegmentSet set = baseline(seed, n_segments, segment_length, sample_rate, profile,
                            HealthState::kDamaged);
  if (impulse_gain == 0.0) return set;

  Rng offsets = Rng(seed, streams::kSignalImpulses).derive(sensor_index(sensor_id));
  const double period = sample_rate / impulse_rate;  // samples between bursts
  const double tail = kTailDecays * profile.decay_s * sample_rate;
  const double len = static_cast<double>(segment_length);
  for (auto& seg : set.segments) {
    const double offset = offsets.uniform() * period;
    // First burst whose tail can still reach sample 0.
    double start = offset - std::ceil(tail / period) * period;
    for (; start < len; start += period) {
      const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(start)));
      const auto last =
          static_cast<std::size_t>(std::clamp(std::floor(start + tail) + 1.0, 0.0, len));
      for (std::size_t n = first; n < last; ++n) {
        const double dt = (static_cast<double>(n) - start) / sample_rate;
        seg.samples[n] += impulse_gain * std::exp(-dt / profile.decay_s) *
                          std::sin(2.0 * std::numbers::pi * profile.resonance_hz * dt);
      }
    }
  }
  return set;
}

std::vector<std::vector<double>> segment_signal(std::span<const double> signal,
                                                std::ptrdiff_t segment_length) {
  require(segment_length >= 1, ErrorCode::kParameter, "segment length must be >= 1");
  const auto len = static_cast<std::size_t>(segment_length);
  std::vector<std::vector<double>> windows;
  windows.reserve(signal.size() / len);
  for (std::size_t begin = 0; begin + len <= signal.size(); begin += len) {
    windows.emplace_back(signal.begin() + static_cast<std::ptrdiff_t>(begin),
                         signal.begin() + static_cast<std::ptrdiff_t>(begin + len));
  }
  return windows;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  ratios.validate();
  // The small slack keeps e.g. 10 * 0.6 from flooring to 5.
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test + 1e-9));
  return {n_train, n_test, n - n_train - n_test};
}

Split<SegmentSet> split_dataset(const SegmentSet& set, const SplitRatios& ratios,
                                std::uint64_t seed) {
  require(!set.empty(), ErrorCode::kParameter, "cannot split an empty segment set");
  const auto sizes = split_sizes(set.size(), ratios);
  Rng rng(seed, streams::kSplit);
  const auto order = permutation(set.size(), rng);

  auto empty_like = [&] {
    SegmentSet out;
    out.sample_rate = set.sample_rate;
    out.provenance = set.provenance;
    out.seed = set.seed;
    return out;
  };
  Split<SegmentSet> split{empty_like(), empty_like(), empty_like()};
  for (std::size_t i = 0; i < order.size(); ++i) {
    SegmentSet& target = i < sizes[0]              ? split.train
                         : i < sizes[0] + sizes[1] ? split.test
                                                   : split.dev;
    target.segments.push_back(set.segments[order[i]]);
  }
  return split;
}

SegmentSet import_csv(const std::filesystem::path& path, std::string_view sensor_id,
                      HealthState label, std::size_t segment_length) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    const auto last = line.find_last_not_of(" \t");
    if (first == std::string::npos) {
      throw ParseError(ErrorCode::kFormat, line_no, "empty line in '" + path.string() + "'");
    }
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e || !std::isfinite(v)) {
      throw ParseError(ErrorCode::kFormat, line_no,
                       "not a real number: '" + line + "' in '" + path.string() + "'");
    }
    samples.push_back(v);
  }
  require(samples.size() >= segment_length, ErrorCode::kData,
          "empty segment set: '" + path.string() + "' holds " + std::to_string(samples.size()) +
              " samples, fewer than one segment of " + std::to_string(segment_length));

  SegmentSet set;
  set.provenance = Provenance::kImported;
  const auto windows = segment_signal(samples, static_cast<std::ptrdiff_t>(segment_length));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    set.segments.push_back({std::string(sensor_id), windows[i], label, i});
  }
  return set;
}

void write_segment_set(const std::filesystem::path& dir, const SegmentSet& set) {
  set.validate();
  require(!set.empty(), ErrorCode::kParameter, "cannot export an empty segment set");
  const auto& front = set.segments.front();
  for (const auto& s : set.segments) {
    require(s.sensor_id == front.sensor_id && s.label == front.label, ErrorCode::kParameter,
            "exported segment sets must hold one sensor and one label");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create directory '" + dir.string() + "': " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["sensor_id"] = front.sensor_id;
  manifest["sample_rate"] = set.sample_rate;
  manifest["segment_length"] = set.segment_length();
  manifest["segment_count"] = set.size();
  manifest["label"] = std::string(to_string(front.label));
  manifest["provenance"] = std::string(to_string(set.provenance));
  manifest["seed"] = set.seed;
  std::vector<std::size_t> indices;
  for (const auto& s : set.segments) indices.push_back(s.segment_index);
  manifest["segment_indices"] = indices;
  manifest["payload"] = "segments.f64";
  io::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::ofstream out(dir / "segments.f64", std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write '" + (dir / "segments.f64").string() + "'");
  for (const auto& s : set.segments) io::write_f64_le(out, s.samples);
}

SegmentSet read_segment_set(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kFormat, "bad manifest in '" + dir.string() + "': " + e.what());
  }
  try {
    SegmentSet set;
    set.sample_rate = manifest.at("sample_rate").get<double>();
    set.seed = manifest.at("seed").get<std::uint64_t>();
    set.provenance = manifest.at("provenance").get<std::string>() == "imported"
                         ? Provenance::kImported
                         : Provenance::kSynthetic;
    const auto sensor = manifest.at("sensor_id").get<std::string>();
    const auto label = parse_health_state(manifest.at("label").get<std::string>());
    const auto len = manifest.at("segment_length").get<std::size_t>();
    const auto count = manifest.at("segment_count").get<std::size_t>();
    const auto indices = manifest.at("segment_indices").get<std::vector<std::size_t>>();
    require(indices.size() == count, ErrorCode::kFormat, "segment_indices length mismatch");

    std::ifstream in(dir / "segments.f64", std::ios::binary);
    require(in.good(), ErrorCode::kIo, "cannot open '" + (dir / "segments.f64").string() + "'");
    for (std::size_t i = 0; i < count; ++i) {
      Segment seg{sensor, std::vector<double>(len), label, indices[i]};
      io::read_f64_le(in, seg.samples);
      set.segments.push_back(std::move(seg));
    }
    set.validate();
    return set;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kFormat, "bad manifest in '" + dir.string() + "': " + e.what());
  }
}

}  // namespace sfgnn
