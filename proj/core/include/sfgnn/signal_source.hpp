#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

enum class HealthState : std::uint8_t { kHealthy = 0, kDamaged = 1 };

std::string_view to_string(HealthState s);
HealthState parse_health_state(std::string_view text);

enum class Provenance : std::uint8_t { kSynthetic, kImported };

std::string_view to_string(Provenance p);

inline constexpr std::size_t kDefaultSegmentLength = 4000;
inline constexpr double kDefaultSampleRate = 40000.0;
inline constexpr double kDefaultImpulseRate = 20.0;
inline constexpr double kDefaultImpulseGain = 5.0;

/// Accelerometer channels of the instrumented gearbox.
inline constexpr std::array<std::string_view, 8> kSensorIds = {"AN3", "AN4", "AN5", "AN6",
                                                               "AN7", "AN8", "AN9", "AN10"};

struct Tone {
  double frequency_hz;
  double amplitude;
  double phase_rad;
};

/// Synthetic vibration model of one accelerometer.
///
/// Healthy signal: three phase-locked gear-mesh tones plus white Gaussian
/// noise of standard deviation `noise_sigma` (m/s^2). Every tone frequency is
/// a multiple of 10 Hz, so a default 0.1 s segment holds an integer number of
/// cycles and the deterministic part has zero mean.
///
/// Damaged signal: the healthy signal plus a train of bursts, one every
/// 1/impulse_rate seconds at a per-segment random offset. Each burst is
/// gain * exp(-t / decay_s) * sin(2 pi resonance_hz t), a ringing structural
/// resonance excited by an impact.
///
///   sensor  mount point                     tones (Hz : amplitude)            resonance
///   AN3     ring gear radial 6 o'clock      40:0.20   80:0.10  120:0.05      3100 Hz
///   AN4     ring gear radial 12 o'clock     40:0.18   80:0.09  160:0.06      3300 Hz
///   AN5     LS-SH radial                    40:0.12  160:0.14  320:0.06      2500 Hz
///   AN6     IMS-SH radial                  160:0.12  320:0.16  640:0.06      2700 Hz
///   AN7     HS-SH radial                    30:0.10 1340:0.18 2680:0.07      3800 Hz
///   AN8     HS-SH upwind bearing radial     30:0.08 1340:0.14 2680:0.08      4200 Hz
///   AN9     HS-SH downwind bearing radial   30:0.08 1340:0.12 2680:0.10      4500 Hz
///   AN10    carrier downwind radial         40:0.10   80:0.12  320:0.06      2900 Hz
///
/// Tone phases are 0.3, 1.1 and 2.0 rad; noise sigma 0.05; decay 1 ms.
struct SensorProfile {
  std::string_view sensor_id;
  std::string_view description;
  std::array<Tone, 3> tones;
  double noise_sigma;
  double resonance_hz;
  double decay_s;
};

const SensorProfile& sensor_profile(std::string_view sensor_id);
std::size_t sensor_index(std::string_view sensor_id);

struct Segment {
  std::string sensor_id;
  std::vector<double> samples;
  HealthState label = HealthState::kHealthy;
  std::size_t segment_index = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentSet {
  std::vector<Segment> segments;
  double sample_rate = kDefaultSampleRate;
  Provenance provenance = Provenance::kSynthetic;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return segments.size(); }
  bool empty() const noexcept { return segments.empty(); }
  /// Common segment length; 0 for an empty set.
  std::size_t segment_length() const noexcept;
  /// Checks the equal-length and positive-rate invariants.
  void validate() const;

  friend bool operator==(const SegmentSet&, const SegmentSet&) = default;
};

struct SplitRatios {
  double train = 0.6;
  double test = 0.2;
  double dev = 0.2;

  void validate() const;
};

template <typename T>
struct Split {
  T train;
  T test;
  T dev;
};

SegmentSet generate_healthy(std::uint64_t seed, std::size_t n_segments,
                            std::size_t segment_length, double sample_rate,
                            std::string_view sensor_id);

SegmentSet generate_faulty(std::uint64_t seed, std::size_t n_segments, std::size_t segment_length,
                           double sample_rate, std::string_view sensor_id, double impulse_rate,
                           double impulse_gain);

/// floor(len / L) consecutive non-overlapping windows; the remainder is dropped.
std::vector<std::vector<double>> segment_signal(std::span<const double> signal,
                                                std::ptrdiff_t segment_length);

/// Seeded shuffle followed by a contiguous partition of sizes
/// floor(n * train), floor(n * test) and the remainder.
Split<SegmentSet> split_dataset(const SegmentSet& set, const SplitRatios& ratios,
                                std::uint64_t seed);

/// Sizes produced by split_dataset for n items.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// One ASCII decimal per line; segmented with `segment_length`.
SegmentSet import_csv(const std::filesystem::path& path, std::string_view sensor_id,
                      HealthState label, std::size_t segment_length = kDefaultSegmentLength);

/// Writes `manifest.json` and `segments.f64` (little-endian binary64, segment
/// after segment) into `dir`. The set must hold a single sensor and label.
void write_segment_set(const std::filesystem::path& dir, const SegmentSet& set);
SegmentSet read_segment_set(const std::filesystem::path& dir);

}  // namespace sfgnn
