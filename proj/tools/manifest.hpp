#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn::cli {

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> flags;  // every flag, given or defaulted
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string to_json(const RunManifest& m);
RunManifest manifest_from_json(std::string_view json);

std::string utc_timestamp();

/// Writes `manifest.json` and a `.partial` marker into `dir` on construction.
/// `finish` removes the marker; a run that throws leaves it in place.
class RunGuard {
 public:
  RunGuard(std::filesystem::path dir, const RunManifest& manifest);
  void finish();

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace sfgnn::cli
