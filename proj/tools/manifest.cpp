#include "manifest.hpp"

#include "sfgnn/binary_io.hpp"
#include "sfgnn/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>

namespace sfgnn::cli {

using Json = nlohmann::ordered_json;

std::string to_json(const RunManifest& m) {
  Json flags = Json::object();
  for (const auto& [k, v] : m.flags) flags[k] = v;
  const Json j{{"command", m.command}, {"tool_version", m.tool_version}, {"timestamp", m.timestamp},
               {"seed", m.seed},       {"flags", flags},                 {"inputs", m.inputs},
               {"outputs", m.outputs}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("flags").items()) m.flags[k] = v.get<std::string>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const Json::exception& e) {
    raise(ErrorCode::kFormat, std::string("invalid run manifest: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunGuard::RunGuard(std::filesystem::path dir, const RunManifest& manifest) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  require(!ec, ErrorCode::kIo, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  io::write_text_file(dir_ / "manifest.json", to_json(manifest));
  io::write_text_file(dir_ / ".partial", manifest.command + "\n");
}

void RunGuard::finish() { std::filesystem::remove(dir_ / ".partial"); }

}  // namespace sfgnn::cli
