#include "judgekit/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "judgekit/error.hpp"
#include "judgekit/hash.hpp"

namespace judgekit {

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["input_hashes"] = input_hashes;
  j["output_hashes"] = output_hashes;
  j["seeds"] = seeds;
  j["schema_version"] = schema_version;
  j["lexicon_hashes"] = lexicon_hashes;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j.dump(1) + "\n";
}

std::string timestamp_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(RunManifest manifest, const std::filesystem::path& dir) {
  manifest.output_hashes.clear();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    manifest.output_hashes[name] = sha256_file(entry.path());
  }
  if (manifest.finished_at.empty()) manifest.finished_at = timestamp_now();
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write manifest in " + dir.string());
  out << manifest.to_json();
}

}  // namespace judgekit
