#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace judgekit {

/// Provenance record written as manifest.json into every output directory.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;   // path -> sha256
  std::map<std::string, std::string> output_hashes;  // file name -> sha256
  std::vector<std::uint64_t> seeds;
  int schema_version = 0;
  std::vector<std::string> lexicon_hashes;
  std::string started_at;
  std::string finished_at;

  std::string to_json() const;
};

/// UTC ISO-8601 time; SOURCE_DATE_EPOCH, when set, pins it.
std::string timestamp_now();

/// Hashes every regular file in `dir` except the manifest itself, then
/// writes the manifest there.
void write_manifest(RunManifest manifest, const std::filesystem::path& dir);

}  // namespace judgekit
