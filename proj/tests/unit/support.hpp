#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "judgekit/data_model.hpp"

namespace jk_test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("judgekit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline judgekit::ScaleSpec five_dim_scale() {
  judgekit::ScaleSpec s;
  for (const char* name : {"Helpfulness", "Correctness", "Coherence", "Complexity", "Verbosity"})
    s.dimensions.push_back({name, 0, 4, 1});
  return s;
}

inline judgekit::JudgmentInstance pointwise(const std::string& id, const std::string& text,
                                            std::map<std::string, double> dims) {
  judgekit::JudgmentInstance inst;
  inst.candidate.id = id;
  inst.candidate.prompt = "Explain the idea.";
  inst.candidate.responses = {text};
  inst.score = judgekit::PointwiseScore{std::move(dims)};
  return inst;
}

}  // namespace jk_test
