#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace judgekit {

enum class JudgmentType { Pointwise, Pairwise, Listwise };

std::string_view to_string(JudgmentType type);
JudgmentType judgment_type_from_string(std::string_view name);

/// Source of a judgment group. Human = 0 and Llm = 1 double as class labels.
enum class Label { Human = 0, Llm = 1, Unknown = 2 };

std::string_view to_string(Label label);

/// Integer grid {min, min + step, ..., max} for one scored dimension.
struct DimensionScale {
  std::string name;
  int min = 0;
  int max = 4;
  int step = 1;

  int levels() const { return (max - min) / step + 1; }
  bool on_grid(double value) const;
  std::vector<int> grid() const;

  bool operator==(const DimensionScale&) const = default;
};

/// Rating scale of a dataset. Pointwise datasets use `dimensions`; pairwise
/// scores live on [-pair_levels_x, pair_levels_x]; listwise item scores use
/// the first dimension entry (when present) and `listwise_items` fixes arity.
struct ScaleSpec {
  std::vector<DimensionScale> dimensions;
  int pair_levels_x = 0;
  int listwise_items = 0;

  void validate() const;
  const DimensionScale* find(std::string_view name) const;
  std::vector<std::string> dimension_names() const;

  bool operator==(const ScaleSpec&) const = default;
};

ScaleSpec load_scale(const std::filesystem::path& path);
void save_scale(const ScaleSpec& scale, const std::filesystem::path& path);
ScaleSpec parse_scale(std::string_view json_text);
std::string scale_to_json(const ScaleSpec& scale);

struct Candidate {
  std::string id;
  std::optional<std::string> prompt;
  std::vector<std::string> responses;
  std::map<std::string, std::string> meta;

  bool operator==(const Candidate&) const = default;
};

struct PointwiseScore {
  std::map<std::string, double> dims;
  bool operator==(const PointwiseScore&) const = default;
};

struct PairwiseScore {
  int pair = 0;
  bool operator==(const PairwiseScore&) const = default;
};

struct ListwiseScore {
  std::vector<double> items;
  std::vector<int> ranking;
  bool operator==(const ListwiseScore&) const = default;
};

using JudgmentScore = std::variant<PointwiseScore, PairwiseScore, ListwiseScore>;

/// Ranking implied by item scores: non-increasing score, ties by lower index.
std::vector<int> ranking_from_scores(const std::vector<double>& items);

struct JudgmentInstance {
  Candidate candidate;
  JudgmentScore score;

  JudgmentType type() const { return static_cast<JudgmentType>(score.index()); }
  bool operator==(const JudgmentInstance&) const = default;
};

struct JudgmentGroup {
  std::string group_id;
  std::vector<JudgmentInstance> instances;
  Label label = Label::Unknown;
  std::optional<std::string> judge_id;

  JudgmentType type() const { return instances.front().type(); }
  bool operator==(const JudgmentGroup&) const = default;
};

struct Dataset {
  std::vector<JudgmentGroup> groups;
  ScaleSpec scale;
  std::vector<std::string> dimension_names;

  /// Type shared by all groups; Pointwise for an empty dataset.
  JudgmentType type() const;
  std::size_t instance_count() const;
  bool operator==(const Dataset&) const = default;
};

/// Checks one instance against the scale; throws InputError naming the
/// group, dimension and value on violation.
void validate_instance(const JudgmentInstance& instance, const ScaleSpec& scale,
                       std::string_view group_id);
void validate_group(const JudgmentGroup& group, const ScaleSpec& scale);

/// Reads the JSONL corpus. Errors carry the 1-based line number.
Dataset load_dataset(const std::filesystem::path& path, const ScaleSpec& scale);
Dataset parse_dataset(std::string_view jsonl, const ScaleSpec& scale);

std::string group_to_json_line(const JudgmentGroup& group);
std::string dataset_to_jsonl(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct LabeledInstance {
  JudgmentInstance instance;
  Label label = Label::Unknown;
  std::optional<std::string> judge_id;
};

struct RegroupResult {
  std::vector<JudgmentGroup> groups;
  std::size_t dropped = 0;
};

/// Label-pure groups of exactly k instances. Within each label the order is a
/// seeded shuffle; the count mod k leftovers are dropped.
RegroupResult regroup(const std::vector<LabeledInstance>& instances, int k, std::uint64_t seed);

std::vector<LabeledInstance> flatten(const std::vector<JudgmentGroup>& groups);

/// Remaps every score through `mapping` (source level -> coarse level).
Dataset coarsen_scale(const Dataset& dataset, const std::map<int, int>& mapping);

/// Keeps only `dims` of a pointwise dataset, in dataset order.
Dataset project_dimensions(const Dataset& dataset, const std::vector<std::string>& dims);

/// Stratified split at group granularity. Returns {train, test}.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double test_fraction,
                                          std::uint64_t seed);

}  // namespace judgekit
