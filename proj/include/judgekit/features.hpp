#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "judgekit/data_model.hpp"
#include "judgekit/feature_block.hpp"
#include "judgekit/linguistic.hpp"
#include "judgekit/llm_features.hpp"

namespace judgekit {

enum class Block { Base = 0, Llm = 1, Linguistic = 2 };
std::string_view to_string(Block block);
Block block_from_string(std::string_view name);
/// Block implied by a feature name prefix ("base.", "llm.", "ling.").
Block block_of(std::string_view feature_name);

enum class Ablation { Full, BaseOnly, BaseLlm, BaseLing };
std::string_view to_string(Ablation ablation);
Ablation ablation_from_string(std::string_view name);
bool uses_block(Ablation ablation, Block block);

inline constexpr int kSchemaVersion = 1;

struct FeatureField {
  std::string name;
  Block block = Block::Base;
  bool operator==(const FeatureField&) const = default;
};

struct FeatureSchema {
  std::vector<FeatureField> fields;
  int version = kSchemaVersion;
  std::vector<std::string> lexicon_hashes;

  std::size_t size() const { return fields.size(); }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Unique names, blocks in Base, Llm, Linguistic order.
  void validate() const;
  /// SHA-256 over the canonical JSON form.
  std::string hash() const;

  std::string to_json() const;
  static FeatureSchema from_json(std::string_view text);

  bool operator==(const FeatureSchema&) const = default;
};

/// Concatenates the three name lists under the ablation's block filter.
FeatureSchema make_schema(const std::vector<std::string>& base, const std::vector<std::string>& llm,
                          const std::vector<std::string>& ling, Ablation ablation,
                          std::vector<std::string> lexicon_hashes = {});

struct FeatureVector {
  std::vector<double> values;
  std::vector<unsigned char> present;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Rows of one schema plus the group and label of each row's instance.
struct FeatureMatrix {
  FeatureSchema schema;
  std::vector<FeatureVector> rows;
  std::vector<std::string> group_ids;
  std::vector<Label> labels;

  std::size_t size() const { return rows.size(); }
  bool operator==(const FeatureMatrix&) const = default;
};

/// Base feature names for a dataset type. Listwise uses `listwise_items`
/// slots for both item scores and rank positions.
std::vector<std::string> base_feature_names(JudgmentType type, const std::vector<std::string>& dims,
                                            int listwise_items);

/// Pointwise: one value per dimension. Pairwise: the signed score. Listwise:
/// item scores, then the rank position of each item (0 = best). Slots past
/// the instance's own items are absent.
FeatureBlock base_features(const JudgmentInstance& instance, const std::vector<std::string>& dims,
                           int listwise_items);

/// Concatenates blocks in schema order. Blocks the schema omits must be
/// empty; any name or length mismatch is an InputError.
FeatureVector assemble(const FeatureSchema& schema, const FeatureBlock& base, const FeatureBlock& llm,
                       const FeatureBlock& ling);

/// Population mean and standard deviation per feature over present values.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std_dev;

  std::size_t size() const { return mean.size(); }
  bool is_constant(std::size_t i) const { return !(std_dev[i] > 0.0); }
  bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const FeatureMatrix& matrix);
/// (x - mean) / std; constant features and absent values map to 0.
FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v);
/// Dense standardized values (absent entries already imputed).
std::vector<double> standardized_values(const Standardizer& s, const FeatureVector& v);

/// Rounds to the 9-significant-digit value written to matrix files, so
/// in-memory and reloaded matrices agree exactly.
double quantize(double value);

struct ExtractOptions {
  Ablation ablation = Ablation::Full;
  /// Listwise slot count; 0 takes scale.listwise_items, else the largest
  /// response count in the dataset.
  int listwise_items = 0;
  int jobs = 1;

  // LLM block.
  llm::Provider* provider = nullptr;
  llm::ProviderConfig provider_config;
  llm::FeatureCache* cache = nullptr;
  llm::FetchOptions fetch;

  ling::Analyzers analyzers;
};

int resolve_listwise_items(const Dataset& dataset, int requested);

/// Schema the extractor produces for `dataset` under `options`.
FeatureSchema schema_for(const Dataset& dataset, const ExtractOptions& options);

/// One row per instance, in dataset order. The LLM block needs `cache` when
/// the ablation keeps it; the cache is flushed before returning.
FeatureMatrix extract_matrix(const Dataset& dataset, const ExtractOptions& options);

/// CSV with header = schema names + `__group_id`, `__label`; values printed
/// with %.9g, absent values as empty cells. The schema goes to the sidecar
/// `<path>.schema.json`.
std::string matrix_to_csv(const FeatureMatrix& matrix);
void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix parse_matrix_csv(std::string_view csv, const std::optional<FeatureSchema>& schema);
/// Reads the CSV and its sidecar; without a sidecar, blocks come from name
/// prefixes and lexicon hashes are empty.
FeatureMatrix load_matrix(const std::filesystem::path& path);
std::filesystem::path schema_sidecar(const std::filesystem::path& matrix_path);

}  // namespace judgekit
