#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgekit/data_model.hpp"
#include "judgekit/error.hpp"
#include "judgekit/feature_block.hpp"

namespace judgekit::llm {

struct ProviderConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model_id;
  std::string api_key_env;
  int max_retries = 2;
  std::chrono::milliseconds timeout{60000};
  int max_concurrent = 1;
  double temperature = 0.0;
  std::chrono::milliseconds backoff_base{500};

  void validate() const;
};

ProviderConfig parse_provider_config(std::string_view json_text);
ProviderConfig load_provider_config(const std::filesystem::path& path);

/// Stylistic scores plus judgment-aligned scores from the judge model. The
/// rationale is kept for audit and never becomes a feature.
struct LlmFeatureRecord {
  double style = 0, format = 0, wording = 0;
  std::map<std::string, double> aligned;
  std::optional<double> overall;
  std::string rationale;

  bool operator==(const LlmFeatureRecord&) const = default;
};

std::string record_to_json(const LlmFeatureRecord& record);
LlmFeatureRecord record_from_json(std::string_view json_text);

/// One numeric field expected in the model's JSON answer.
struct FieldSpec {
  std::string json_key;     // as written in the prompt, e.g. "Helpfulness"
  std::string feature_key;  // "style", "format", "wording", "overall" or an aligned key
  double min = 0, max = 4;
  bool required = false;
};

struct ResponseSchema {
  std::vector<FieldSpec> fields;
  /// Aligned keys in feature order.
  std::vector<std::string> aligned_keys;
  bool has_overall = false;
};

/// Thrown when a raw answer cannot be turned into a record.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Transport-level failure; retried with backoff.
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Template ids: "pointwise", "review", "pairwise", "listwise".
std::string default_template_id(JudgmentType type);
std::vector<std::string> template_ids();

/// Fills the template's placeholders from the instance. The scale supplies
/// dimension names, ranges, pairwise levels and listwise arity.
std::string render_prompt(std::string_view template_id, const JudgmentInstance& instance,
                          const ScaleSpec& scale);

ResponseSchema expected_schema(std::string_view template_id, const ScaleSpec& scale);

/// Parses the first balanced JSON object in `raw`; tolerates surrounding
/// prose and code fences.
LlmFeatureRecord parse_judgment_json(std::string_view raw, const ResponseSchema& schema);

/// Feature names of the LLM block: llm.style, llm.format, llm.wording,
/// llm.aligned.<key>..., llm.overall, llm.valid.
std::vector<std::string> llm_feature_names(const ResponseSchema& schema);

FeatureBlock record_to_block(const LlmFeatureRecord& record, const ResponseSchema& schema);
FeatureBlock invalid_block(const ResponseSchema& schema);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Returns the model's text answer; throws TransportError on failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

/// OpenAI-compatible chat-completions client.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);
  std::string complete(const std::string& prompt) override;

  /// Request body sent for `prompt` (exposed for tests).
  std::string request_body(const std::string& prompt) const;

 private:
  ProviderConfig config_;
};

/// Canned answers; counts calls.
class StubProvider : public Provider {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;
  explicit StubProvider(Responder responder) : responder_(std::move(responder)) {}
  std::string complete(const std::string& prompt) override {
    calls_.fetch_add(1);
    return responder_(prompt);
  }
  int calls() const { return calls_.load(); }

 private:
  Responder responder_;
  std::atomic<int> calls_{0};
};

/// Content-addressed store of parsed records, persisted as JSONL
/// {"key": hex, "record": {...}}. Thread-safe; flush() writes a temp file and
/// renames it over the target, so readers never see a torn file.
class FeatureCache {
 public:
  FeatureCache() = default;
  explicit FeatureCache(std::filesystem::path path);

  std::optional<LlmFeatureRecord> get(const std::string& key) const;
  void put(const std::string& key, const LlmFeatureRecord& record);
  std::size_t size() const;
  void flush() const;

  std::size_t export_to(const std::filesystem::path& path) const;
  std::size_t import_from(const std::filesystem::path& path);

  std::string serialize() const;

 private:
  void write_atomic(const std::filesystem::path& path) const;

  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, LlmFeatureRecord> records_;
};

std::string cache_key(std::string_view template_id, std::string_view prompt,
                      std::string_view model_id);

enum class CacheMode {
  Online,          // miss -> call provider
  OfflineStrict,   // miss -> ProviderError naming the instance
  OfflineLenient,  // miss -> invalid block (llm.valid = 0)
};

struct FetchOptions {
  std::string template_id;  // empty -> default for the instance type
  CacheMode mode = CacheMode::Online;
  /// Transport failures after all retries raise instead of yielding an
  /// invalid block.
  bool fail_on_transport = true;
};

FeatureBlock fetch_llm_features(const JudgmentInstance& instance, const ScaleSpec& scale,
                                Provider* provider, const ProviderConfig& config,
                                FeatureCache& cache, const FetchOptions& options = {});

/// Fetches many instances with up to config.max_concurrent requests in
/// flight. Output order follows input order.
std::vector<FeatureBlock> fetch_llm_features_batch(std::span<const JudgmentInstance* const> instances,
                                                   const ScaleSpec& scale, Provider* provider,
                                                   const ProviderConfig& config,
                                                   FeatureCache& cache,
                                                   const FetchOptions& options = {});

}  // namespace judgekit::llm
