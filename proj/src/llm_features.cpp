#include "judgekit/llm_features.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "judgekit/hash.hpp"

namespace judgekit::llm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Provider configuration

void ProviderConfig::validate() const {
  if (max_retries < 0) throw InputError("provider max_retries must be >= 0");
  if (max_concurrent < 1) throw InputError("provider max_concurrent must be >= 1");
  if (timeout.count() <= 0) throw InputError("provider timeout must be positive");
  if (backoff_base.count() < 0) throw InputError("provider backoff must be >= 0");
}

ProviderConfig parse_provider_config(std::string_view json_text) {
  ProviderConfig cfg;
  try {
    const json doc = json::parse(json_text);
    cfg.endpoint = doc.value("endpoint", "");
    cfg.model_id = doc.value("model_id", doc.value("model", ""));
    cfg.api_key_env = doc.value("api_key_env", "");
    cfg.max_retries = doc.value("max_retries", cfg.max_retries);
    cfg.timeout = std::chrono::milliseconds(
        static_cast<long long>(doc.value("timeout_seconds", 60.0) * 1000.0));
    cfg.max_concurrent = doc.value("max_concurrent", cfg.max_concurrent);
    cfg.temperature = doc.value("temperature", cfg.temperature);
    cfg.backoff_base = std::chrono::milliseconds(doc.value("backoff_ms", 500));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed provider config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ProviderConfig load_provider_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read provider config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_provider_config(buf.str());
}

// ---------------------------------------------------------------------------
// Records

std::string record_to_json(const LlmFeatureRecord& record) {
  json j;
  j["style"] = record.style;
  j["format"] = record.format;
  j["wording"] = record.wording;
  j["aligned"] = json::object();
  for (const auto& [k, v] : record.aligned) j["aligned"][k] = v;
  j["overall"] = record.overall ? json(*record.overall) : json(nullptr);
  j["rationale"] = record.rationale;
  return j.dump();
}

namespace {

LlmFeatureRecord record_from_json_value(const json& j) {
  LlmFeatureRecord r;
  r.style = j.at("style").get<double>();
  r.format = j.at("format").get<double>();
  r.wording = j.at("wording").get<double>();
  for (const auto& [k, v] : j.at("aligned").items()) r.aligned[k] = v.get<double>();
  if (j.contains("overall") && !j["overall"].is_null()) r.overall = j["overall"].get<double>();
  r.rationale = j.value("rationale", "");
  return r;
}

}  // namespace

LlmFeatureRecord record_from_json(std::string_view json_text) {
  try {
    return record_from_json_value(json::parse(json_text));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed feature record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Templates

namespace {

constexpr std::string_view kPointwiseTemplate =
    R"(Given a prompt and a response, follow the rubric to make a judgment.

## Rubric:
Judge the response on these aspects: Style, Format, Wording, [DIMENSION_LIST].
Style, Format and Wording rate the surface polish and presentation of the response, each in [0, 4]. Assign every other aspect a scalar score within the range shown in the schema.

## Prompt: [PROMPT]

## Response: [RESPONSE]

Please output a valid JSON object using the following schema:
{
[SCHEMA_FIELDS]
}

Formatted the abovementioned schema and produce the judgment JSON now.)";

constexpr std::string_view kReviewTemplate =
    R"(You are an AI researcher reviewing a paper submitted to a prestigious AI conference. Thoroughly evaluate the paper, adhering to the provided guidelines, and return a detailed assessment in the specified JSON format.

## Manuscript: [RESPONSE]

## Reviewer Guidelines (dimensions to cover):
Rate the writing for Style, Format and Wording, each in [0, 4].
Assign numerical ratings for: [DIMENSION_LIST], within the ranges shown in the schema.

## Output a valid JSON object with the following fields:
{
[SCHEMA_FIELDS]
}

Formatted the abovementioned schema and produce the review JSON now.)";

constexpr std::string_view kPairwiseTemplate =
    R"(Given a prompt and two responses, follow the rubric to make a comparative judgment.

## Rubric:
Compare Response 1 and Response 2 along five aspects: helpfulness, correctness, coherence, complexity, and verbosity.
Assign a single comparative score in [PAIR_SCALE] using the scale:
[PAIR_LEGEND]
Also rate the presentation of Response 2 relative to Response 1 for Style, Format and Wording, each in [0, 4]: 0 means Response 1 is much better presented, 2 means they are equal, 4 means Response 2 is much better presented.

## Prompt (conversation/context):
[PROMPT]

## Response 1:
[RESPONSE_1]

## Response 2:
[RESPONSE_2]

Please output a valid JSON object using the following schema:
{
[SCHEMA_FIELDS]
}

Formatted the abovementioned schema and produce the judgment JSON now.)";

constexpr std::string_view kListwiseTemplate =
    R"(Given a prompt and [ITEM_COUNT_WORD] responses, follow the rubric to assess relevance and rank the responses.

## Rubric (per-response relevance score in [ITEM_RANGE]):
[ITEM_RUBRIC]
Also rate the overall presentation of the responses for Style, Format and Wording, each in [0, 4].

## Prompt: [PROMPT]

[RESPONSE_SLOTS]

Please output a valid JSON object using the following schema:
{
[SCHEMA_FIELDS]
}

Formatted the abovementioned schema and produce the judgment JSON now.)";

std::string number_text(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string range_text(double lo, double hi) { return number_text(lo) + "-" + number_text(hi); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string count_word(int n) {
  static const char* kWords[] = {"zero", "one", "two",   "three", "four", "five",
                                 "six",  "seven", "eight", "nine", "ten"};
  return n >= 0 && n <= 10 ? kWords[n] : std::to_string(n);
}

int listwise_arity(const ScaleSpec& scale) { return scale.listwise_items > 0 ? scale.listwise_items : 3; }

std::pair<double, double> item_range(const ScaleSpec& scale) {
  if (!scale.dimensions.empty()) return {scale.dimensions.front().min, scale.dimensions.front().max};
  return {1, 4};
}

std::string_view template_text(std::string_view id) {
  if (id == "pointwise") return kPointwiseTemplate;
  if (id == "review") return kReviewTemplate;
  if (id == "pairwise") return kPairwiseTemplate;
  if (id == "listwise") return kListwiseTemplate;
  throw InputError("unknown prompt template '" + std::string(id) + "'");
}

JudgmentType template_type(std::string_view id) {
  if (id == "pairwise") return JudgmentType::Pairwise;
  if (id == "listwise") return JudgmentType::Listwise;
  return JudgmentType::Pointwise;
}

bool is_placeholder_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return std::isupper(static_cast<unsigned char>(key.front())) != 0;
}

// Single left-to-right pass; substituted text is never rescanned. Keys not
// in `values` are left alone when `strict` is false.
std::string substitute(std::string_view text, const std::map<std::string, std::string>& values,
                       bool strict) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('[', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = text.find(']', open + 1);
    if (close == std::string_view::npos) break;
    const std::string_view key = text.substr(open + 1, close - open - 1);
    out.append(text.substr(pos, open - pos));
    if (is_placeholder_key(key)) {
      if (const auto it = values.find(std::string(key)); it != values.end()) {
        out += it->second;
      } else if (strict) {
        throw InputError("missing placeholder content for [" + std::string(key) + "]");
      } else {
        out.append(text.substr(open, close - open + 1));
      }
    } else {
      out.append(text.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(text.substr(pos));
  return out;
}

std::string schema_lines(const ResponseSchema& schema, std::string_view rationale_hint,
                         bool with_ranking, int arity) {
  std::vector<std::string> lines;
  lines.push_back("   \"Rationale\": <" + std::string(rationale_hint) + ">");
  for (const auto& f : schema.fields)
    lines.push_back("   \"" + f.json_key + "\": <" + range_text(f.min, f.max) + ">");
  if (with_ranking) {
    std::string example = "[";
    for (int i = 0; i < arity; ++i) example += (i ? "," : "") + std::to_string(i);
    lines.push_back("   \"Ranking\": <list of indices indicating best->worst, e.g., " + example + "]>");
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i];
    if (i + 1 < lines.size()) out += ",\n";
  }
  return out;
}

std::string pair_scale_text(int x) {
  std::string out = "{";
  for (int v = -x; v <= x; ++v) out += (v > -x ? "," : "") + std::to_string(v);
  return out + "}";
}

std::string pair_legend(int x) {
  const auto phrase = [x](int magnitude) -> std::string {
    if (magnitude == x && x >= 2) return "much better";
    if (magnitude == 1 && x >= 3) return "slightly better";
    return "better";
  };
  std::vector<std::string> parts;
  for (int v = -x; v <= x; ++v) {
    if (v < 0)
      parts.push_back(std::to_string(v) + ": R1 " + phrase(-v) + " than R2");
    else if (v == 0)
      parts.push_back("0: about the same");
    else
      parts.push_back(std::to_string(v) + ": R2 " + phrase(v) + " than R1");
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += parts[i] + (i + 1 < parts.size() ? "; " : ".");
  return out;
}

std::string item_rubric(double lo, double hi) {
  if (lo == 1 && hi == 4)
    return "4: Reasonable and convincing; on par with or better than a likely correct answer.\n"
           "3: Possibly an answer, but not sufficiently convincing; a better-quality answer likely exists.\n"
           "2: Not an acceptable answer; unreasonable or does not address the question, but still on-topic.\n"
           "1: Completely out of context or nonsensical.";
  return number_text(hi) + ": fully relevant and convincing.\n" + number_text(lo) +
         ": completely out of context or nonsensical.\nIntermediate values interpolate between these.";
}

}  // namespace

std::string default_template_id(JudgmentType type) {
  switch (type) {
    case JudgmentType::Pointwise: return "pointwise";
    case JudgmentType::Pairwise: return "pairwise";
    case JudgmentType::Listwise: return "listwise";
  }
  return "pointwise";
}

std::vector<std::string> template_ids() { return {"pointwise", "review", "pairwise", "listwise"}; }

ResponseSchema expected_schema(std::string_view template_id, const ScaleSpec& scale) {
  (void)template_text(template_id);
  ResponseSchema schema;
  schema.fields.push_back({"Style", "style", 0, 4, true});
  schema.fields.push_back({"Format", "format", 0, 4, true});
  schema.fields.push_back({"Wording", "wording", 0, 4, true});
  switch (template_type(template_id)) {
    case JudgmentType::Pointwise: {
      bool overall_is_dimension = false;
      for (const auto& d : scale.dimensions) {
        schema.fields.push_back({d.name, d.name, static_cast<double>(d.min), static_cast<double>(d.max), false});
        schema.aligned_keys.push_back(d.name);
        overall_is_dimension = overall_is_dimension || lower(d.name) == "overall";
      }
      if (!overall_is_dimension) {
        const double hi = template_id == "review" ? 10 : 4;
        const double lo = template_id == "review" ? 1 : 0;
        schema.fields.push_back({"Overall", "overall", lo, hi, false});
        schema.has_overall = true;
      }
      break;
    }
    case JudgmentType::Pairwise: {
      const int x = scale.pair_levels_x > 0 ? scale.pair_levels_x : 3;
      schema.fields.push_back({"Score", "pair", static_cast<double>(-x), static_cast<double>(x), false});
      schema.aligned_keys.push_back("pair");
      break;
    }
    case JudgmentType::Listwise: {
      const auto [lo, hi] = item_range(scale);
      for (int i = 0; i < listwise_arity(scale); ++i) {
        const std::string key = "item" + std::to_string(i);
        schema.fields.push_back({"Response" + std::to_string(i + 1) + " Score", key, lo, hi, false});
        schema.aligned_keys.push_back(key);
      }
      break;
    }
  }
  return schema;
}

std::string render_prompt(std::string_view template_id, const JudgmentInstance& instance,
                          const ScaleSpec& scale) {
  const std::string_view text = template_text(template_id);
  const JudgmentType type = template_type(template_id);
  if (type != instance.type())
    throw InputError("template '" + std::string(template_id) + "' expects a " +
                     std::string(to_string(type)) + " instance");
  const ResponseSchema schema = expected_schema(template_id, scale);
  const int arity = listwise_arity(scale);

  std::map<std::string, std::string> structure;
  std::vector<std::string> dims;
  for (const auto& d : scale.dimensions) dims.push_back(d.name);
  std::string dim_list;
  for (std::size_t i = 0; i < dims.size(); ++i) dim_list += (i ? ", " : "") + dims[i];
  structure["DIMENSION_LIST"] = dim_list;
  switch (type) {
    case JudgmentType::Pointwise:
      structure["SCHEMA_FIELDS"] = schema_lines(schema, "explanation for the given scores", false, 0);
      break;
    case JudgmentType::Pairwise: {
      const int x = scale.pair_levels_x > 0 ? scale.pair_levels_x : 3;
      structure["PAIR_SCALE"] = pair_scale_text(x);
      structure["PAIR_LEGEND"] = pair_legend(x);
      structure["SCHEMA_FIELDS"] = schema_lines(schema, "explanation for the comparative score", false, 0);
      break;
    }
    case JudgmentType::Listwise: {
      const auto [lo, hi] = item_range(scale);
      structure["ITEM_COUNT_WORD"] = count_word(arity);
      structure["ITEM_RANGE"] = "[" + number_text(lo) + ", " + number_text(hi) + "]";
      structure["ITEM_RUBRIC"] = item_rubric(lo, hi);
      std::string slots;
      for (int i = 1; i <= arity; ++i)
        slots += (i > 1 ? "\n\n" : "") + std::string("## Response ") + std::to_string(i) + ": [RESPONSE_" +
                 std::to_string(i) + "]";
      structure["RESPONSE_SLOTS"] = slots;
      structure["SCHEMA_FIELDS"] =
          schema_lines(schema, "explanation for your judgment and ranking", true, arity);
      break;
    }
  }
  const std::string shaped = substitute(text, structure, false);

  std::map<std::string, std::string> content;
  if (instance.candidate.prompt) content["PROMPT"] = *instance.candidate.prompt;
  const auto& responses = instance.candidate.responses;
  if (!responses.empty()) content["RESPONSE"] = responses.front();
  for (std::size_t i = 0; i < responses.size(); ++i)
    content["RESPONSE_" + std::to_string(i + 1)] = responses[i];
  // Listwise slots beyond the instance's own responses are padding.
  for (int i = static_cast<int>(responses.size()) + 1; type == JudgmentType::Listwise && i <= arity; ++i)
    content["RESPONSE_" + std::to_string(i)] = "(no response)";
  return substitute(shaped, content, true);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::optional<json> first_object(std::string_view raw) {
  for (std::size_t start = raw.find('{'); start != std::string_view::npos;
       start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        try {
          json j = json::parse(raw.substr(start, i - start + 1));
          if (j.is_object()) return j;
        } catch (const json::exception&) {
        }
        break;
      }
    }
  }
  return std::nullopt;
}

std::optional<double> coerce_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return std::nullopt;
    s = s.substr(b, e - b + 1);
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return d;
  }
  return std::nullopt;
}

}  // namespace

LlmFeatureRecord parse_judgment_json(std::string_view raw, const ResponseSchema& schema) {
  const std::optional<json> obj = first_object(raw);
  if (!obj) throw ParseError("no parseable JSON object in model output");
  std::map<std::string, const json*> by_key;
  for (const auto& [k, v] : obj->items()) by_key.emplace(lower(k), &v);

  LlmFeatureRecord record;
  if (const auto it = by_key.find("rationale"); it != by_key.end() && it->second->is_string())
    record.rationale = it->second->get<std::string>();
  for (const auto& field : schema.fields) {
    const auto it = by_key.find(lower(field.json_key));
    if (it == by_key.end() || it->second->is_null()) {
      if (field.required) throw ParseError("required field '" + field.json_key + "' missing");
      continue;
    }
    const std::optional<double> value = coerce_number(*it->second);
    if (!value) throw ParseError("field '" + field.json_key + "' is not numeric");
    if (*value < field.min || *value > field.max)
      throw ParseError("field '" + field.json_key + "' value " + number_text(*value) +
                       " outside [" + number_text(field.min) + ", " + number_text(field.max) + "]");
    if (field.feature_key == "style")
      record.style = *value;
    else if (field.feature_key == "format")
      record.format = *value;
    else if (field.feature_key == "wording")
      record.wording = *value;
    else if (field.feature_key == "overall")
      record.overall = *value;
    else
      record.aligned[field.feature_key] = *value;
  }
  return record;
}

std::vector<std::string> llm_feature_names(const ResponseSchema& schema) {
  std::vector<std::string> names = {"llm.style", "llm.format", "llm.wording"};
  for (const auto& key : schema.aligned_keys) names.push_back("llm.aligned." + key);
  names.push_back("llm.overall");
  names.push_back("llm.valid");
  return names;
}

FeatureBlock record_to_block(const LlmFeatureRecord& record, const ResponseSchema& schema) {
  FeatureBlock block;
  block.push("llm.style", record.style);
  block.push("llm.format", record.format);
  block.push("llm.wording", record.wording);
  for (const auto& key : schema.aligned_keys) {
    const auto it = record.aligned.find(key);
    block.push("llm.aligned." + key, it != record.aligned.end() ? it->second : 0.0,
               it != record.aligned.end());
  }
  block.push("llm.overall", record.overall.value_or(0.0), record.overall.has_value());
  block.push("llm.valid", 1.0);
  return block;
}

FeatureBlock invalid_block(const ResponseSchema& schema) {
  FeatureBlock block;
  for (const auto& name : llm_feature_names(schema)) block.push(name, 0.0, false);
  block.values.back() = 0.0;
  block.present.back() = 1;
  return block;
}

// ---------------------------------------------------------------------------
// Cache

FeatureCache::FeatureCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) import_from(*path_);
}

std::optional<LlmFeatureRecord> FeatureCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void FeatureCache::put(const std::string& key, const LlmFeatureRecord& record) {
  std::unique_lock lock(mutex_);
  records_[key] = record;
}

std::size_t FeatureCache::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::string FeatureCache::serialize() const {
  std::shared_lock lock(mutex_);
  std::string out;
  for (const auto& [key, record] : records_) {
    json line;
    line["key"] = key;
    line["record"] = json::parse(record_to_json(record));
    out += line.dump();
    out += '\n';
  }
  return out;
}

void FeatureCache::write_atomic(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write cache " + tmp.string());
    out << bytes;
    if (!out.flush()) throw InputError("cannot write cache " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot replace cache " + path.string() + ": " + ec.message());
}

void FeatureCache::flush() const {
  if (path_) write_atomic(*path_);
}

std::size_t FeatureCache::export_to(const std::filesystem::path& path) const {
  write_atomic(path);
  return size();
}

std::size_t FeatureCache::import_from(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read cache " + path.string());
  std::size_t count = 0;
  std::size_t line_no = 0;
  std::unique_lock lock(mutex_);
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      records_[j.at("key").get<std::string>()] = record_from_json_value(j.at("record"));
      ++count;
    } catch (const json::exception& e) {
      throw InputError("cache " + path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return count;
}

std::string cache_key(std::string_view template_id, std::string_view prompt, std::string_view model_id) {
  std::string material;
  material.reserve(template_id.size() + prompt.size() + model_id.size() + 2);
  material.append(template_id).push_back('\0');
  material.append(prompt).push_back('\0');
  material.append(model_id);
  return sha256_hex(material);
}

// ---------------------------------------------------------------------------
// Fetching

FeatureBlock fetch_llm_features(const JudgmentInstance& instance, const ScaleSpec& scale,
                                Provider* provider, const ProviderConfig& config,
                                FeatureCache& cache, const FetchOptions& options) {
  const std::string template_id =
      options.template_id.empty() ? default_template_id(instance.type()) : options.template_id;
  const ResponseSchema schema = expected_schema(template_id, scale);
  const std::string prompt = render_prompt(template_id, instance, scale);
  const std::string key = cache_key(template_id, prompt, config.model_id);
  if (const auto hit = cache.get(key)) return record_to_block(*hit, schema);

  switch (options.mode) {
    case CacheMode::OfflineStrict:
      throw ProviderError("offline cache miss for candidate '" + instance.candidate.id + "' (key " +
                          key.substr(0, 16) + ")");
    case CacheMode::OfflineLenient:
      return invalid_block(schema);
    case CacheMode::Online:
      break;
  }
  if (!provider) throw ProviderError("no provider configured for cache miss on '" + instance.candidate.id + "'");

  bool transport_failed = false;
  std::string last_error;
  const int attempts = 1 + config.max_retries;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && config.backoff_base.count() > 0)
      std::this_thread::sleep_for(config.backoff_base * (1LL << std::min(attempt - 1, 16)));
    try {
      const std::string raw = provider->complete(prompt);
      const LlmFeatureRecord record = parse_judgment_json(raw, schema);
      cache.put(key, record);
      return record_to_block(record, schema);
    } catch (const TransportError& e) {
      transport_failed = true;
      last_error = e.what();
    } catch (const ParseError& e) {
      transport_failed = false;
      last_error = e.what();
    }
  }
  if (transport_failed && options.fail_on_transport)
    throw ProviderError("provider failed for candidate '" + instance.candidate.id + "' after " +
                        std::to_string(attempts) + " attempts: " + last_error);
  return invalid_block(schema);
}

std::vector<FeatureBlock> fetch_llm_features_batch(std::span<const JudgmentInstance* const> instances,
                                                   const ScaleSpec& scale, Provider* provider,
                                                   const ProviderConfig& config, FeatureCache& cache,
                                                   const FetchOptions& options) {
  std::vector<FeatureBlock> out(instances.size());
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.max_concurrent, 1)), instances.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        out[i] = fetch_llm_features(*instances[i], scale, provider, config, cache, options);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace judgekit::llm
