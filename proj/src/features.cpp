#include "judgekit/features.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "judgekit/error.hpp"
#include "judgekit/hash.hpp"
#include "judgekit/kernels.hpp"
#include "judgekit/parallel.hpp"

namespace judgekit {

using nlohmann::json;

std::string_view to_string(Block block) {
  switch (block) {
    case Block::Base: return "base";
    case Block::Llm: return "llm";
    case Block::Linguistic: return "ling";
  }
  return "base";
}

Block block_from_string(std::string_view name) {
  if (name == "base") return Block::Base;
  if (name == "llm") return Block::Llm;
  if (name == "ling") return Block::Linguistic;
  throw InputError("unknown feature block '" + std::string(name) + "'");
}

Block block_of(std::string_view feature_name) {
  const auto dot = feature_name.find('.');
  if (dot == std::string_view::npos) throw InputError("feature name without block prefix: " + std::string(feature_name));
  return block_from_string(feature_name.substr(0, dot));
}

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::Full: return "full";
    case Ablation::BaseOnly: return "base_only";
    case Ablation::BaseLlm: return "base_llm";
    case Ablation::BaseLing: return "base_ling";
  }
  return "full";
}

Ablation ablation_from_string(std::string_view name) {
  if (name == "full") return Ablation::Full;
  if (name == "base_only") return Ablation::BaseOnly;
  if (name == "base_llm") return Ablation::BaseLlm;
  if (name == "base_ling") return Ablation::BaseLing;
  throw InputError("unknown ablation '" + std::string(name) + "'");
}

bool uses_block(Ablation ablation, Block block) {
  switch (block) {
    case Block::Base: return true;
    case Block::Llm: return ablation == Ablation::Full || ablation == Ablation::BaseLlm;
    case Block::Linguistic: return ablation == Ablation::Full || ablation == Ablation::BaseLing;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Schema

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f.name);
  return out;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == name) return i;
  return std::nullopt;
}

void FeatureSchema::validate() const {
  std::set<std::string_view> seen;
  int last_block = 0;
  for (const auto& f : fields) {
    if (!seen.insert(f.name).second) throw InputError("duplicate feature name '" + f.name + "'");
    const int b = static_cast<int>(f.block);
    if (b < last_block) throw InputError("feature '" + f.name + "' breaks the base, llm, ling block order");
    last_block = b;
  }
}

namespace {

json schema_json(const FeatureSchema& s) {
  json j;
  j["version"] = s.version;
  j["lexicon_hashes"] = s.lexicon_hashes;
  j["fields"] = json::array();
  for (const auto& f : s.fields) j["fields"].push_back({{"name", f.name}, {"block", std::string(to_string(f.block))}});
  return j;
}

}  // namespace

std::string FeatureSchema::hash() const { return sha256_hex(schema_json(*this).dump()); }

std::string FeatureSchema::to_json() const {
  json j = schema_json(*this);
  j["hash"] = hash();
  return j.dump(1);
}

FeatureSchema FeatureSchema::from_json(std::string_view text) {
  FeatureSchema s;
  try {
    const json j = json::parse(text);
    s.version = j.at("version").get<int>();
    s.lexicon_hashes = j.value("lexicon_hashes", std::vector<std::string>{});
    for (const auto& f : j.at("fields"))
      s.fields.push_back({f.at("name").get<std::string>(), block_from_string(f.at("block").get<std::string>())});
    if (s.version != kSchemaVersion)
      throw InputError("feature schema version " + std::to_string(s.version) + " is not supported (expected " +
                       std::to_string(kSchemaVersion) + ")");
    if (j.contains("hash") && j["hash"].get<std::string>() != s.hash())
      throw InputError("feature schema hash does not match its fields");
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed feature schema: ") + e.what());
  }
  s.validate();
  return s;
}

FeatureSchema make_schema(const std::vector<std::string>& base, const std::vector<std::string>& llm,
                          const std::vector<std::string>& ling, Ablation ablation,
                          std::vector<std::string> lexicon_hashes) {
  FeatureSchema s;
  for (const auto& n : base) s.fields.push_back({n, Block::Base});
  if (uses_block(ablation, Block::Llm))
    for (const auto& n : llm) s.fields.push_back({n, Block::Llm});
  if (uses_block(ablation, Block::Linguistic)) {
    for (const auto& n : ling) s.fields.push_back({n, Block::Linguistic});
    s.lexicon_hashes = std::move(lexicon_hashes);
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Base block and assembly

std::vector<std::string> base_feature_names(JudgmentType type, const std::vector<std::string>& dims,
                                            int listwise_items) {
  std::vector<std::string> names;
  switch (type) {
    case JudgmentType::Pointwise:
      for (const auto& d : dims) names.push_back("base." + d);
      break;
    case JudgmentType::Pairwise:
      names.push_back("base.pair");
      break;
    case JudgmentType::Listwise:
      for (int i = 0; i < listwise_items; ++i) names.push_back("base.item" + std::to_string(i));
      for (int i = 0; i < listwise_items; ++i) names.push_back("base.rank" + std::to_string(i));
      break;
  }
  return names;
}

FeatureBlock base_features(const JudgmentInstance& instance, const std::vector<std::string>& dims,
                           int listwise_items) {
  FeatureBlock block;
  std::visit(
      [&](const auto& score) {
        using T = std::decay_t<decltype(score)>;
        if constexpr (std::is_same_v<T, PointwiseScore>) {
          for (const auto& d : dims) {
            const auto it = score.dims.find(d);
            if (it == score.dims.end())
              throw InputError("instance '" + instance.candidate.id + "' lacks dimension '" + d + "'");
            block.push("base." + d, it->second);
          }
        } else if constexpr (std::is_same_v<T, PairwiseScore>) {
          block.push("base.pair", score.pair);
        } else {
          const int n = static_cast<int>(score.items.size());
          if (n > listwise_items)
            throw InputError("instance '" + instance.candidate.id + "' has " + std::to_string(n) +
                             " items; schema holds " + std::to_string(listwise_items));
          std::vector<double> position(static_cast<std::size_t>(n), 0.0);
          for (std::size_t p = 0; p < score.ranking.size(); ++p)
            position[static_cast<std::size_t>(score.ranking[p])] = static_cast<double>(p);
          for (int i = 0; i < listwise_items; ++i)
            block.push("base.item" + std::to_string(i), i < n ? score.items[i] : 0.0, i < n);
          for (int i = 0; i < listwise_items; ++i)
            block.push("base.rank" + std::to_string(i), i < n ? position[i] : 0.0, i < n);
        }
      },
      instance.score);
  return block;
}

FeatureVector assemble(const FeatureSchema& schema, const FeatureBlock& base, const FeatureBlock& llm,
                       const FeatureBlock& ling) {
  FeatureVector v;
  v.values.reserve(schema.size());
  v.present.reserve(schema.size());
  std::size_t pos = 0;
  const auto take = [&](const FeatureBlock& block, Block kind) {
    for (std::size_t i = 0; i < block.size(); ++i, ++pos) {
      if (pos >= schema.size())
        throw InputError("feature block '" + std::string(to_string(kind)) + "' overruns the schema (" +
                         std::to_string(schema.size()) + " fields)");
      const auto& field = schema.fields[pos];
      if (field.name != block.names[i] || field.block != kind)
        throw InputError("schema mismatch at position " + std::to_string(pos) + ": expected '" + field.name +
                         "', got '" + block.names[i] + "'");
      v.values.push_back(block.values[i]);
      v.present.push_back(block.present[i]);
    }
  };
  take(base, Block::Base);
  take(llm, Block::Llm);
  take(ling, Block::Linguistic);
  if (pos != schema.size())
    throw InputError("feature blocks fill " + std::to_string(pos) + " of " + std::to_string(schema.size()) +
                     " schema fields");
  return v;
}

// ---------------------------------------------------------------------------
// Standardizer

Standardizer fit_standardizer(const FeatureMatrix& matrix) {
  if (matrix.rows.size() < 2) throw InputError("standardizer needs at least 2 rows");
  const std::size_t d = matrix.schema.size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std_dev.assign(d, 0.0);
  std::vector<std::size_t> count(d, 0);
  for (const auto& row : matrix.rows) {
    if (row.size() != d) throw InputError("row width does not match schema");
    for (std::size_t j = 0; j < d; ++j)
      if (row.present[j]) {
        s.mean[j] += row.values[j];
        ++count[j];
      }
  }
  for (std::size_t j = 0; j < d; ++j)
    if (count[j]) s.mean[j] /= static_cast<double>(count[j]);
  for (const auto& row : matrix.rows)
    for (std::size_t j = 0; j < d; ++j)
      if (row.present[j]) {
        const double dev = row.values[j] - s.mean[j];
        s.std_dev[j] += dev * dev;
      }
  for (std::size_t j = 0; j < d; ++j) {
    s.std_dev[j] = count[j] ? std::sqrt(s.std_dev[j] / static_cast<double>(count[j])) : 0.0;
    // Round-off on a constant column leaves a tiny positive spread.
    if (s.std_dev[j] <= 1e-12 * std::max(1.0, std::fabs(s.mean[j]))) s.std_dev[j] = 0.0;
  }
  return s;
}

std::vector<double> standardized_values(const Standardizer& s, const FeatureVector& v) {
  if (v.size() != s.size()) throw InputError("vector width does not match the standardizer");
  std::vector<double> out(v.size());
  kernels::standardize(v.values, s.mean, s.std_dev, out);
  for (std::size_t j = 0; j < v.size(); ++j)
    if (!v.present[j]) out[j] = 0.0;
  return out;
}

FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v) {
  FeatureVector out;
  out.values = standardized_values(s, v);
  out.present = v.present;
  return out;
}

double quantize(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::strtod(buf, nullptr);
}

// ---------------------------------------------------------------------------
// Extraction

int resolve_listwise_items(const Dataset& dataset, int requested) {
  if (dataset.type() != JudgmentType::Listwise) return 0;
  if (requested > 0) return requested;
  if (dataset.scale.listwise_items > 0) return dataset.scale.listwise_items;
  int n = 0;
  for (const auto& g : dataset.groups)
    for (const auto& inst : g.instances) n = std::max(n, static_cast<int>(inst.candidate.responses.size()));
  return n;
}

namespace {

std::vector<std::string> dataset_dims(const Dataset& dataset) {
  return dataset.dimension_names.empty() ? dataset.scale.dimension_names() : dataset.dimension_names;
}

ScaleSpec llm_scale(const Dataset& dataset, int listwise_items) {
  ScaleSpec s = dataset.scale;
  if (dataset.type() == JudgmentType::Pointwise && !dataset.dimension_names.empty()) {
    std::vector<DimensionScale> dims;
    for (const auto& name : dataset.dimension_names)
      if (const auto* d = s.find(name)) dims.push_back(*d);
    s.dimensions = dims;
  }
  if (dataset.type() == JudgmentType::Listwise) s.listwise_items = listwise_items;
  return s;
}

std::string llm_template(const Dataset& dataset, const ExtractOptions& options) {
  return options.fetch.template_id.empty() ? llm::default_template_id(dataset.type()) : options.fetch.template_id;
}

}  // namespace

FeatureSchema schema_for(const Dataset& dataset, const ExtractOptions& options) {
  const JudgmentType type = dataset.type();
  const int items = resolve_listwise_items(dataset, options.listwise_items);
  const auto base = base_feature_names(type, dataset_dims(dataset), items);
  std::vector<std::string> llm_names;
  if (uses_block(options.ablation, Block::Llm))
    llm_names = llm::llm_feature_names(llm::expected_schema(llm_template(dataset, options), llm_scale(dataset, items)));
  const auto ling = ling::linguistic_feature_names(type, items);
  return make_schema(base, llm_names, ling, options.ablation, options.analyzers.lexicon_hashes());
}

FeatureMatrix extract_matrix(const Dataset& dataset, const ExtractOptions& options) {
  FeatureMatrix m;
  m.schema = schema_for(dataset, options);
  const int items = resolve_listwise_items(dataset, options.listwise_items);
  const auto dims = dataset_dims(dataset);

  std::vector<const JudgmentInstance*> instances;
  for (const auto& g : dataset.groups)
    for (const auto& inst : g.instances) {
      instances.push_back(&inst);
      m.group_ids.push_back(g.group_id);
      m.labels.push_back(g.label);
    }

  std::vector<FeatureBlock> llm_blocks(instances.size());
  if (uses_block(options.ablation, Block::Llm)) {
    if (!options.cache) throw InternalError("LLM block requested without a feature cache");
    llm::FetchOptions fetch = options.fetch;
    fetch.template_id = llm_template(dataset, options);
    llm_blocks = llm::fetch_llm_features_batch(instances, llm_scale(dataset, items), options.provider,
                                               options.provider_config, *options.cache, fetch);
    options.cache->flush();
  }

  m.rows.resize(instances.size());
  const bool with_ling = uses_block(options.ablation, Block::Linguistic);
  parallel_for(instances.size(), options.jobs, [&](std::size_t i) {
    const FeatureBlock base = base_features(*instances[i], dims, items);
    const FeatureBlock ling =
        with_ling ? ling::extract_linguistic(*instances[i], items, options.analyzers) : FeatureBlock{};
    FeatureVector v = assemble(m.schema, base, llm_blocks[i], ling);
    for (double& x : v.values) x = quantize(x);
    m.rows[i] = std::move(v);
  });
  return m;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw InputError("matrix line " + std::to_string(line_no) + ": unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

std::string label_cell(Label l) {
  switch (l) {
    case Label::Human: return "0";
    case Label::Llm: return "1";
    case Label::Unknown: return "";
  }
  return "";
}

}  // namespace

std::string matrix_to_csv(const FeatureMatrix& matrix) {
  std::string out;
  for (const auto& f : matrix.schema.fields) {
    out += csv_escape(f.name);
    out += ',';
  }
  out += "__group_id,__label\n";
  char buf[64];
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    const auto& row = matrix.rows[r];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row.present[j]) {
        std::snprintf(buf, sizeof buf, "%.9g", row.values[j]);
        out += buf;
      }
      out += ',';
    }
    out += csv_escape(matrix.group_ids[r]);
    out += ',';
    out += label_cell(matrix.labels[r]);
    out += '\n';
  }
  return out;
}

std::filesystem::path schema_sidecar(const std::filesystem::path& matrix_path) {
  std::filesystem::path p = matrix_path;
  p += ".schema.json";
  return p;
}

void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write matrix " + path.string());
    out << matrix_to_csv(matrix);
  }
  std::ofstream side(schema_sidecar(path), std::ios::binary | std::ios::trunc);
  if (!side) throw InputError("cannot write schema " + schema_sidecar(path).string());
  side << matrix.schema.to_json() << '\n';
}

FeatureMatrix parse_matrix_csv(std::string_view csv, const std::optional<FeatureSchema>& schema) {
  FeatureMatrix m;
  std::size_t line_no = 0, pos = 0;
  bool header_done = false;
  std::size_t width = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = csv_split(line, line_no);
    if (!header_done) {
      if (cells.size() < 2 || cells[cells.size() - 2] != "__group_id" || cells.back() != "__label")
        throw InputError("matrix header must end with __group_id,__label");
      cells.resize(cells.size() - 2);
      if (schema) {
        if (cells != schema->names()) throw InputError("matrix header does not match its schema sidecar");
        m.schema = *schema;
      } else {
        for (auto& n : cells) m.schema.fields.push_back({n, block_of(n)});
        m.schema.validate();
      }
      width = m.schema.size();
      header_done = true;
      continue;
    }
    if (cells.size() != width + 2)
      throw InputError("matrix line " + std::to_string(line_no) + ": expected " + std::to_string(width + 2) +
                       " cells, got " + std::to_string(cells.size()));
    FeatureVector v;
    v.values.resize(width, 0.0);
    v.present.resize(width, 0);
    for (std::size_t j = 0; j < width; ++j) {
      if (cells[j].empty()) continue;
      char* endp = nullptr;
      const double x = std::strtod(cells[j].c_str(), &endp);
      if (endp != cells[j].c_str() + cells[j].size() || !std::isfinite(x))
        throw InputError("matrix line " + std::to_string(line_no) + ": bad value '" + cells[j] + "' for " +
                         m.schema.fields[j].name);
      v.values[j] = x;
      v.present[j] = 1;
    }
    m.rows.push_back(std::move(v));
    m.group_ids.push_back(cells[width]);
    const std::string& lab = cells[width + 1];
    if (lab == "0")
      m.labels.push_back(Label::Human);
    else if (lab == "1")
      m.labels.push_back(Label::Llm);
    else if (lab.empty())
      m.labels.push_back(Label::Unknown);
    else
      throw InputError("matrix line " + std::to_string(line_no) + ": bad label '" + lab + "'");
  }
  if (!header_done) throw InputError("matrix file is empty");
  return m;
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read matrix " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::optional<FeatureSchema> schema;
  const auto side = schema_sidecar(path);
  if (std::filesystem::exists(side)) {
    std::ifstream s(side, std::ios::binary);
    std::ostringstream sb;
    sb << s.rdbuf();
    schema = FeatureSchema::from_json(sb.str());
  }
  return parse_matrix_csv(buf.str(), schema);
}

}  // namespace judgekit
