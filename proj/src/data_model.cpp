#include "judgekit/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "judgekit/error.hpp"
#include "judgekit/rng.hpp"

namespace judgekit {

using nlohmann::json;

std::string_view to_string(JudgmentType type) {
  switch (type) {
    case JudgmentType::Pointwise: return "pointwise";
    case JudgmentType::Pairwise: return "pairwise";
    case JudgmentType::Listwise: return "listwise";
  }
  return "pointwise";
}

JudgmentType judgment_type_from_string(std::string_view name) {
  if (name == "pointwise") return JudgmentType::Pointwise;
  if (name == "pairwise") return JudgmentType::Pairwise;
  if (name == "listwise") return JudgmentType::Listwise;
  throw InputError("unknown judgment type '" + std::string(name) + "'");
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Human: return "human";
    case Label::Llm: return "llm";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Scales

bool DimensionScale::on_grid(double value) const {
  if (!std::isfinite(value) || value != std::floor(value)) return false;
  if (value < min || value > max) return false;
  return (static_cast<long long>(value) - min) % step == 0;
}

std::vector<int> DimensionScale::grid() const {
  std::vector<int> out;
  for (int v = min; v <= max; v += step) out.push_back(v);
  return out;
}

void ScaleSpec::validate() const {
  std::set<std::string> seen;
  for (const auto& d : dimensions) {
    if (d.name.empty()) throw InputError("scale dimension with empty name");
    if (!seen.insert(d.name).second) throw InputError("duplicate scale dimension '" + d.name + "'");
    if (d.step < 1) throw InputError("scale dimension '" + d.name + "': step must be >= 1");
    if (d.min >= d.max) throw InputError("scale dimension '" + d.name + "': min must be < max");
    if ((d.max - d.min) % d.step != 0)
      throw InputError("scale dimension '" + d.name + "': (max - min) not divisible by step");
  }
  if (pair_levels_x < 0) throw InputError("pair_levels_x must be positive");
  if (listwise_items < 0) throw InputError("listwise_items must be positive");
}

const DimensionScale* ScaleSpec::find(std::string_view name) const {
  for (const auto& d : dimensions)
    if (d.name == name) return &d;
  return nullptr;
}

std::vector<std::string> ScaleSpec::dimension_names() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions) out.push_back(d.name);
  return out;
}

ScaleSpec parse_scale(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("scale file is not valid JSON: ") + e.what());
  }
  ScaleSpec scale;
  try {
    for (const auto& d : doc.value("dimensions", json::array())) {
      DimensionScale dim;
      dim.name = d.at("name").get<std::string>();
      dim.min = d.at("min").get<int>();
      dim.max = d.at("max").get<int>();
      dim.step = d.value("step", 1);
      scale.dimensions.push_back(dim);
    }
    if (doc.contains("pair_levels_x") && !doc["pair_levels_x"].is_null())
      scale.pair_levels_x = doc["pair_levels_x"].get<int>();
    if (doc.contains("listwise_items") && !doc["listwise_items"].is_null())
      scale.listwise_items = doc["listwise_items"].get<int>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scale file: ") + e.what());
  }
  scale.validate();
  return scale;
}

std::string scale_to_json(const ScaleSpec& scale) {
  json doc;
  doc["dimensions"] = json::array();
  for (const auto& d : scale.dimensions)
    doc["dimensions"].push_back({{"name", d.name}, {"min", d.min}, {"max", d.max}, {"step", d.step}});
  doc["pair_levels_x"] = scale.pair_levels_x;
  doc["listwise_items"] = scale.listwise_items;
  return doc.dump(2) + "\n";
}

ScaleSpec load_scale(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read scale file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scale(buf.str());
}

void save_scale(const ScaleSpec& scale, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << scale_to_json(scale);
}

// ---------------------------------------------------------------------------
// Validation

std::vector<int> ranking_from_scores(const std::vector<double>& items) {
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return items[a] > items[b]; });
  return order;
}

JudgmentType Dataset::type() const {
  return groups.empty() ? JudgmentType::Pointwise : groups.front().type();
}

std::size_t Dataset::instance_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.instances.size();
  return n;
}

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate_instance(const JudgmentInstance& instance, const ScaleSpec& scale,
                       std::string_view group_id) {
  const std::string where = "group '" + std::string(group_id) + "', candidate '" +
                            instance.candidate.id + "'";
  const auto& responses = instance.candidate.responses;
  if (responses.empty()) throw InputError(where + ": candidate has no responses");

  if (const auto* p = std::get_if<PointwiseScore>(&instance.score)) {
    if (responses.size() != 1)
      throw InputError(where + ": pointwise candidate must have exactly 1 response, got " +
                       std::to_string(responses.size()));
    if (p->dims.size() != scale.dimensions.size())
      throw InputError(where + ": expected " + std::to_string(scale.dimensions.size()) +
                       " score dimensions, got " + std::to_string(p->dims.size()));
    for (const auto& [name, value] : p->dims) {
      const auto* dim = scale.find(name);
      if (!dim) throw InputError(where + ": unknown dimension '" + name + "'");
      if (!dim->on_grid(value))
        throw InputError(where + ": scale violation on dimension '" + name + "': value " +
                         format_value(value) + " not on grid " + std::to_string(dim->min) +
                         ".." + std::to_string(dim->max) + " step " + std::to_string(dim->step));
    }
  } else if (const auto* p = std::get_if<PairwiseScore>(&instance.score)) {
    if (responses.size() != 2)
      throw InputError(where + ": pairwise candidate must have exactly 2 responses, got " +
                       std::to_string(responses.size()));
    if (scale.pair_levels_x < 1) throw InputError(where + ": scale lacks pair_levels_x");
    if (p->pair < -scale.pair_levels_x || p->pair > scale.pair_levels_x)
      throw InputError(where + ": scale violation on dimension 'pair': value " +
                       std::to_string(p->pair) + " outside [-" +
                       std::to_string(scale.pair_levels_x) + ", " +
                       std::to_string(scale.pair_levels_x) + "]");
  } else {
    const auto& l = std::get<ListwiseScore>(instance.score);
    if (scale.listwise_items < 2) throw InputError(where + ": scale lacks listwise_items");
    const std::size_t n = l.items.size();
    if (n < 2 || n > static_cast<std::size_t>(scale.listwise_items))
      throw InputError(where + ": listwise item count " + std::to_string(n) +
                       " outside [2, " + std::to_string(scale.listwise_items) + "]");
    if (responses.size() != n)
      throw InputError(where + ": listwise candidate has " + std::to_string(responses.size()) +
                       " responses but " + std::to_string(n) + " item scores");
    if (!scale.dimensions.empty()) {
      const auto& dim = scale.dimensions.front();
      for (double v : l.items)
        if (!dim.on_grid(v))
          throw InputError(where + ": scale violation on dimension '" + dim.name + "': value " +
                           format_value(v));
    }
    std::vector<int> sorted = l.ranking;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != static_cast<int>(i) || sorted.size() != n)
        throw InputError(where + ": ranking is not a permutation of item indices");
    if (l.ranking != ranking_from_scores(l.items))
      throw InputError(where + ": ranking inconsistent with item scores");
  }
}

void validate_group(const JudgmentGroup& group, const ScaleSpec& scale) {
  if (group.instances.empty()) throw InputError("group '" + group.group_id + "' has no instances");
  const JudgmentType type = group.type();
  for (const auto& inst : group.instances) {
    if (inst.type() != type)
      throw InputError("group '" + group.group_id + "' mixes judgment types");
    validate_instance(inst, scale, group.group_id);
  }
}

// ---------------------------------------------------------------------------
// JSONL I/O

namespace {

JudgmentInstance instance_from_json(const json& j, JudgmentType type) {
  JudgmentInstance inst;
  const json& c = j.at("candidate");
  inst.candidate.id = c.at("id").get<std::string>();
  if (c.contains("prompt") && !c["prompt"].is_null())
    inst.candidate.prompt = c["prompt"].get<std::string>();
  inst.candidate.responses = c.at("responses").get<std::vector<std::string>>();
  if (c.contains("meta") && !c["meta"].is_null()) {
    for (const auto& [key, value] : c["meta"].items())
      inst.candidate.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  const json& s = j.at("score");
  switch (type) {
    case JudgmentType::Pointwise: {
      PointwiseScore p;
      for (const auto& [key, value] : s.at("dims").items()) {
        if (!value.is_number()) throw InputError("score for '" + key + "' is not a number");
        p.dims[key] = value.get<double>();
      }
      inst.score = std::move(p);
      break;
    }
    case JudgmentType::Pairwise: {
      const json& v = s.at("pair");
      if (!v.is_number_integer()) throw InputError("pairwise score must be an integer");
      inst.score = PairwiseScore{v.get<int>()};
      break;
    }
    case JudgmentType::Listwise: {
      ListwiseScore l;
      l.items = s.at("items").get<std::vector<double>>();
      l.ranking = s.at("ranking").get<std::vector<int>>();
      inst.score = std::move(l);
      break;
    }
  }
  return inst;
}

json instance_to_json(const JudgmentInstance& inst) {
  json c;
  c["id"] = inst.candidate.id;
  c["prompt"] = inst.candidate.prompt ? json(*inst.candidate.prompt) : json(nullptr);
  c["responses"] = inst.candidate.responses;
  c["meta"] = json::object();
  for (const auto& [k, v] : inst.candidate.meta) c["meta"][k] = v;
  json s;
  if (const auto* p = std::get_if<PointwiseScore>(&inst.score)) {
    s["dims"] = json::object();
    for (const auto& [k, v] : p->dims) s["dims"][k] = v;
  } else if (const auto* p = std::get_if<PairwiseScore>(&inst.score)) {
    s["pair"] = p->pair;
  } else {
    const auto& l = std::get<ListwiseScore>(inst.score);
    s["items"] = l.items;
    s["ranking"] = l.ranking;
  }
  return json{{"candidate", std::move(c)}, {"score", std::move(s)}};
}

JudgmentGroup group_from_json(const json& j) {
  JudgmentGroup g;
  g.group_id = j.at("group_id").get<std::string>();
  const json& label = j.at("label");
  if (label.is_null()) {
    g.label = Label::Unknown;
  } else {
    const auto text = label.get<std::string>();
    if (text == "human")
      g.label = Label::Human;
    else if (text == "llm")
      g.label = Label::Llm;
    else
      throw InputError("label must be \"human\", \"llm\" or null, got '" + text + "'");
  }
  if (j.contains("judge") && !j["judge"].is_null()) g.judge_id = j["judge"].get<std::string>();
  const JudgmentType type = judgment_type_from_string(j.at("type").get<std::string>());
  for (const auto& inst : j.at("instances")) g.instances.push_back(instance_from_json(inst, type));
  return g;
}

}  // namespace

std::string group_to_json_line(const JudgmentGroup& group) {
  json j;
  j["group_id"] = group.group_id;
  j["label"] = group.label == Label::Unknown ? json(nullptr) : json(std::string(to_string(group.label)));
  j["judge"] = group.judge_id ? json(*group.judge_id) : json(nullptr);
  j["type"] = std::string(to_string(group.type()));
  j["instances"] = json::array();
  for (const auto& inst : group.instances) j["instances"].push_back(instance_to_json(inst));
  return j.dump();
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& g : dataset.groups) {
    out += group_to_json_line(g);
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << dataset_to_jsonl(dataset);
}

Dataset parse_dataset(std::string_view jsonl, const ScaleSpec& scale) {
  scale.validate();
  Dataset ds;
  ds.scale = scale;
  ds.dimension_names = scale.dimension_names();
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::string prefix = "line " + std::to_string(line_no) + ": ";
    JudgmentGroup group;
    try {
      group = group_from_json(json::parse(line));
      validate_group(group, scale);
    } catch (const json::exception& e) {
      throw InputError(prefix + "malformed group record: " + e.what());
    } catch (const InputError& e) {
      throw InputError(prefix + e.what());
    }
    if (!ds.groups.empty() && group.type() != ds.groups.front().type())
      throw InputError(prefix + "group '" + group.group_id + "' has type " +
                       std::string(to_string(group.type())) + " but the dataset is " +
                       std::string(to_string(ds.groups.front().type())));
    if (!ids.insert(group.group_id).second)
      throw InputError(prefix + "duplicate group_id '" + group.group_id + "'");
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const ScaleSpec& scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), scale);
}

// ---------------------------------------------------------------------------
// Group manipulation

RegroupResult regroup(const std::vector<LabeledInstance>& instances, int k, std::uint64_t seed) {
  if (k <= 0) throw InputError("group size k must be positive, got " + std::to_string(k));
  RegroupResult result;
  for (const Label label : {Label::Human, Label::Llm, Label::Unknown}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < instances.size(); ++i)
      if (instances[i].label == label) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(k))
      throw InputError("only " + std::to_string(idx.size()) + " " + std::string(to_string(label)) +
                       " instances, fewer than k=" + std::to_string(k));
    CounterRng rng(seed, static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n_groups = idx.size() / static_cast<std::size_t>(k);
    result.dropped += idx.size() % static_cast<std::size_t>(k);
    for (std::size_t g = 0; g < n_groups; ++g) {
      JudgmentGroup group;
      group.group_id = std::string(to_string(label)) + "-" + std::to_string(g);
      group.label = label;
      for (int j = 0; j < k; ++j) {
        const auto& src = instances[idx[g * k + j]];
        group.instances.push_back(src.instance);
        if (j == 0)
          group.judge_id = src.judge_id;
        else if (group.judge_id != src.judge_id)
          group.judge_id.reset();
      }
      result.groups.push_back(std::move(group));
    }
  }
  return result;
}

std::vector<LabeledInstance> flatten(const std::vector<JudgmentGroup>& groups) {
  std::vector<LabeledInstance> out;
  for (const auto& g : groups)
    for (const auto& inst : g.instances) out.push_back({inst, g.label, g.judge_id});
  return out;
}

namespace {

// Builds the coarse grid from the image of `mapping` on `source`.
DimensionScale coarse_dimension(const DimensionScale& source, const std::map<int, int>& mapping) {
  std::set<int> image;
  for (int level : source.grid()) {
    const auto it = mapping.find(level);
    if (it == mapping.end())
      throw InputError("coarsening mapping is missing source level " + std::to_string(level) +
                       " of dimension '" + source.name + "'");
    image.insert(it->second);
  }
  if (image.size() < 2) throw InputError("coarsened grid for '" + source.name + "' has < 2 levels");
  const std::vector<int> levels(image.begin(), image.end());
  const int step = levels[1] - levels[0];
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] - levels[i - 1] != step)
      throw InputError("coarsening image for '" + source.name + "' is not an evenly spaced grid");
  return DimensionScale{source.name, levels.front(), levels.back(), step};
}

double map_level(double value, const std::map<int, int>& mapping) {
  return static_cast<double>(mapping.at(static_cast<int>(value)));
}

}  // namespace

Dataset coarsen_scale(const Dataset& dataset, const std::map<int, int>& mapping) {
  Dataset out = dataset;
  const JudgmentType type = dataset.type();
  if (type == JudgmentType::Pairwise) {
    const int x = dataset.scale.pair_levels_x;
    const DimensionScale pair{"pair", -x, x, 1};
    const DimensionScale coarse = coarse_dimension(pair, mapping);
    if (coarse.step != 1 || coarse.min != -coarse.max)
      throw InputError("pairwise coarsening image must be a symmetric integer range -x..x");
    out.scale.pair_levels_x = coarse.max;
  } else {
    for (auto& dim : out.scale.dimensions) dim = coarse_dimension(dim, mapping);
  }
  for (auto& group : out.groups) {
    for (auto& inst : group.instances) {
      if (auto* p = std::get_if<PointwiseScore>(&inst.score)) {
        for (auto& [name, value] : p->dims) value = map_level(value, mapping);
      } else if (auto* p = std::get_if<PairwiseScore>(&inst.score)) {
        p->pair = mapping.at(p->pair);
      } else {
        auto& l = std::get<ListwiseScore>(inst.score);
        for (auto& v : l.items) v = map_level(v, mapping);
        l.ranking = ranking_from_scores(l.items);
      }
    }
  }
  return out;
}

Dataset project_dimensions(const Dataset& dataset, const std::vector<std::string>& dims) {
  if (dims.empty()) throw InputError("dimension projection needs at least one dimension");
  if (dataset.type() != JudgmentType::Pointwise)
    throw InputError("dimension projection applies to pointwise datasets only");
  const std::set<std::string> keep(dims.begin(), dims.end());
  for (const auto& name : keep)
    if (!dataset.scale.find(name)) throw InputError("unknown dimension '" + name + "'");
  Dataset out = dataset;
  out.scale.dimensions.clear();
  for (const auto& dim : dataset.scale.dimensions)
    if (keep.count(dim.name)) out.scale.dimensions.push_back(dim);
  out.dimension_names = out.scale.dimension_names();
  for (auto& group : out.groups)
    for (auto& inst : group.instances) {
      auto& p = std::get<PointwiseScore>(inst.score);
      std::erase_if(p.dims, [&](const auto& kv) { return !keep.count(kv.first); });
    }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InputError("test fraction must lie in (0, 1)");
  std::vector<bool> in_test(dataset.groups.size(), false);
  for (const Label label : {Label::Human, Label::Llm, Label::Unknown}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dataset.groups.size(); ++i)
      if (dataset.groups[i].label == label) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() < 2)
      throw InputError("too few " + std::string(to_string(label)) +
                       " groups to stratify (need at least 2, have " + std::to_string(idx.size()) +
                       ")");
    CounterRng rng(seed, 16 + static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    for (std::size_t i = 0; i < n_test; ++i) in_test[idx[i]] = true;
  }
  if (dataset.groups.empty()) throw InputError("too few groups to stratify (dataset is empty)");
  Dataset train, test;
  train.scale = test.scale = dataset.scale;
  train.dimension_names = test.dimension_names = dataset.dimension_names;
  for (std::size_t i = 0; i < dataset.groups.size(); ++i)
    (in_test[i] ? test : train).groups.push_back(dataset.groups[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace judgekit
