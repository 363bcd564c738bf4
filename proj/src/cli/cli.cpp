#include "judgekit/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "judgekit/classifiers.hpp"
#include "judgekit/error.hpp"
#include "judgekit/experiment.hpp"
#include "judgekit/features.hpp"
#include "judgekit/hash.hpp"
#include "judgekit/manifest.hpp"
#include "judgekit/pipeline.hpp"
#include "judgekit/rng.hpp"
#include "judgekit/theory.hpp"

namespace judgekit::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << bytes;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// Rejects keys outside `allowed` so typos in config files surface.
void check_keys(const json& j, const std::set<std::string>& allowed, std::string_view what) {
  if (!j.is_object()) throw InputError(std::string(what) + " config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + std::string(what) + " config");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  std::string config;
  int jobs = 1;
};

struct ExtractFlags {
  std::string dataset;
  std::string scale;
  std::string provider_config;
  std::string cache;
  std::string offline;
  std::string ablation = "full";
  std::string template_id;
  int listwise_items = 0;
};

class Session {
 public:
  Session(int argc, const char* const* argv, std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    for (int i = 0; i < argc; ++i) {
      if (i) manifest_.command += ' ';
      manifest_.command += i == 0 ? std::string("judgekit") : std::string(argv[i]);
    }
    manifest_.started_at = timestamp_now();
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  RunManifest& manifest() { return manifest_; }

  fs::path out_dir(const Common& c) {
    if (c.out.empty()) throw InputError("--out is required");
    fs::create_directories(c.out);
    return c.out;
  }

  void input(const fs::path& path) { manifest_.input_hashes[path.string()] = sha256_file(path); }

  json config(const Common& c) {
    if (c.config.empty()) {
      manifest_.config_hash = "";
      return json::object();
    }
    manifest_.config_hash = sha256_file(c.config);
    return read_json(c.config);
  }

  void schema(const FeatureSchema& s) {
    manifest_.schema_version = s.version;
    manifest_.lexicon_hashes = s.lexicon_hashes;
  }

  void finish(const fs::path& dir) { write_manifest(manifest_, dir); }

 private:
  std::ostream& out_;
  std::ostream& err_;
  RunManifest manifest_;
};

TrainConfig train_config(const json& j, const std::string& kind_flag) {
  check_keys(j,
             {"kind", "learning_rate", "epochs", "l2_lambda", "n_trees", "max_depth", "min_leaf", "feature_subsample",
              "row_subsample", "standardize_forest"},
             "train");
  TrainConfig c;
  c.kind = model_kind_from_string(!kind_flag.empty() ? kind_flag : get_or<std::string>(j, "kind", "forest"));
  c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
  c.epochs = get_or(j, "epochs", c.epochs);
  c.l2_lambda = get_or(j, "l2_lambda", c.l2_lambda);
  c.n_trees = get_or(j, "n_trees", c.n_trees);
  c.max_depth = get_or(j, "max_depth", c.max_depth);
  c.min_leaf = get_or(j, "min_leaf", c.min_leaf);
  c.feature_subsample = get_or(j, "feature_subsample", c.feature_subsample);
  c.row_subsample = get_or(j, "row_subsample", c.row_subsample);
  c.standardize_forest = get_or(j, "standardize_forest", c.standardize_forest);
  c.validate();
  return c;
}

std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& seeds, int repeats, std::uint64_t base) {
  if (repeats < 1) throw InputError("--repeats must be >= 1");
  if (!seeds.empty()) {
    if (static_cast<int>(seeds.size()) != repeats)
      throw InputError("--repeats " + std::to_string(repeats) + " does not match " + std::to_string(seeds.size()) +
                       " --seeds");
    return seeds;
  }
  std::vector<std::uint64_t> out;
  for (int i = 0; i < repeats; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

// Owns the provider and cache an ExtractOptions points into.
struct Extraction {
  ExtractOptions options;
  std::unique_ptr<llm::HttpProvider> provider;
  std::unique_ptr<llm::FeatureCache> cache;
};

std::unique_ptr<Extraction> make_extraction(const ExtractFlags& f, Ablation ablation, int listwise_items,
                                            const fs::path& default_cache, int jobs, Session& s) {
  auto ex = std::make_unique<Extraction>();
  ex->options.ablation = ablation;
  ex->options.jobs = jobs;
  ex->options.listwise_items = listwise_items;
  ex->options.fetch.template_id = f.template_id;
  if (!uses_block(ablation, Block::Llm)) return ex;

  if (f.offline.empty())
    ex->options.fetch.mode = llm::CacheMode::Online;
  else if (f.offline == "strict")
    ex->options.fetch.mode = llm::CacheMode::OfflineStrict;
  else if (f.offline == "lenient")
    ex->options.fetch.mode = llm::CacheMode::OfflineLenient;
  else
    throw InputError("--offline must be strict or lenient");

  if (!f.provider_config.empty()) {
    s.input(f.provider_config);
    ex->options.provider_config = llm::load_provider_config(f.provider_config);
    if (ex->options.fetch.mode == llm::CacheMode::Online)
      ex->provider = std::make_unique<llm::HttpProvider>(ex->options.provider_config);
  }
  ex->options.provider = ex->provider.get();
  const fs::path cache_path = f.cache.empty() ? default_cache : fs::path(f.cache);
  ex->cache = std::make_unique<llm::FeatureCache>(cache_path);
  ex->options.cache = ex->cache.get();
  return ex;
}

Dataset load_input_dataset(const ExtractFlags& f, Session& s) {
  if (f.dataset.empty() || f.scale.empty()) throw InputError("--dataset and --scale are required");
  s.input(f.dataset);
  s.input(f.scale);
  return load_dataset(f.dataset, load_scale(f.scale));
}

FeatureMatrix load_input_matrix(const std::string& path, Session& s) {
  if (path.empty()) throw InputError("--matrix is required");
  s.input(path);
  if (fs::exists(schema_sidecar(path))) s.input(schema_sidecar(path));
  return load_matrix(path);
}

Model load_input_model(const std::string& path, Session& s) {
  if (path.empty()) throw InputError("--model is required");
  s.input(path);
  return load_model(path);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_extract(Session& s, const Common& c, const ExtractFlags& f) {
  const fs::path dir = s.out_dir(c);
  s.config(c);
  const Dataset ds = load_input_dataset(f, s);
  const auto ex = make_extraction(f, ablation_from_string(f.ablation), f.listwise_items, dir / "llm_cache.jsonl",
                                  c.jobs, s);
  const FeatureMatrix m = extract_matrix(ds, ex->options);
  save_matrix(m, dir / "features.csv");
  s.schema(m.schema);
  s.finish(dir);
  s.out() << "extracted " << m.size() << " rows x " << m.schema.size() << " features -> "
          << (dir / "features.csv").string() << "\n";
  return 0;
}

FeatureMatrix holdout(const FeatureMatrix& m, double fraction, std::uint64_t seed, bool take_holdout) {
  FeatureMatrix out;
  out.schema = m.schema;
  std::vector<bool> held(m.size(), false);
  for (const Label label : {Label::Human, Label::Llm}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m.labels[i] == label) idx.push_back(i);
    CounterRng rng(seed, 48 + static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < n && i < idx.size(); ++i) held[idx[i]] = true;
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (held[i] == take_holdout) {
      out.rows.push_back(m.rows[i]);
      out.group_ids.push_back(m.group_ids[i]);
      out.labels.push_back(m.labels[i]);
    }
  return out;
}

int cmd_train(Session& s, const Common& c, const std::string& matrix_path, const std::string& kind,
              double calibrate, int k) {
  const fs::path dir = s.out_dir(c);
  TrainConfig cfg = train_config(s.config(c), kind);
  cfg.seed = c.seed;
  cfg.jobs = c.jobs;
  s.manifest().seeds = {c.seed};
  const FeatureMatrix m = load_input_matrix(matrix_path, s);
  Model model;
  if (calibrate > 0.0) {
    if (calibrate >= 1.0) throw InputError("--calibrate must lie in (0, 1)");
    model = train_model(holdout(m, calibrate, c.seed, false), cfg);
    const FeatureMatrix val = holdout(m, calibrate, c.seed, true);
    const auto groups = score_groups(model, k > 0 ? regroup_matrix(val, k, c.seed) : val, 0.0, c.jobs);
    std::vector<double> agg;
    for (const auto& g : groups) agg.push_back(g.aggregate);
    model.tau = calibrate_tau(agg, known_labels(groups));
  } else {
    model = train_model(m, cfg);
  }
  save_model(model, dir / "model.json");
  s.schema(model.schema);
  s.finish(dir);
  s.out() << "trained " << to_string(model.kind) << " on " << m.size() << " rows (tau " << model.tau << ") -> "
          << (dir / "model.json").string() << "\n";
  return 0;
}

int listwise_items_of(const FeatureSchema& schema) {
  int n = 0;
  for (const auto& f : schema.fields)
    if (f.name.rfind("base.item", 0) == 0) ++n;
  return n;
}

Ablation ablation_of(const FeatureSchema& schema) {
  bool llm = false, ling = false;
  for (const auto& f : schema.fields) {
    llm = llm || f.block == Block::Llm;
    ling = ling || f.block == Block::Linguistic;
  }
  if (llm && ling) return Ablation::Full;
  if (llm) return Ablation::BaseLlm;
  if (ling) return Ablation::BaseLing;
  return Ablation::BaseOnly;
}

int cmd_detect(Session& s, const Common& c, const ExtractFlags& f, const std::string& model_path,
               const std::string& matrix_path, std::optional<double> tau_flag, int k) {
  const fs::path dir = s.out_dir(c);
  s.config(c);
  const Model model = load_input_model(model_path, s);
  FeatureMatrix m;
  if (!matrix_path.empty()) {
    m = load_input_matrix(matrix_path, s);
  } else {
    const Dataset ds = load_input_dataset(f, s);
    const auto ex = make_extraction(f, ablation_of(model.schema), listwise_items_of(model.schema),
                                    dir / "llm_cache.jsonl", c.jobs, s);
    m = extract_matrix(ds, ex->options);
  }
  if (k > 0) {
    m = regroup_matrix(m, k, c.seed);
    s.manifest().seeds = {c.seed};
  }
  const double tau = tau_flag.value_or(model.tau);
  const auto groups = score_groups(model, m, tau, c.jobs);

  std::ostringstream csv;
  csv << "group_id,label,n_instances,aggregate,prediction\n";
  std::size_t predicted_llm = 0;
  bool all_known = true;
  char buf[64];
  for (const auto& g : groups) {
    std::snprintf(buf, sizeof buf, "%.9g", g.aggregate);
    csv << g.group_id << ',' << (g.true_label == Label::Unknown ? "" : std::string(to_string(g.true_label))) << ','
        << g.instance_logits.size() << ',' << buf << ',' << g.prediction << '\n';
    predicted_llm += static_cast<std::size_t>(g.prediction);
    all_known = all_known && g.true_label != Label::Unknown;
  }
  write_file(dir / "groups.csv", csv.str());

  std::ostringstream summary;
  summary << "groups " << groups.size() << "\npredicted_llm " << predicted_llm << "\npredicted_human "
          << groups.size() - predicted_llm << "\ntau " << tau << "\n";
  if (all_known && !groups.empty()) {
    const auto labels = known_labels(groups);
    const bool both = std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0;
    const RunMetrics r = both ? evaluate_scores(groups, tau, c.seed) : RunMetrics{};
    std::vector<int> preds;
    for (const auto& g : groups) preds.push_back(g.prediction);
    summary << "f1 " << f1_score(preds, labels) << "\n";
    if (both) summary << "auroc " << r.auroc << "\n";
  }
  write_file(dir / "summary.txt", summary.str());
  s.schema(model.schema);
  s.finish(dir);
  s.out() << summary.str();
  return 0;
}

int cmd_evaluate(Session& s, const Common& c, const std::string& model_path, const std::string& train_path,
                 const std::string& matrix_path, const std::string& kind, int repeats,
                 const std::vector<std::uint64_t>& seeds, int k, std::optional<double> tau) {
  const fs::path dir = s.out_dir(c);
  const json cfg_json = s.config(c);
  DetectionOptions opt;
  opt.k = k;
  opt.seeds = resolve_seeds(seeds, repeats, c.seed);
  opt.tau = tau;
  opt.jobs = c.jobs;
  s.manifest().seeds = opt.seeds;
  const FeatureMatrix test = load_input_matrix(matrix_path, s);
  MetricsReport report;
  if (!model_path.empty() == !train_path.empty()) throw InputError("give exactly one of --model or --train-matrix");
  if (!model_path.empty()) {
    const Model model = load_input_model(model_path, s);
    report = evaluate_model(model, test, opt);
  } else {
    const FeatureMatrix train = load_input_matrix(train_path, s);
    report = run_detection(train, test, train_config(cfg_json, kind), opt);
  }
  write_file(dir / "metrics.txt", report.to_text());
  write_file(dir / "metrics.csv", report.to_csv());
  write_file(dir / "metrics.json", report.to_json());
  s.schema(test.schema);
  s.finish(dir);
  s.out() << report.to_text();
  return 0;
}

int cmd_bias(Session& s, const Common& c, const std::string& model_path, int top_n) {
  const fs::path dir = s.out_dir(c);
  s.config(c);
  const Model model = load_input_model(model_path, s);
  const BiasReport report = bias_report(model, top_n);
  if (report.warning) s.err() << "warning: " << *report.warning << "\n";
  write_file(dir / "bias.txt", report.to_table());
  write_file(dir / "bias.csv", report.to_csv());
  s.schema(model.schema);
  s.finish(dir);
  s.out() << report.to_table();
  return 0;
}

theory::JudgmentSpecTheory spec_from(const json& j) {
  theory::JudgmentSpecTheory spec;
  spec.type = judgment_type_from_string(get_or<std::string>(j, "type", "pointwise"));
  spec.L = get_or(j, "L", spec.type == JudgmentType::Pointwise ? 5 : 0);
  spec.x = get_or(j, "x", spec.type == JudgmentType::Pairwise ? 3 : 0);
  spec.k_items = get_or(j, "k_items", spec.type == JudgmentType::Listwise ? 3 : 0);
  spec.use_stirling = get_or(j, "use_stirling", false);
  spec.validate();
  return spec;
}

int cmd_theory(Session& s, const Common& c, const std::vector<int>& ks, const std::vector<std::uint64_t>& seeds) {
  const fs::path dir = s.out_dir(c);
  const json j = s.config(c);
  check_keys(j,
             {"type", "L", "x", "k_items", "use_stirling", "d", "deltas", "ks", "n_instances", "seeds", "train",
              "ablation", "length_bias", "noise", "test_fraction"},
             "theory");
  SweepConfig cfg;
  cfg.base.spec = spec_from(j);
  cfg.base.n_instances = get_or(j, "n_instances", 2000);
  cfg.base.length_bias = get_or(j, "length_bias", 1.0);
  cfg.base.noise = get_or(j, "noise", 1.0);
  cfg.ds = get_or(j, "d", std::vector<int>{1});
  cfg.deltas = get_or(j, "deltas", std::vector<double>{0.1, 0.2, 0.4});
  cfg.ks = !ks.empty() ? ks : get_or(j, "ks", cfg.ks);
  cfg.seeds = !seeds.empty() ? seeds : get_or(j, "seeds", std::vector<std::uint64_t>{c.seed});
  cfg.train = train_config(get_or(j, "train", json{{"kind", "logistic"}}), "");
  cfg.extract.ablation = ablation_from_string(get_or<std::string>(j, "ablation", "base_ling"));
  cfg.extract.test_fraction = get_or(j, "test_fraction", 0.5);
  cfg.extract.jobs = c.jobs;
  s.manifest().seeds = cfg.seeds;
  const auto rows = run_sweep(cfg);
  write_file(dir / "sweep.csv", sweep_to_csv(rows));
  s.finish(dir);
  s.out() << "sweep: " << rows.size() << " rows, beta_hat " << (rows.empty() ? 0.0 : rows.front().beta_hat)
          << " -> " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_synth(Session& s, const Common& c, std::optional<double> delta, std::optional<int> k) {
  const fs::path dir = s.out_dir(c);
  const json j = s.config(c);
  check_keys(j, {"type", "L", "x", "k_items", "use_stirling", "d", "delta", "n_instances", "k", "noise", "length_bias"},
             "synth");
  theory::SynthConfig cfg;
  cfg.spec = spec_from(j);
  cfg.d = get_or(j, "d", 1);
  cfg.target_delta = delta.value_or(get_or(j, "delta", 0.2));
  cfg.n_instances = get_or(j, "n_instances", 2000);
  cfg.k = k.value_or(get_or(j, "k", 4));
  cfg.noise = get_or(j, "noise", 1.0);
  cfg.length_bias = get_or(j, "length_bias", 1.0);
  cfg.seed = c.seed;
  s.manifest().seeds = {c.seed};
  const Dataset ds = theory::synth_generate(cfg);
  save_dataset(ds, dir / "dataset.jsonl");
  save_scale(ds.scale, dir / "scale.json");
  s.finish(dir);
  s.out() << "synthesized " << ds.groups.size() << " groups -> " << (dir / "dataset.jsonl").string() << "\n";
  return 0;
}

int cmd_cache(Session& s, const std::string& action, const std::string& cache_path, const std::string& file) {
  if (cache_path.empty()) throw InputError("--cache is required");
  if (action == "stats") {
    const llm::FeatureCache cache(cache_path);
    s.out() << "entries " << cache.size() << "\n";
    return 0;
  }
  if (file.empty()) throw InputError("--file is required for cache " + action);
  if (action == "export") {
    const llm::FeatureCache cache(cache_path);
    s.out() << "exported " << cache.export_to(file) << " entries\n";
    return 0;
  }
  if (action == "import") {
    llm::FeatureCache cache(cache_path);
    const std::size_t n = cache.import_from(file);
    cache.flush();
    s.out() << "imported " << n << " entries (" << cache.size() << " total)\n";
    return 0;
  }
  throw InputError("unknown cache action '" + action + "' (stats, export, import)");
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--seed", c.seed, "Base random seed");
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_extract_flags(CLI::App* app, ExtractFlags& f) {
  app->add_option("--dataset", f.dataset, "JSONL judgment groups");
  app->add_option("--scale", f.scale, "Scale JSON");
  app->add_option("--provider-config", f.provider_config, "LLM provider config JSON");
  app->add_option("--cache", f.cache, "LLM feature cache (JSONL)");
  app->add_option("--offline", f.offline, "Cache-only mode")->check(CLI::IsMember({"strict", "lenient"}));
  app->add_option("--template", f.template_id, "Prompt template id");
  app->add_option("--listwise-items", f.listwise_items, "Listwise slot count");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"judgekit: detect LLM-produced judgment groups"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  ExtractFlags ef;
  std::string matrix, model, train_matrix, kind, cache_action, cache_file;
  std::optional<double> tau, delta;
  std::optional<int> synth_k;
  double calibrate = 0.0;
  int k = 4, detect_k = 0, repeats = 5, top_n = 20;
  std::vector<std::uint64_t> seeds;
  std::vector<int> ks;

  auto* extract = app.add_subcommand("extract", "Build the feature matrix of a dataset");
  add_common(extract, common);
  add_extract_flags(extract, ef);
  extract->add_option("--ablation", ef.ablation, "Feature blocks")
      ->check(CLI::IsMember({"full", "base_only", "base_llm", "base_ling"}));

  auto* train = app.add_subcommand("train", "Train a detector on a feature matrix");
  add_common(train, common);
  train->add_option("--matrix", matrix, "Training matrix CSV");
  train->add_option("--model-kind", kind, "logistic or forest")->check(CLI::IsMember({"logistic", "forest"}));
  train->add_option("--calibrate", calibrate, "Hold out this fraction to pick tau");
  train->add_option("--k", k, "Group size for calibration");

  auto* detect = app.add_subcommand("detect", "Score judgment groups with a trained model");
  add_common(detect, common);
  add_extract_flags(detect, ef);
  detect->add_option("--model", model, "Model JSON");
  detect->add_option("--matrix", matrix, "Feature matrix CSV (instead of --dataset)");
  detect->add_option("--tau", tau, "Logit-scale threshold (default: model tau)");
  detect->add_option("--k", detect_k, "Regroup into groups of k (0 keeps the input groups)");

  auto* evaluate = app.add_subcommand("evaluate", "Repeated-run F1 and AUROC");
  add_common(evaluate, common);
  evaluate->add_option("--matrix", matrix, "Test matrix CSV");
  evaluate->add_option("--model", model, "Fixed model JSON");
  evaluate->add_option("--train-matrix", train_matrix, "Train a fresh model per repeat on this matrix");
  evaluate->add_option("--model-kind", kind, "logistic or forest")->check(CLI::IsMember({"logistic", "forest"}));
  evaluate->add_option("--repeats", repeats, "Number of runs");
  evaluate->add_option("--seeds", seeds, "Comma-separated seeds, one per run")->delimiter(',');
  evaluate->add_option("--k", k, "Group size");
  evaluate->add_option("--tau", tau, "Logit-scale threshold");

  auto* bias = app.add_subcommand("bias", "Top features driving the detector");
  add_common(bias, common);
  bias->add_option("--model", model, "Model JSON");
  bias->add_option("--top-n", top_n, "Rows to report");

  auto* theory_cmd = app.add_subcommand("theory", "Synthetic detectability sweep");
  add_common(theory_cmd, common);
  theory_cmd->add_option("--k", ks, "Comma-separated group sizes")->delimiter(',');
  theory_cmd->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  add_common(synth, common);
  synth->add_option("--delta", delta, "Target total-variation distance");
  synth->add_option("--k", synth_k, "Group size");

  auto* cache = app.add_subcommand("cache", "Inspect or move the LLM feature cache");
  cache->add_option("action", cache_action, "stats, export or import")->required();
  cache->add_option("--cache", cache_file, "Cache file");
  cache->add_option("--file", ef.cache, "Export target or import source");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Input);
  }

  Session session(argc, argv, out, err);
  try {
    if (*extract) return cmd_extract(session, common, ef);
    if (*train) return cmd_train(session, common, matrix, kind, calibrate, k);
    if (*detect) return cmd_detect(session, common, ef, model, matrix, tau, detect_k);
    if (*evaluate) return cmd_evaluate(session, common, model, train_matrix, matrix, kind, repeats, seeds, k, tau);
    if (*bias) return cmd_bias(session, common, model, top_n);
    if (*theory_cmd) return cmd_theory(session, common, ks, seeds);
    if (*synth) return cmd_synth(session, common, delta, synth_k);
    if (*cache) return cmd_cache(session, cache_action, cache_file, ef.cache);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Input);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Internal);
  }
  return static_cast<int>(ErrorCategory::Internal);
}

}  // namespace judgekit::cli
