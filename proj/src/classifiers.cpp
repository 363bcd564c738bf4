#include "judgekit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "judgekit/error.hpp"
#include "judgekit/hash.hpp"
#include "judgekit/kernels.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/rng.hpp"

namespace judgekit {

using nlohmann::json;

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Logistic ? "logistic" : "forest"; }

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "forest") return ModelKind::Forest;
  throw InputError("unknown model kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  const auto fraction = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (!(l2_lambda >= 0.0)) throw InputError("l2_lambda must be >= 0");
  if (n_trees < 1) throw InputError("n_trees must be >= 1");
  if (max_depth < 1) throw InputError("max_depth must be >= 1");
  if (min_leaf < 1) throw InputError("min_leaf must be >= 1");
  if (feature_subsample != 0.0 && !fraction(feature_subsample))
    throw InputError("feature_subsample must be in (0, 1]");
  if (!fraction(row_subsample)) throw InputError("row_subsample must be in (0, 1]");
}

namespace {

void check_data(const TrainingData& data) {
  if (data.x.size() != data.y.size()) throw InputError("feature and label counts differ");
  bool has0 = false, has1 = false;
  for (int y : data.y) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    (y ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw InputError("training data needs both classes");
  const std::size_t d = data.x.front().size();
  for (const auto& row : data.x) {
    if (row.size() != d) throw InputError("ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw InputError("non-finite feature value in training data");
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

LogisticEval logistic_objective(const TrainingData& data, std::span<const double> w, double b, double lambda) {
  const std::size_t n = data.x.size();
  LogisticEval e;
  e.grad_w.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = kernels::dot(data.x[i], w) + b;
    // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
    e.loss += softplus(z) - data.y[i] * z;
    const double r = sigmoid(z) - data.y[i];
    kernels::axpy(r, data.x[i], e.grad_w);
    e.grad_b += r;
  }
  const double inv = 1.0 / static_cast<double>(n);
  e.loss *= inv;
  e.grad_b *= inv;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    e.grad_w[j] = e.grad_w[j] * inv + lambda * w[j];
    norm2 += w[j] * w[j];
  }
  e.loss += 0.5 * lambda * norm2;
  return e;
}

LogisticModel train_logistic(const TrainingData& data, const TrainConfig& cfg, std::vector<double>* loss_trace) {
  cfg.validate();
  check_data(data);
  LogisticModel m;
  m.l2_lambda = cfg.l2_lambda;
  m.weights.assign(data.x.front().size(), 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const LogisticEval e = logistic_objective(data, m.weights, m.bias, cfg.l2_lambda);
    if (loss_trace) loss_trace->push_back(e.loss);
    kernels::axpy(-cfg.learning_rate, e.grad_w, m.weights);
    m.bias -= cfg.learning_rate * e.grad_b;
  }
  if (loss_trace) loss_trace->push_back(logistic_objective(data, m.weights, m.bias, cfg.l2_lambda).loss);
  return m;
}

double predict_logistic(const LogisticModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) throw InputError("vector width does not match the model");
  return kernels::dot(model.weights, x) + model.bias;
}

// ---------------------------------------------------------------------------
// Forest

namespace {

struct TreeBuilder {
  const TrainingData& data;
  const TrainConfig& cfg;
  std::size_t mtry;
  CounterRng rng;
  std::vector<double>& importance;
  Tree tree;

  static double gini_mass(double pos, double n) {
    // n * gini = n * (1 - p^2 - q^2) = 2 * pos * neg / n
    return n > 0 ? 2.0 * pos * (n - pos) / n : 0.0;
  }

  int leaf(double pos, double n) {
    const double p = pos / n;
    TreeNode node;
    node.value = std::log((p + kLeafEpsilon) / (1.0 - p + kLeafEpsilon));
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    const double n = static_cast<double>(rows.size());
    double pos = 0;
    for (std::size_t r : rows) pos += data.y[r];
    const auto min_leaf = static_cast<std::size_t>(cfg.min_leaf);
    if (depth >= cfg.max_depth || pos == 0 || pos == n || rows.size() < 2 * min_leaf) return leaf(pos, n);

    const std::size_t d = data.x.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry; ++i) std::swap(features[i], features[i + rng.below(d - i)]);

    const double parent = gini_mass(pos, n);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t f = 0; f < mtry; ++f) {
      const std::size_t j = features[f];
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {data.x[rows[i]][j], data.y[rows[i]]};
      std::sort(column.begin(), column.end());
      double left_pos = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = column.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent - gini_mass(left_pos, static_cast<double>(nl)) -
                            gini_mass(pos - left_pos, static_cast<double>(nr));
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
        }
      }
    }
    if (best_feature < 0) return leaf(pos, n);

    importance[static_cast<std::size_t>(best_feature)] += best_gain;
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (data.x[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{best_feature, best_threshold, -1, -1, 0.0});
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = l;
    tree.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace

TreeEnsemble train_forest(const TrainingData& data, const TrainConfig& cfg) {
  cfg.validate();
  check_data(data);
  const std::size_t n = data.x.size();
  const std::size_t d = data.x.front().size();
  if (d == 0) throw InputError("training data has no features");
  const double frac = cfg.feature_subsample > 0 ? cfg.feature_subsample : std::sqrt(static_cast<double>(d)) / d;
  const std::size_t mtry = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(frac * d)), 1, d);
  const std::size_t draws = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.row_subsample * n)));

  TreeEnsemble forest;
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  std::vector<std::vector<double>> per_tree(forest.trees.size(), std::vector<double>(d, 0.0));
  parallel_for(forest.trees.size(), cfg.jobs, [&](std::size_t t) {
    TreeBuilder b{data, cfg, mtry, CounterRng(cfg.seed, 1 + t), per_tree[t], {}};
    std::vector<std::size_t> rows(draws);
    for (auto& r : rows) r = b.rng.below(n);
    b.build(rows, 0);
    forest.trees[t] = std::move(b.tree);
  });

  forest.importance.assign(d, 0.0);
  for (const auto& imp : per_tree)
    for (std::size_t j = 0; j < d; ++j) forest.importance[j] += imp[j];
  const double total = std::accumulate(forest.importance.begin(), forest.importance.end(), 0.0);
  for (double& v : forest.importance) v = total > 0 ? v / total : 1.0 / static_cast<double>(d);
  return forest;
}

double predict_tree(const Tree& tree, std::span<const double> x) {
  std::size_t i = 0;
  while (tree.nodes[i].feature >= 0) {
    const auto& node = tree.nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                              : node.right);
  }
  return tree.nodes[i].value;
}

double predict_forest(const TreeEnsemble& forest, std::span<const double> x) {
  if (forest.trees.empty()) throw InputError("forest has no trees");
  double sum = 0.0;
  for (const auto& t : forest.trees) sum += predict_tree(t, x);
  return sum / static_cast<double>(forest.trees.size());
}

// ---------------------------------------------------------------------------
// Model

std::vector<double> Model::prepare(const FeatureVector& v) const {
  if (v.size() != schema.size()) throw InputError("vector width does not match the model schema");
  if (standardized) return standardized_values(standardizer, v);
  std::vector<double> out = v.values;
  for (std::size_t j = 0; j < out.size(); ++j)
    if (!v.present[j]) out[j] = standardizer.mean[j];
  return out;
}

double Model::predict_logit(const FeatureVector& v) const {
  const std::vector<double> x = prepare(v);
  return kind == ModelKind::Logistic ? predict_logistic(logistic, x) : predict_forest(forest, x);
}

Model train_model(const FeatureMatrix& matrix, const TrainConfig& cfg) {
  cfg.validate();
  if (matrix.rows.empty()) throw InputError("training matrix is empty");
  Model m;
  m.kind = cfg.kind;
  m.schema = matrix.schema;
  m.config = cfg;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i)
    for (std::size_t j = 0; j < matrix.rows[i].size(); ++j)
      if (matrix.rows[i].present[j] && !std::isfinite(matrix.rows[i].values[j]))
        throw InputError("non-finite value for " + matrix.schema.fields[j].name + " in group '" +
                         matrix.group_ids[i] + "'");
  m.standardizer = fit_standardizer(matrix);
  m.standardized = cfg.kind == ModelKind::Logistic || cfg.standardize_forest;

  TrainingData data;
  data.x.reserve(matrix.rows.size());
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    if (matrix.labels[i] == Label::Unknown)
      throw InputError("training row for group '" + matrix.group_ids[i] + "' has no label");
    data.x.push_back(m.prepare(matrix.rows[i]));
    data.y.push_back(matrix.labels[i] == Label::Llm ? 1 : 0);
  }
  if (cfg.kind == ModelKind::Logistic)
    m.logistic = train_logistic(data, cfg);
  else
    m.forest = train_forest(data, cfg);
  return m;
}

void check_schema(const Model& model, const FeatureSchema& schema) {
  if (schema.hash() == model.schema.hash()) return;
  // A matrix without its sidecar carries no lexicon hashes; names decide.
  if (schema.lexicon_hashes.empty() && schema.fields == model.schema.fields) return;
  throw InputError("feature schema hash " + schema.hash().substr(0, 12) + " does not match model schema " +
                   model.schema.hash().substr(0, 12));
}

std::vector<Importance> feature_importance(const Model& model) {
  std::vector<Importance> out;
  for (std::size_t j = 0; j < model.schema.size(); ++j) {
    double v = 0.0;
    if (model.kind == ModelKind::Logistic)
      v = j < model.logistic.weights.size() ? model.logistic.weights[j] : 0.0;
    else
      v = j < model.forest.importance.size() ? model.forest.importance[j] : 0.0;
    out.push_back({model.schema.fields[j].name, model.schema.fields[j].block, v, j});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Importance& a, const Importance& b) { return std::fabs(a.value) > std::fabs(b.value); });
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json config_json(const TrainConfig& c) {
  return {{"kind", std::string(to_string(c.kind))},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"l2_lambda", c.l2_lambda},
          {"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"min_leaf", c.min_leaf},
          {"feature_subsample", c.feature_subsample},
          {"row_subsample", c.row_subsample},
          {"standardize_forest", c.standardize_forest}};
}

TrainConfig config_from(const json& j, std::uint64_t seed) {
  TrainConfig c;
  c.kind = model_kind_from_string(j.at("kind").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.l2_lambda = j.at("l2_lambda").get<double>();
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_leaf = j.at("min_leaf").get<int>();
  c.feature_subsample = j.at("feature_subsample").get<double>();
  c.row_subsample = j.at("row_subsample").get<double>();
  c.standardize_forest = j.at("standardize_forest").get<bool>();
  c.seed = seed;
  return c;
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(model.kind));
  j["schema"] = json::parse(model.schema.to_json());
  j["schema_hash"] = model.schema.hash();
  j["lexicon_hashes"] = model.schema.lexicon_hashes;
  j["standardizer"] = {{"mean", model.standardizer.mean}, {"std", model.standardizer.std_dev}};
  j["standardized"] = model.standardized;
  j["hyperparameters"] = config_json(model.config);
  j["seed"] = model.config.seed;
  j["tau"] = model.tau;
  if (model.kind == ModelKind::Logistic) {
    j["logistic"] = {{"weights", model.logistic.weights}, {"bias", model.logistic.bias}};
  } else {
    json trees = json::array();
    for (const auto& t : model.forest.trees) {
      json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
           value = json::array();
      for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
      }
      trees.push_back(
          {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
    }
    j["forest"] = {{"trees", trees}, {"importance", model.forest.importance}};
  }
  return j.dump() + "\n";
}

Model model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw InputError("model format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelFormatVersion) + ")");
    Model m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    json schema = j.at("schema");
    schema.erase("hash");
    m.schema = FeatureSchema::from_json(schema.dump());
    if (j.at("schema_hash").get<std::string>() != m.schema.hash())
      throw InputError("model schema hash does not match its schema; refusing to apply");
    m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.std_dev = j.at("standardizer").at("std").get<std::vector<double>>();
    if (m.standardizer.size() != m.schema.size() || m.standardizer.std_dev.size() != m.schema.size())
      throw InputError("model standardizer width does not match its schema");
    m.standardized = j.at("standardized").get<bool>();
    m.config = config_from(j.at("hyperparameters"), j.at("seed").get<std::uint64_t>());
    m.tau = j.at("tau").get<double>();
    const std::size_t d = m.schema.size();
    if (m.kind == ModelKind::Logistic) {
      m.logistic.weights = j.at("logistic").at("weights").get<std::vector<double>>();
      m.logistic.bias = j.at("logistic").at("bias").get<double>();
      m.logistic.l2_lambda = m.config.l2_lambda;
      if (m.logistic.weights.size() != d) throw InputError("model weight count does not match its schema");
    } else {
      for (const auto& t : j.at("forest").at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const std::size_t n = feature.size();
        if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
          throw InputError("model tree arrays are inconsistent");
        Tree tree;
        for (std::size_t i = 0; i < n; ++i) {
          const TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
          const auto child_ok = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
          if (node.feature >= static_cast<int>(d) ||
              (node.feature >= 0 && (!child_ok(node.left) || !child_ok(node.right))) ||
              !std::isfinite(node.value))
            throw InputError("model tree node " + std::to_string(i) + " is invalid");
          tree.nodes.push_back(node);
        }
        m.forest.trees.push_back(std::move(tree));
      }
      m.forest.importance = j.at("forest").at("importance").get<std::vector<double>>();
      if (m.forest.trees.empty()) throw InputError("model forest has no trees");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model " + path.string());
  out << model_to_json(model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace judgekit
