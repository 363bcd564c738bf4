#include "judgekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "judgekit/error.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/rng.hpp"

namespace judgekit {

double aggregate_group(std::span<const double> logits) {
  if (logits.empty()) throw InputError("cannot aggregate an empty group");
  double sum = 0.0;
  for (double z : logits) {
    if (!std::isfinite(z)) throw InputError("non-finite instance logit");
    sum += z;
  }
  return sum;
}

int classify_group(double aggregate, double tau) { return aggregate >= tau ? 1 : 0; }

double f1_score(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw InputError("prediction and label counts differ");
  if (predictions.empty()) throw InputError("F1 needs at least one example");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == 1 && labels[i] == 1) ++tp;
    if (predictions[i] == 1 && labels[i] == 0) ++fp;
    if (predictions[i] == 0 && labels[i] == 1) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral so it matches pair counting exactly.
  std::int64_t twice_u = 0, neg_below = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t block_pos = 0, block_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? block_pos : block_neg) += 1;
      ++j;
    }
    twice_u += 2 * block_pos * neg_below + block_pos * block_neg;
    neg_below += block_neg;
    pos += block_pos;
    neg += block_neg;
    i = j;
  }
  if (pos == 0 || neg == 0) throw InputError("AUROC needs both classes");
  return static_cast<double>(twice_u) / static_cast<double>(2 * pos * neg);
}

double calibrate_tau(std::span<const double> aggregates, std::span<const int> labels) {
  std::vector<double> candidates(aggregates.begin(), aggregates.end());
  candidates.push_back(0.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best_tau = 0.0, best_f1 = -1.0;
  std::vector<int> preds(aggregates.size());
  for (double tau : candidates) {
    for (std::size_t i = 0; i < aggregates.size(); ++i) preds[i] = classify_group(aggregates[i], tau);
    const double f1 = f1_score(preds, labels);
    if (f1 > best_f1 || (f1 == best_f1 && std::fabs(tau) < std::fabs(best_tau))) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

FeatureMatrix regroup_matrix(const FeatureMatrix& matrix, int k, std::uint64_t seed) {
  if (k <= 0) throw InputError("group size k must be positive, got " + std::to_string(k));
  FeatureMatrix out;
  out.schema = matrix.schema;
  for (const Label label : {Label::Human, Label::Llm, Label::Unknown}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < matrix.size(); ++i)
      if (matrix.labels[i] == label) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(k))
      throw InputError("only " + std::to_string(idx.size()) + " " + std::string(to_string(label)) +
                       " rows, fewer than k=" + std::to_string(k));
    CounterRng rng(seed, static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n_groups = idx.size() / static_cast<std::size_t>(k);
    for (std::size_t g = 0; g < n_groups; ++g) {
      const std::string id = std::string(to_string(label)) + "-" + std::to_string(g);
      for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
        out.rows.push_back(matrix.rows[idx[g * k + j]]);
        out.group_ids.push_back(id);
        out.labels.push_back(label);
      }
    }
  }
  return out;
}

std::vector<GroupScore> score_groups(const Model& model, const FeatureMatrix& matrix, double tau, int jobs) {
  check_schema(model, matrix.schema);
  std::vector<double> logits(matrix.size());
  parallel_for(matrix.size(), jobs, [&](std::size_t i) { logits[i] = model.predict_logit(matrix.rows[i]); });

  std::vector<GroupScore> groups;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto [it, inserted] = slot.emplace(matrix.group_ids[i], groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().group_id = matrix.group_ids[i];
      groups.back().true_label = matrix.labels[i];
    }
    GroupScore& g = groups[it->second];
    if (g.true_label != matrix.labels[i]) throw InputError("group '" + g.group_id + "' mixes labels");
    g.instance_logits.push_back(logits[i]);
  }
  for (auto& g : groups) {
    g.aggregate = aggregate_group(g.instance_logits);
    g.prediction = classify_group(g.aggregate, tau);
  }
  return groups;
}

std::vector<int> known_labels(const std::vector<GroupScore>& groups) {
  std::vector<int> labels;
  labels.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.true_label == Label::Unknown) throw InputError("group '" + g.group_id + "' has no label");
    labels.push_back(g.true_label == Label::Llm ? 1 : 0);
  }
  return labels;
}

RunMetrics evaluate_scores(const std::vector<GroupScore>& groups, double tau, std::uint64_t seed) {
  const std::vector<int> labels = known_labels(groups);
  std::vector<int> preds;
  std::vector<double> aggregates;
  for (const auto& g : groups) {
    preds.push_back(classify_group(g.aggregate, tau));
    aggregates.push_back(g.aggregate);
  }
  RunMetrics r;
  r.seed = seed;
  r.f1 = f1_score(preds, labels);
  r.auroc = auroc(aggregates, labels);
  r.n_groups = groups.size();
  r.tau = tau;
  return r;
}

void MetricsReport::finalize() {
  mean_f1 = mean_auroc = 0.0;
  if (runs.empty()) return;
  for (const auto& r : runs) {
    mean_f1 += r.f1;
    mean_auroc += r.auroc;
  }
  mean_f1 /= static_cast<double>(runs.size());
  mean_auroc /= static_cast<double>(runs.size());
}

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %-12s %-10s %-10s %-9s %s\n", "run", "seed", "f1", "auroc", "groups", "tau");
  os << buf;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    std::snprintf(buf, sizeof buf, "%-6zu %-12llu %-10.4f %-10.4f %-9zu %.6g\n", i,
                  static_cast<unsigned long long>(r.seed), r.f1, r.auroc, r.n_groups, r.tau);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-6s %-12s %-10.4f %-10.4f\n", "mean", "", mean_f1, mean_auroc);
  os << buf;
  return os.str();
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  char buf[200];
  os << "run,seed,f1,auroc,n_groups,tau\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    std::snprintf(buf, sizeof buf, "%zu,%llu,%.9g,%.9g,%zu,%.9g\n", i, static_cast<unsigned long long>(r.seed),
                  r.f1, r.auroc, r.n_groups, r.tau);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,,%.9g,%.9g,,\n", mean_f1, mean_auroc);
  os << buf;
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs)
    j["runs"].push_back(
        {{"seed", r.seed}, {"f1", r.f1}, {"auroc", r.auroc}, {"n_groups", r.n_groups}, {"tau", r.tau}});
  j["mean"] = {{"f1", mean_f1}, {"auroc", mean_auroc}};
  return j.dump(1) + "\n";
}

namespace {

FeatureMatrix grouped(const FeatureMatrix& m, int k, std::uint64_t seed) {
  return k > 0 ? regroup_matrix(m, k, seed) : m;
}

}  // namespace

MetricsReport run_detection(const FeatureMatrix& train, const FeatureMatrix& test, const TrainConfig& cfg,
                            const DetectionOptions& options) {
  if (options.seeds.empty()) throw InputError("at least one seed is required");
  if (train.schema.fields != test.schema.fields) throw InputError("train and test schemas differ");
  MetricsReport report;
  for (const std::uint64_t seed : options.seeds) {
    TrainConfig c = cfg;
    c.seed = seed;
    c.jobs = options.jobs;
    const Model model = train_model(train, c);
    const double tau = options.tau.value_or(model.tau);
    const auto groups = score_groups(model, grouped(test, options.k, seed), tau, options.jobs);
    report.runs.push_back(evaluate_scores(groups, tau, seed));
  }
  report.finalize();
  return report;
}

MetricsReport evaluate_model(const Model& model, const FeatureMatrix& test, const DetectionOptions& options) {
  if (options.seeds.empty()) throw InputError("at least one seed is required");
  MetricsReport report;
  const double tau = options.tau.value_or(model.tau);
  for (const std::uint64_t seed : options.seeds) {
    const auto groups = score_groups(model, grouped(test, options.k, seed), tau, options.jobs);
    report.runs.push_back(evaluate_scores(groups, tau, seed));
  }
  report.finalize();
  return report;
}

MetricsReport run_detection(const Dataset& train, const Dataset& test, const TrainConfig& cfg,
                            const DetectionOptions& options, const ExtractOptions& extract) {
  ExtractOptions ex = extract;
  ex.listwise_items = std::max(resolve_listwise_items(train, extract.listwise_items),
                               resolve_listwise_items(test, extract.listwise_items));
  return run_detection(extract_matrix(train, ex), extract_matrix(test, ex), cfg, options);
}

// ---------------------------------------------------------------------------
// Bias report

BiasReport bias_report(const Model& model, int n) {
  if (n < 1) throw InputError("top-n must be >= 1");
  const bool trained = model.kind == ModelKind::Logistic ? model.logistic.weights.size() == model.schema.size()
                                                         : !model.forest.trees.empty();
  if (!trained || model.schema.size() == 0) throw InputError("model is not trained");
  BiasReport report;
  report.kind = model.kind;
  std::size_t limit = static_cast<std::size_t>(n);
  if (limit > model.schema.size()) {
    report.warning = "top-n " + std::to_string(n) + " exceeds the " + std::to_string(model.schema.size()) +
                     " features; clamped";
    limit = model.schema.size();
  }
  const auto ranked = feature_importance(model);
  for (std::size_t i = 0; i < limit; ++i)
    report.entries.push_back({i + 1, ranked[i].name, ranked[i].block, ranked[i].value});
  return report;
}

std::string BiasReport::to_table() const {
  std::size_t width = 7;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  std::ostringstream os;
  char buf[512];
  const char* value_name = kind == ModelKind::Logistic ? "coefficient" : "importance";
  std::snprintf(buf, sizeof buf, "%-5s %-*s %-6s %s\n", "rank", static_cast<int>(width), "feature", "block",
                value_name);
  os << buf;
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-5zu %-*s %-6s %+.6f\n", e.rank, static_cast<int>(width), e.name.c_str(),
                  std::string(to_string(e.block)).c_str(), e.value);
    os << buf;
  }
  return os.str();
}

std::string BiasReport::to_csv() const {
  std::ostringstream os;
  char buf[64];
  os << "rank,feature,block,value\n";
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%.9g", e.value);
    os << e.rank << ',' << e.name << ',' << to_string(e.block) << ',' << buf << '\n';
  }
  return os.str();
}

}  // namespace judgekit
