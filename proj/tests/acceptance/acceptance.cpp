// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Everything runs offline on synthetic data.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "judgekit/classifiers.hpp"
#include "judgekit/cli.hpp"
#include "judgekit/experiment.hpp"
#include "judgekit/linguistic.hpp"
#include "judgekit/pipeline.hpp"
#include "judgekit/rng.hpp"
#include "judgekit/theory.hpp"
#include "../unit/support.hpp"

using namespace judgekit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kSeeds = 5;

// Mean F1 and AUROC of a model trained on split.train and scored on the
// test rows regrouped at k.
struct Score {
  double f1, auroc;
};

Score score_at(const SynthSplit& split, TrainConfig cfg, int k, std::uint64_t seed) {
  cfg.seed = seed;
  const Model model = train_model(split.train, cfg);
  const auto groups = score_groups(model, regroup_matrix(split.test, k, seed), 0.0);
  const RunMetrics r = evaluate_scores(groups, 0.0, seed);
  return {r.f1, r.auroc};
}

TrainConfig logistic() { return TrainConfig{ModelKind::Logistic}; }

TrainConfig forest() {
  TrainConfig c{ModelKind::Forest};
  c.n_trees = 100;
  return c;
}

theory::SynthConfig synth(theory::JudgmentSpecTheory spec, double delta, std::uint64_t seed) {
  theory::SynthConfig c;
  c.spec = spec;
  c.target_delta = delta;
  c.seed = seed;
  c.n_instances = 2000;
  return c;
}

theory::JudgmentSpecTheory pointwise(int L) { return {JudgmentType::Pointwise, L, 0, 0, false}; }

// ---------------------------------------------------------------------------

double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

Outcome c1_auroc() {
  CounterRng rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    const std::uint64_t levels = 1 + rng.below(12);  // few levels, many ties
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 3 == 0 ? rng.normal() : static_cast<double>(rng.below(levels)) * 0.25;
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 1;
    y[1] = 0;
    mismatches += auroc(s, y) != brute_auroc(s, y);
  }
  return {mismatches == 0, fmt("%d/1000 mismatches", mismatches)};
}

std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i)
    out[i] = std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0)) * std::pow(p, i) *
             std::pow(1 - p, n - i);
  return out;
}

Outcome c2_tv() {
  const int n = 10000;
  const auto p = binomial_pmf(4, 0.35), q = binomial_pmf(4, 0.55);
  const double truth = theory::tv_distance(p, q);
  // Bound on E|TV_hat - TV| from the per-bin binomial standard deviations.
  double sigma = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sigma += 0.5 * std::sqrt((p[i] * (1 - p[i]) + q[i] * (1 - q[i])) / n);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(seed, 77);
    std::vector<std::vector<double>> h, m;
    for (int i = 0; i < n; ++i) h.push_back({static_cast<double>(rng.categorical(p))});
    for (int i = 0; i < n; ++i) m.push_back({static_cast<double>(rng.categorical(q))});
    within += std::abs(theory::estimate_tv(h, m, pointwise(5)).mean - truth) <= 3 * sigma;
  }
  const double det = theory::detectability_index(0.5, 4, 1, 7.0, 0.3);
  const bool ok = within >= 9 && std::abs(det - 0.29549) <= 1e-4;
  return {ok, fmt("%d/10 seeds within 3*%.4f of TV %.4f; Det %.5f", within, sigma, truth, det)};
}

Outcome c3_gradient() {
  CounterRng rng(303);
  const double h = 1e-5;
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(6), n = 3 + rng.below(30);
    TrainingData data;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(d);
      for (auto& v : x) v = rng.normal();
      data.x.push_back(x);
      data.y.push_back(static_cast<int>(rng.below(2)));
    }
    std::vector<double> w(d);
    for (auto& v : w) v = rng.normal();
    const double b = rng.normal(), lambda = rng.uniform() * 0.1;
    const auto e = logistic_objective(data, w, b, lambda);
    for (std::size_t j = 0; j <= d; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      (j < d ? wp[j] : bp) += h;
      (j < d ? wm[j] : bm) -= h;
      const double fd =
          (logistic_objective(data, wp, bp, lambda).loss - logistic_objective(data, wm, bm, lambda).loss) / (2 * h);
      const double analytic = j < d ? e.grad_w[j] : e.grad_b;
      const double scale = std::max(std::abs(fd), std::abs(analytic));
      if (scale < 1e-7) continue;  // both vanish; relative error undefined
      worst = std::max(worst, std::abs(fd - analytic) / scale);
    }
  }
  return {worst <= 1e-4, fmt("max relative error %.2e", worst)};
}

Outcome c4_fit_beta() {
  // Saturated points (det near 1) say little about beta and -ln(1 - det)
  // blows their noise up, so the grid stops at det = 0.8.
  std::vector<theory::BetaPoint> pts;
  double max_det = 0;
  for (int m : {1, 2, 4, 8, 16})
    for (int d : {1, 3})
      for (double delta : {0.05, 0.1, 0.2}) {
        const double det = theory::detectability_index(0.7, m, d, 7.0, delta);
        if (det > 0.8) continue;
        pts.push_back({m, d, 7.0, delta, det});
        max_det = std::max(max_det, det);
      }
  const double clean = theory::fit_beta(pts);
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed, 4);
    auto noisy = pts;
    for (auto& p : noisy) p.observed_det *= 1 + 0.01 * rng.normal();
    worst = std::max(worst, std::abs(theory::fit_beta(noisy) / 0.7 - 1));
  }
  return {std::abs(clean - 0.7) <= 1e-9 && worst <= 0.05,
          fmt("%zu points, det <= %.2f; noiseless |err| %.1e; worst relative error under noise %.2f%% (20 draws)",
              pts.size(), max_det, std::abs(clean - 0.7), 100 * worst)};
}

Outcome c5_group_size() {
  SweepConfig cfg;
  cfg.base = synth(pointwise(7), 0.2, 0);
  cfg.ks = {1, 2, 4, 8, 16};
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.train = logistic();
  const auto rows = run_sweep(cfg);
  std::map<std::uint64_t, std::map<int, double>> by_seed;
  for (const auto& r : rows) by_seed[r.seed][r.m] = r.auroc_observed;
  double gap = 0;
  int monotone = 0;
  for (auto& [seed, curve] : by_seed) {
    gap += (curve.at(16) - curve.at(1)) / static_cast<double>(kSeeds);
    bool ok = true;
    for (int k : {2, 4, 8, 16}) ok = ok && curve.at(k) >= curve.at(k / 2);
    monotone += ok;
  }
  double a1 = 0, a16 = 0;
  for (auto& [seed, curve] : by_seed) {
    a1 += curve.at(1) / kSeeds;
    a16 += curve.at(16) / kSeeds;
  }
  return {gap >= 0.10 && monotone >= 4,
          fmt("AUROC k=1 %.3f -> k=16 %.3f (gap %.3f); non-decreasing in %d/5 seeds", a1, a16, gap, monotone)};
}

Outcome c6_dimensions() {
  int wins = 0;
  double f1_1 = 0, f1_5 = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    auto c = synth(pointwise(7), 0.15, seed);
    c.d = 1;
    const double one = score_at(synth_split(c, {}), logistic(), 4, seed).f1;
    c.d = 5;
    const double five = score_at(synth_split(c, {}), logistic(), 4, seed).f1;
    wins += five - one >= 0.05;
    f1_1 += one / kSeeds;
    f1_5 += five / kSeeds;
  }
  return {wins >= 4, fmt("mean F1 d=1 %.3f, d=5 %.3f; d=5 ahead by >=0.05 in %d/5 seeds", f1_1, f1_5, wins)};
}

Outcome c7_coarsening() {
  const std::map<int, int> coarse{{-3, -1}, {-2, -1}, {-1, -1}, {0, 0}, {1, 1}, {2, 1}, {3, 1}};
  int wins = 0;
  double fine_f1 = 0, coarse_f1 = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto c = synth({JudgmentType::Pairwise, 0, 3, 0, false}, 0.2, seed);
    const double fine = score_at(synth_split(c, {}), forest(), 4, seed).f1;
    const double crude = score_at(synth_split_coarsened(c, coarse, {}), forest(), 4, seed).f1;
    wins += crude < fine;
    fine_f1 += fine / kSeeds;
    coarse_f1 += crude / kSeeds;
  }
  return {wins >= 4, fmt("mean F1 fine %.3f, coarse %.3f; coarsening lowers F1 in %d/5 seeds", fine_f1, coarse_f1,
                         wins)};
}

Outcome c8_ablation() {
  int wins = 0;
  double full_f1 = 0, base_f1 = 0, no_ling_f1 = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto c = synth(pointwise(5), 0.0, seed);
    const double full = score_at(synth_split(c, {Ablation::Full}), forest(), 16, seed).f1;
    const double base = score_at(synth_split(c, {Ablation::BaseOnly}), forest(), 16, seed).f1;
    const double no_ling = score_at(synth_split(c, {Ablation::BaseLlm}), forest(), 16, seed).f1;
    wins += full >= base && full - no_ling >= 0.02;
    full_f1 += full / kSeeds;
    base_f1 += base / kSeeds;
    no_ling_f1 += no_ling / kSeeds;
  }
  return {wins >= 4, fmt("mean F1 full %.3f, base_only %.3f, base_llm %.3f; holds in %d/5 seeds", full_f1, base_f1,
                         no_ling_f1, wins)};
}

Outcome c9_extremes() {
  double high = 0, none = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    high += score_at(synth_split(synth(pointwise(6), 0.5, seed), {}), logistic(), 4, seed).auroc / kSeeds;
    auto c = synth(pointwise(6), 0.0, seed);
    c.length_bias = 0.0;  // no label signal anywhere
    none += score_at(synth_split(c, {}), logistic(), 4, seed).auroc / kSeeds;
  }
  return {high >= 0.95 && none >= 0.45 && none <= 0.55,
          fmt("mean AUROC at delta 0.5: %.3f; at delta 0: %.3f", high, none)};
}

// ---------------------------------------------------------------------------

int jk(std::vector<std::string> args) {
  args.insert(args.begin(), "judgekit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (rc) std::fprintf(stderr, "judgekit %s failed (%d): %s\n", args.at(1).c_str(), rc, err.str().c_str());
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome c10_determinism() {
  jk_test::TempDir t("accept-det");
  std::ofstream(t / "synth.json") << R"({"L": 5, "delta": 0.2, "n_instances": 300, "k": 4})";
  std::ofstream(t / "provider.json")
      << R"({"endpoint": "https://judge.invalid/v1/chat/completions", "model_id": "hash-judge", "api_key_env": "JK_UNUSED"})";
  if (jk({"synth", "--config", (t / "synth.json").string(), "--seed", "5", "--out", (t / "corpus").string()}))
    return {false, "synth failed"};

  // Warm the cache once; both runs then replay it offline.
  {
    const Dataset ds = load_dataset(t / "corpus/dataset.jsonl", load_scale(t / "corpus/scale.json"));
    auto judge = make_hash_judge();
    llm::FeatureCache cache(t / "cache.jsonl");
    ExtractOptions opt;
    opt.provider = judge.get();
    opt.provider_config = llm::load_provider_config(t / "provider.json");
    opt.cache = &cache;
    extract_matrix(ds, opt);
  }

  const auto run = [&](const std::string& name) {
    const std::string dir = (t / name).string();
    return jk({"extract", "--dataset", (t / "corpus/dataset.jsonl").string(), "--scale",
               (t / "corpus/scale.json").string(), "--provider-config", (t / "provider.json").string(), "--cache",
               (t / "cache.jsonl").string(), "--offline", "strict", "--out", dir + "/features"}) ||
           jk({"train", "--matrix", dir + "/features/features.csv", "--seed", "7", "--out", dir + "/model"}) ||
           jk({"evaluate", "--matrix", dir + "/features/features.csv", "--model", dir + "/model/model.json",
               "--repeats", "5", "--out", dir + "/metrics"});
  };
  if (run("a") || run("b")) return {false, "pipeline failed"};
  int identical = 0;
  for (const char* f : {"features/features.csv", "features/features.csv.schema.json", "model/model.json",
                        "metrics/metrics.csv", "metrics/metrics.json", "metrics/metrics.txt"}) {
    const auto a = slurp(t / "a" / f), b = slurp(t / "b" / f);
    identical += !a.empty() && a == b;
  }
  return {identical == 6, fmt("%d/6 artifacts byte-identical", identical)};
}

Outcome c11_fixtures() {
  using namespace ling;
  int failed = 0, total = 0;
  const auto check = [&](bool ok) {
    ++total;
    failed += !ok;
  };
  const auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };
  const auto tagged = [](std::string_view text) {
    TokenSequence t = tokenize(text);
    RuleTagger::default_tagger().tag(t);
    return t;
  };

  // Coleman-Liau: letters=10, words=3, sentences=1.
  check(near(coleman_liau_index(10, 3, 1), -6.0667, 1e-4));
  check(coleman_liau("") == 0.0);
  check(near(coleman_liau("The cat sat."), coleman_liau_index(9, 3, 1), 1e-9));
  const std::string text = "Short words help. Long sentences, however, wander through subordinate clauses.";
  check(near(coleman_liau(text + "\n" + text), coleman_liau(text), 1e-9));

  const auto len = length_features("Hello world. How are you?");
  check(len.word_count == 5 && len.char_count == 25 && len.sentence_count == 2);
  check(near(len.avg_sentence_length, 2.5, 1e-12));
  const auto list = length_features("- a\n- b\n\nc");
  check(list.list_count == 2 && list.paragraph_count == 2);

  const auto lex = lexical_features(tagged("the cat the mat"));
  check(lex.unique_words == 3 && near(lex.vocab_diversity, 0.75, 1e-12) && near(lex.average_word_length, 3.0, 1e-12));
  check(near(lexical_features(tagged("don't stop")).contraction_rate, 0.5, 1e-12));
  const auto disc = discourse_features(tagged("however it may rain"));
  check(near(disc.hedging_frequency, 0.25, 1e-12) && near(disc.discourse_marker_rate, 0.25, 1e-12));
  check(near(discourse_features(tagged("may possibly")).hedging_frequency, 1.0, 1e-12));

  const auto block = extract_linguistic(jk_test::pointwise("i", "Hello world. How are you?", {}));
  const auto it = std::find(block.names.begin(), block.names.end(), "ling.word_count");
  check(it != block.names.end() && block.values[it - block.names.begin()] == 5.0);

  check(theory::tv_distance(std::vector<double>{0.2, 0.8}, std::vector<double>{0.2, 0.8}) == 0.0);
  check(theory::tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
  check(near(theory::tv_distance(std::vector<double>{0.5, 0.5}, std::vector<double>{0.75, 0.25}), 0.25, 1e-12));
  const auto [h, m] = theory::synth_pmfs(5, 0.3);
  check(near(theory::tv_distance(h, m), 0.3, 1e-12));

  const std::vector<double> logits{0.5, -0.2, 1.0};
  check(near(aggregate_group(logits), 1.3, 1e-12));
  check(classify_group(1.3, 0.0) == 1 && classify_group(0.0, 0.0) == 1 && classify_group(-0.1, 0.0) == 0);
  return {failed == 0, fmt("%d/%d fixtures reproduced", total - failed, total)};
}

Outcome c12_bias() {
  jk_test::TempDir t("accept-bias");
  const SynthSplit split = synth_split(synth(pointwise(5), 0.0, 0), {});
  save_model(train_model(split.train, forest()), t / "model.json");
  if (jk({"bias", "--model", (t / "model.json").string(), "--out", (t / "bias").string()}))
    return {false, "bias command failed"};
  std::istringstream csv(slurp(t / "bias/bias.csv"));
  std::string line;
  std::getline(csv, line);
  const bool header_ok = line == "rank,feature,block,value";
  std::vector<std::string> names;
  std::vector<double> values;
  bool blocks_ok = true;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) return {false, "malformed row: " + line};
    names.push_back(cells[1]);
    values.push_back(std::stod(cells[3]));
    blocks_ok = blocks_ok && cells[1].rfind(cells[2] + ".", 0) == 0;
  }
  bool sorted = true;
  for (std::size_t i = 1; i < values.size(); ++i) sorted = sorted && std::abs(values[i]) <= std::abs(values[i - 1]);
  int length_rank = 0;
  for (std::size_t i = 0; i < names.size() && i < 5 && !length_rank; ++i)
    if (names[i].rfind("ling.", 0) == 0 && names[i].find("word_count") != std::string::npos)
      length_rank = static_cast<int>(i) + 1;
  const bool ok = header_ok && names.size() == 20 && sorted && blocks_ok && length_rank > 0;
  return {ok, fmt("%zu rows, sorted=%d, blocks=%d, length feature rank %d (%s)", names.size(), sorted, blocks_ok,
                  length_rank, length_rank ? names[length_rank - 1].c_str() : "none in top 5")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "AUROC equals brute force", 10, c1_auroc},
      {2, "TV estimate and detectability index", 0, c2_tv},
      {3, "logistic gradient vs finite differences", 0, c3_gradient},
      {4, "beta recovery", 0, c4_fit_beta},
      {5, "group-size trend", 120, c5_group_size},
      {6, "dimensionality trend", 0, c6_dimensions},
      {7, "scale-coarsening trend", 0, c7_coarsening},
      {8, "feature-block ablation", 0, c8_ablation},
      {9, "separability extremes", 60, c9_extremes},
      {10, "determinism", 0, c10_determinism},
      {11, "linguistic and metric fixtures", 0, c11_fixtures},
      {12, "bias report contract", 0, c12_bias},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s -- %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
