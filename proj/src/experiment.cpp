#include "judgekit/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "judgekit/error.hpp"
#include "judgekit/hash.hpp"
#include "judgekit/rng.hpp"

namespace judgekit {

std::unique_ptr<llm::StubProvider> make_hash_judge() {
  return std::make_unique<llm::StubProvider>([](const std::string& prompt) {
    const std::uint64_t h = std::strtoull(sha256_hex(prompt).substr(0, 16).c_str(), nullptr, 16);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "{\"Rationale\": \"hash judge\", \"Style\": %d, \"Format\": %d, \"Wording\": %d, \"Overall\": %d}",
                  static_cast<int>(h % 5), static_cast<int>((h >> 8) % 5), static_cast<int>((h >> 16) % 5),
                  static_cast<int>((h >> 24) % 5));
    return std::string(buf);
  });
}

namespace {

std::pair<Dataset, Dataset> instance_split(const theory::SynthConfig& cfg, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("test fraction must lie in (0, 1)");
  const auto instances = theory::synth_instances(cfg);
  Dataset train, test;
  train.scale = test.scale = theory::synth_scale(cfg);
  train.dimension_names = test.dimension_names = train.scale.dimension_names();
  for (const Label label : {Label::Human, Label::Llm}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < instances.size(); ++i)
      if (instances[i].label == label) idx.push_back(i);
    if (idx.size() < 2) throw InputError("need at least 2 instances per label to split");
    CounterRng rng(cfg.seed, 32 + static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size()))), 1, idx.size() - 1);
    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    const auto add = [&](Dataset& ds, const std::vector<std::size_t>& which) {
      for (std::size_t i : which) {
        JudgmentGroup g;
        g.group_id = instances[i].instance.candidate.id;
        g.label = label;
        g.judge_id = instances[i].judge_id;
        g.instances.push_back(instances[i].instance);
        ds.groups.push_back(std::move(g));
      }
    };
    add(train, train_idx);
    add(test, test_idx);
  }
  return {std::move(train), std::move(test)};
}

SynthSplit extract_split(const Dataset& train, const Dataset& test, const SynthExtract& options) {
  ExtractOptions ex;
  ex.ablation = options.ablation;
  ex.jobs = options.jobs;
  ex.listwise_items = resolve_listwise_items(train, 0);
  llm::FeatureCache cache;
  std::unique_ptr<llm::StubProvider> judge;
  if (uses_block(options.ablation, Block::Llm)) {
    judge = make_hash_judge();
    ex.provider = judge.get();
    ex.cache = &cache;
    ex.provider_config.model_id = "hash-judge";
    ex.provider_config.backoff_base = std::chrono::milliseconds(0);
  }
  return {extract_matrix(train, ex), extract_matrix(test, ex)};
}

}  // namespace

SynthSplit synth_split(const theory::SynthConfig& cfg, const SynthExtract& options) {
  const auto [train, test] = instance_split(cfg, options.test_fraction);
  return extract_split(train, test, options);
}

SynthSplit synth_split_coarsened(const theory::SynthConfig& cfg, const std::map<int, int>& mapping,
                                 const SynthExtract& options) {
  const auto [train, test] = instance_split(cfg, options.test_fraction);
  return extract_split(coarsen_scale(train, mapping), coarsen_scale(test, mapping), options);
}

double observed_det(double auroc) { return std::max(0.0, 2.0 * auroc - 1.0); }

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.ks.empty()) throw InputError("sweep needs at least one k");
  if (cfg.seeds.empty()) throw InputError("sweep needs at least one seed");
  const std::vector<int> ds = cfg.ds.empty() ? std::vector<int>{cfg.base.d} : cfg.ds;
  const std::vector<double> deltas = cfg.deltas.empty() ? std::vector<double>{cfg.base.target_delta} : cfg.deltas;
  const double S = theory::effective_scale(cfg.base.spec).S;

  std::vector<SweepRow> rows;
  for (const int d : ds)
    for (const double delta : deltas)
      for (const std::uint64_t seed : cfg.seeds) {
        theory::SynthConfig sc = cfg.base;
        sc.d = d;
        sc.target_delta = delta;
        sc.seed = seed;
        const SynthSplit split = synth_split(sc, cfg.extract);
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        tc.jobs = cfg.extract.jobs;
        const Model model = train_model(split.train, tc);
        for (const int k : cfg.ks) {
          const auto groups = score_groups(model, regroup_matrix(split.test, k, seed), model.tau, cfg.extract.jobs);
          const RunMetrics m = evaluate_scores(groups, model.tau, seed);
          SweepRow r;
          r.m = k;
          r.d = d;
          r.S = S;
          r.delta = delta;
          r.auroc_observed = m.auroc;
          r.f1_observed = m.f1;
          r.seed = seed;
          rows.push_back(r);
        }
      }

  std::vector<theory::BetaPoint> points;
  for (const auto& r : rows) points.push_back({r.m, r.d, r.S, r.delta, observed_det(r.auroc_observed)});
  double beta = 0.0;
  try {
    beta = theory::fit_beta(points);
  } catch (const InputError&) {
    beta = 0.0;  // nothing usable, e.g. an all-zero delta grid
  }
  for (auto& r : rows) {
    r.beta_hat = beta;
    r.det_predicted = beta > 0 ? theory::detectability_index(beta, r.m, r.d, r.S, r.delta) : 0.0;
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "m,d,S,delta,beta_hat,det_predicted,auroc_observed,f1_observed,seed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%llu\n", r.m, r.d, r.S, r.delta, r.beta_hat,
                  r.det_predicted, r.auroc_observed, r.f1_observed, static_cast<unsigned long long>(r.seed));
    out += buf;
  }
  return out;
}

}  // namespace judgekit
