#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "judgekit/classifiers.hpp"
#include "judgekit/features.hpp"
#include "judgekit/pipeline.hpp"
#include "judgekit/theory.hpp"

namespace judgekit {

/// Offline stand-in for a judge model on synthetic corpora: answers every
/// prompt with well-formed JSON whose scores depend only on a hash of the
/// prompt, so the LLM block carries no label signal.
std::unique_ptr<llm::StubProvider> make_hash_judge();

/// Synthetic instances split per label into train and test at instance
/// level, extracted once. Each training instance is its own group.
struct SynthSplit {
  FeatureMatrix train;
  FeatureMatrix test;
};

struct SynthExtract {
  Ablation ablation = Ablation::BaseLing;
  double test_fraction = 0.5;
  int jobs = 1;
};

SynthSplit synth_split(const theory::SynthConfig& cfg, const SynthExtract& options);

/// Same split after mapping every score through `mapping` (see coarsen_scale).
SynthSplit synth_split_coarsened(const theory::SynthConfig& cfg, const std::map<int, int>& mapping,
                                 const SynthExtract& options);

struct SweepConfig {
  theory::SynthConfig base;
  std::vector<int> ks = {1, 2, 4, 8, 16};
  std::vector<int> ds;           // empty: base.d only
  std::vector<double> deltas;    // empty: base.target_delta only
  std::vector<std::uint64_t> seeds = {0};
  TrainConfig train{ModelKind::Logistic};
  SynthExtract extract;
};

struct SweepRow {
  int m = 1;
  int d = 1;
  double S = 0.0;
  double delta = 0.0;
  double beta_hat = 0.0;
  double det_predicted = 0.0;
  double auroc_observed = 0.0;
  double f1_observed = 0.0;
  std::uint64_t seed = 0;
};

/// Observed detectability of a group AUROC: max(0, 2 * AUROC - 1).
double observed_det(double auroc);

/// For each (d, delta, seed): synthesize, split, train once, then score the
/// test instances regrouped at every k. beta is fit over all rows and used
/// for det_predicted.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace judgekit
