#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "judgekit/data_model.hpp"

namespace judgekit::theory {

struct JudgmentSpecTheory {
  JudgmentType type = JudgmentType::Pointwise;
  int L = 0;        // pointwise levels
  int x = 0;        // pairwise superiority levels
  int k_items = 0;  // listwise candidates
  bool use_stirling = false;

  void validate() const;
  /// Outcome count of one judgment on the grid (L, 2x+1 or k!); throws when
  /// it does not fit in an int.
  int outcomes() const;
};

struct EffectiveScale {
  double S = 0.0;  // may be +inf for very large listwise k
  double log_S = 0.0;
};

/// L, 2x+1, or k! (exact up to k = 20, then lgamma or Stirling).
EffectiveScale effective_scale(const JudgmentSpecTheory& spec);

/// n_eff = m * d * ln S.
double effective_budget(int m, int d, double S);
double effective_budget_log(int m, int d, double log_S);

/// One homogeneous part of a mixed-type group.
struct BudgetTerm {
  int m = 1;
  int d = 1;
  double log_S = 0.0;
};
double effective_budget(std::span<const BudgetTerm> terms);

double tv_distance(std::span<const double> p, std::span<const double> q);

struct TvEstimate {
  std::vector<double> per_dimension;
  double mean = 0.0;
};

/// Empirical TV between the histograms of two sample sets. Each sample is a
/// score vector (one entry per dimension); every value must lie on `grid`.
TvEstimate estimate_tv(const std::vector<std::vector<double>>& human, const std::vector<std::vector<double>>& llm,
                       const std::vector<double>& grid);
/// Grid implied by the spec: 0..L-1, -x..x, or permutation indices 0..k!-1.
TvEstimate estimate_tv(const std::vector<std::vector<double>>& human, const std::vector<std::vector<double>>& llm,
                       const JudgmentSpecTheory& spec);
/// Bin index in [0, bins) of a continuous value on [lo, hi].
int discretize(double value, double lo, double hi, int bins);

double detectability_index(double beta, int m, int d, double S, double delta);
double detectability_index_log(double beta, int m, int d, double log_S, double delta);

struct BetaPoint {
  int m = 1;
  int d = 1;
  double S = 2.0;
  double delta = 0.0;
  double observed_det = 0.0;
};

/// Least squares through the origin of -ln(1 - det) on n_eff * delta^2.
/// Points with det outside (0, 1) or delta = 0 are skipped.
double fit_beta(std::span<const BetaPoint> points);

// ---------------------------------------------------------------------------
// Synthetic judgments

/// Mass that can move from the levels below the center to those above it.
double max_transfer(int levels);

/// Uniform human pmf and an LLM pmf at exact TV `delta`: mass leaves the
/// levels below the center (most from the bottom) and lands above it (most
/// at the top); an odd grid's middle level is untouched.
std::pair<std::vector<double>, std::vector<double>> synth_pmfs(int levels, double delta);

struct SynthConfig {
  JudgmentSpecTheory spec{JudgmentType::Pointwise, 5, 0, 0, false};
  int d = 1;
  double target_delta = 0.0;
  int n_instances = 2000;  // per label
  int k = 4;
  std::uint64_t seed = 0;
  /// Decoy phrases (hedges, markers) per response, same for both labels.
  double noise = 1.0;
  /// Strength of the link between an LLM's scores and its response length.
  /// Human lengths follow an independent draw from the human pmf.
  double length_bias = 1.0;

  void validate() const;
};

/// Scale of a synthetic corpus (dimensions dim1..dimd on 0..L-1, pair
/// levels x, or one relevance dimension on 1..k_items).
ScaleSpec synth_scale(const SynthConfig& cfg);

/// Labeled instances in generation order (human first).
std::vector<LabeledInstance> synth_instances(const SynthConfig& cfg);

/// synth_instances regrouped into label-pure groups of k.
Dataset synth_generate(const SynthConfig& cfg);

/// Permutation with lexicographic index `index` among all k! permutations.
std::vector<int> permutation_at(int k, std::uint64_t index);
std::uint64_t permutation_index(std::span<const int> perm);

}  // namespace judgekit::theory
