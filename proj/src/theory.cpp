#include "judgekit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "judgekit/error.hpp"

namespace judgekit::theory {

void JudgmentSpecTheory::validate() const {
  switch (type) {
    case JudgmentType::Pointwise:
      if (L < 2) throw InputError("pointwise spec needs L >= 2");
      break;
    case JudgmentType::Pairwise:
      if (x < 1) throw InputError("pairwise spec needs x >= 1");
      break;
    case JudgmentType::Listwise:
      if (k_items < 2) throw InputError("listwise spec needs k_items >= 2");
      break;
  }
}

int JudgmentSpecTheory::outcomes() const {
  validate();
  switch (type) {
    case JudgmentType::Pointwise: return L;
    case JudgmentType::Pairwise: return 2 * x + 1;
    case JudgmentType::Listwise: {
      if (k_items > 12) throw InputError("k_items too large to enumerate rankings");
      int f = 1;
      for (int i = 2; i <= k_items; ++i) f *= i;
      return f;
    }
  }
  return 0;
}

EffectiveScale effective_scale(const JudgmentSpecTheory& spec) {
  spec.validate();
  switch (spec.type) {
    case JudgmentType::Pointwise: return {static_cast<double>(spec.L), std::log(static_cast<double>(spec.L))};
    case JudgmentType::Pairwise: {
      const double s = 2.0 * spec.x + 1.0;
      return {s, std::log(s)};
    }
    case JudgmentType::Listwise: {
      const int k = spec.k_items;
      if (k <= 20) {
        std::uint64_t f = 1;
        for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
        const double s = static_cast<double>(f);
        return {s, std::log(s)};
      }
      const double kd = static_cast<double>(k);
      const double log_s = spec.use_stirling ? kd * std::log(kd) - kd : std::lgamma(kd + 1.0);
      return {std::exp(log_s), log_s};
    }
  }
  return {};
}

double effective_budget_log(int m, int d, double log_S) {
  if (m < 1) throw InputError("group size m must be >= 1");
  if (d < 1) throw InputError("dimension count d must be >= 1");
  if (!(log_S >= std::log(2.0)) || !std::isfinite(log_S)) throw InputError("effective scale must be >= 2");
  return static_cast<double>(m) * static_cast<double>(d) * log_S;
}

double effective_budget(int m, int d, double S) {
  if (!(S >= 2.0)) throw InputError("effective scale must be >= 2");
  return effective_budget_log(m, d, std::log(S));
}

double effective_budget(std::span<const BudgetTerm> terms) {
  if (terms.empty()) throw InputError("mixed budget needs at least one term");
  double sum = 0.0;
  for (const auto& t : terms) sum += effective_budget_log(t.m, t.d, t.log_S);
  return sum;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw InputError("distributions must share a non-empty support");
  double sp = 0, sq = 0, l1 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) throw InputError("negative probability");
    sp += p[i];
    sq += q[i];
    l1 += std::fabs(p[i] - q[i]);
  }
  if (std::fabs(sp - 1.0) > 1e-9 || std::fabs(sq - 1.0) > 1e-9) throw InputError("distribution does not sum to 1");
  return std::min(1.0, 0.5 * l1);
}

TvEstimate estimate_tv(const std::vector<std::vector<double>>& human, const std::vector<std::vector<double>>& llm,
                       const std::vector<double>& grid) {
  if (human.empty() || llm.empty()) throw InputError("TV estimation needs samples on both sides");
  if (grid.empty()) throw InputError("TV estimation needs a grid");
  const std::size_t d = human.front().size();
  if (d == 0) throw InputError("samples have no dimensions");
  std::map<double, std::size_t> slot;
  for (std::size_t i = 0; i < grid.size(); ++i) slot.emplace(grid[i], i);

  const auto histogram = [&](const std::vector<std::vector<double>>& samples, std::size_t dim) {
    std::vector<double> h(grid.size(), 0.0);
    for (const auto& s : samples) {
      if (s.size() != d) throw InputError("samples differ in dimension count");
      const auto it = slot.find(s[dim]);
      if (it == slot.end()) throw InputError("score " + std::to_string(s[dim]) + " is off the grid");
      h[it->second] += 1.0;
    }
    for (double& v : h) v /= static_cast<double>(samples.size());
    return h;
  };

  TvEstimate est;
  for (std::size_t dim = 0; dim < d; ++dim) {
    const auto ph = histogram(human, dim);
    const auto pm = histogram(llm, dim);
    double l1 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) l1 += std::fabs(ph[i] - pm[i]);
    est.per_dimension.push_back(0.5 * l1);
  }
  est.mean = std::accumulate(est.per_dimension.begin(), est.per_dimension.end(), 0.0) / static_cast<double>(d);
  return est;
}

TvEstimate estimate_tv(const std::vector<std::vector<double>>& human, const std::vector<std::vector<double>>& llm,
                       const JudgmentSpecTheory& spec) {
  std::vector<double> grid;
  const int n = spec.outcomes();
  const int offset = spec.type == JudgmentType::Pairwise ? -spec.x : 0;
  for (int i = 0; i < n; ++i) grid.push_back(static_cast<double>(i + offset));
  return estimate_tv(human, llm, grid);
}

int discretize(double value, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw InputError("invalid binning");
  if (!(value >= lo && value <= hi)) throw InputError("value outside the binning range");
  const int b = static_cast<int>((value - lo) / (hi - lo) * bins);
  return std::min(b, bins - 1);
}

double detectability_index_log(double beta, int m, int d, double log_S, double delta) {
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("delta must lie in [0, 1]");
  return -std::expm1(-beta * effective_budget_log(m, d, log_S) * delta * delta);
}

double detectability_index(double beta, int m, int d, double S, double delta) {
  if (!(S >= 2.0)) throw InputError("effective scale must be >= 2");
  return detectability_index_log(beta, m, d, std::log(S), delta);
}

double fit_beta(std::span<const BetaPoint> points) {
  double sxy = 0.0, sxx = 0.0;
  std::size_t used = 0;
  for (const auto& p : points) {
    if (!(p.observed_det > 0.0 && p.observed_det < 1.0) || !(p.delta > 0.0)) continue;
    const double x = effective_budget(p.m, p.d, p.S) * p.delta * p.delta;
    const double y = -std::log1p(-p.observed_det);
    sxy += x * y;
    sxx += x * x;
    ++used;
  }
  if (used == 0) throw InputError("no usable points for beta (need det in (0,1) and delta > 0)");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Pmf construction

double max_transfer(int levels) {
  if (levels < 2) throw InputError("grid needs at least 2 levels");
  return static_cast<double>(levels / 2) / static_cast<double>(levels);
}

std::pair<std::vector<double>, std::vector<double>> synth_pmfs(int levels, double delta) {
  if (levels < 2) throw InputError("grid needs at least 2 levels");
  const double cap = max_transfer(levels);
  if (!(delta >= 0.0) || delta > cap + 1e-12)
    throw InputError("target delta " + std::to_string(delta) + " not realizable on " + std::to_string(levels) +
                     " levels (max " + std::to_string(cap) + ")");
  delta = std::min(delta, cap);
  const std::vector<double> human(static_cast<std::size_t>(levels), 1.0 / levels);
  std::vector<double> llm = human;
  if (delta == 0.0) return {human, llm};

  const double center = (levels - 1) / 2.0;
  const int half = levels / 2;  // levels strictly below (and above) the center
  // Removal weights grow toward the bottom. Water-fill: r_i = min(h_i, t w_i)
  // with t chosen so the removals sum to delta.
  std::vector<double> w(static_cast<std::size_t>(half));
  for (int i = 0; i < half; ++i) w[static_cast<std::size_t>(i)] = center - i;
  std::vector<int> order(static_cast<std::size_t>(half));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
  // Levels saturate in order of decreasing weight (all h_i are equal).
  double saturated = 0.0, free_weight = std::accumulate(w.begin(), w.end(), 0.0);
  double t = 0.0;
  std::size_t n_sat = 0;
  for (; n_sat < order.size(); ++n_sat) {
    const double wi = w[order[n_sat]];
    const double t_sat = human[0] / wi;
    if (saturated + t_sat * free_weight >= delta) break;
    saturated += human[0];
    free_weight -= wi;
  }
  t = free_weight > 0 ? (delta - saturated) / free_weight : 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const int i = order[j];
    llm[static_cast<std::size_t>(i)] -= j < n_sat ? human[0] : std::min(human[0], t * w[i]);
  }
  // Addition weights grow toward the top.
  double add_total = 0.0;
  for (int j = levels - half; j < levels; ++j) add_total += j - center;
  for (int j = levels - half; j < levels; ++j) llm[static_cast<std::size_t>(j)] += delta * (j - center) / add_total;
  for (double& p : llm) p = std::max(0.0, p);
  return {human, llm};
}

// ---------------------------------------------------------------------------
// Permutations

std::vector<int> permutation_at(int k, std::uint64_t index) {
  std::vector<int> pool(static_cast<std::size_t>(k));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::uint64_t> fact(static_cast<std::size_t>(k) + 1, 1);
  for (int i = 1; i <= k; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  if (index >= fact[static_cast<std::size_t>(k)]) throw InputError("permutation index out of range");
  std::vector<int> perm;
  for (int i = k; i >= 1; --i) {
    const std::uint64_t f = fact[static_cast<std::size_t>(i) - 1];
    const std::size_t pick = static_cast<std::size_t>(index / f);
    index %= f;
    perm.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return perm;
}

std::uint64_t permutation_index(std::span<const int> perm) {
  const std::size_t k = perm.size();
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < k; ++j)
      if (perm[j] < perm[i]) ++smaller;
    index = index * (k - i) + smaller;
  }
  return index;
}

}  // namespace judgekit::theory
