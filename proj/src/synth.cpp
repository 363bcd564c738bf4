#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "judgekit/error.hpp"
#include "judgekit/parallel.hpp"
#include "judgekit/rng.hpp"
#include "judgekit/theory.hpp"

namespace judgekit::theory {

namespace {

// Two registers per pool: plain and elaborate wording. A response keeps one
// register, so character counts vary at fixed word counts.
constexpr std::array kSubjects = {"the answer", "this reply", "the method", "the model", "the plan",
                                  "the explanation", "the methodology", "the demonstration",
                                  "the implementation", "the investigation"};
constexpr std::array kVerbs = {"shows", "gives", "tests", "fixes", "builds",
                               "demonstrates", "investigates", "establishes", "characterizes", "substantiates"};
constexpr std::array kAdjectives = {"clear", "small", "good", "broad", "basic",
                                    "comprehensive", "sophisticated", "considerable", "fundamental", "substantial"};
constexpr std::array kNouns = {"case", "data", "idea", "point", "step",
                               "relationship", "requirement", "consideration", "architecture", "interpretation"};
constexpr std::array kAdverbs = {"fast", "well", "fully", "today", "now",
                                 "systematically", "comprehensively", "considerably", "particularly", "thoroughly"};
constexpr std::array kDecoys = {"however", "moreover", "perhaps", "possibly", "generally", "therefore",
                                "furthermore", "likely"};

template <std::size_t N>
const char* pick(CounterRng& rng, const std::array<const char*, N>& pool) {
  return pool[rng.below(N)];
}

template <std::size_t N>
const char* pick_register(CounterRng& rng, const std::array<const char*, N>& pool, bool elaborate) {
  const std::size_t half = N / 2;
  return pool[(elaborate ? half : 0) + rng.below(half)];
}

void split_words(const std::string& phrase, std::vector<std::string>& out) {
  std::size_t pos = 0;
  while (pos < phrase.size()) {
    const std::size_t end = std::min(phrase.find(' ', pos), phrase.size());
    out.push_back(phrase.substr(pos, end - pos));
    pos = end + 1;
  }
}

std::vector<std::string> sentence_words(CounterRng& rng, double noise, bool elaborate) {
  std::vector<std::string> w;
  if (rng.uniform() < std::min(1.0, 0.25 * noise)) w.push_back(pick(rng, kDecoys));
  split_words(pick_register(rng, kSubjects, elaborate), w);
  w.push_back(pick_register(rng, kVerbs, elaborate));
  w.push_back("the");
  w.push_back(pick_register(rng, kAdjectives, elaborate));
  w.push_back(pick_register(rng, kNouns, elaborate));
  const std::uint64_t shape = rng.below(4);
  if (shape >= 1) w.push_back(pick_register(rng, kAdverbs, elaborate));
  if (shape >= 2) {
    w.push_back("and");
    w.push_back(pick_register(rng, kVerbs, elaborate));
    w.push_back("each");
    w.push_back(pick_register(rng, kNouns, elaborate));
  }
  return w;
}

/// u in [0, 1] sets the word count through length_bias; sentences are cut
/// to land exactly on it.
std::string response_text(CounterRng& rng, double u, const SynthConfig& cfg) {
  const int budget = 12 + static_cast<int>(std::lround(cfg.length_bias * 36.0 * u)) + static_cast<int>(rng.below(9));
  const bool elaborate = rng.uniform() < 0.5;
  std::string text;
  int used = 0;
  while (used < budget) {
    auto words = sentence_words(rng, cfg.noise, elaborate);
    words.resize(std::min<std::size_t>(words.size(), static_cast<std::size_t>(budget - used)));
    used += static_cast<int>(words.size());
    std::string s;
    for (std::size_t i = 0; i < words.size(); ++i) s += (i ? " " : "") + words[i];
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    if (!text.empty()) text += ' ';
    text += s + ".";
  }
  return text;
}

int levels_of(const JudgmentSpecTheory& spec) { return spec.outcomes(); }

}  // namespace

void SynthConfig::validate() const {
  spec.validate();
  if (d < 1) throw InputError("synthetic d must be >= 1");
  if (spec.type != JudgmentType::Pointwise && d != 1) throw InputError("only pointwise corpora support d > 1");
  if (n_instances < 1) throw InputError("n_instances must be >= 1");
  if (k < 1) throw InputError("k must be >= 1");
  if (!(noise >= 0.0)) throw InputError("noise must be >= 0");
  if (!(length_bias >= 0.0)) throw InputError("length_bias must be >= 0");
  const int levels = levels_of(spec);
  if (!(target_delta >= 0.0) || target_delta > max_transfer(levels) + 1e-12)
    throw InputError("target delta " + std::to_string(target_delta) + " not realizable on " +
                     std::to_string(levels) + " levels (max " + std::to_string(max_transfer(levels)) + ")");
}

ScaleSpec synth_scale(const SynthConfig& cfg) {
  ScaleSpec s;
  switch (cfg.spec.type) {
    case JudgmentType::Pointwise:
      for (int i = 1; i <= cfg.d; ++i) s.dimensions.push_back({"dim" + std::to_string(i), 0, cfg.spec.L - 1, 1});
      break;
    case JudgmentType::Pairwise:
      s.pair_levels_x = cfg.spec.x;
      break;
    case JudgmentType::Listwise:
      s.dimensions.push_back({"relevance", 1, cfg.spec.k_items, 1});
      s.listwise_items = cfg.spec.k_items;
      break;
  }
  return s;
}

std::vector<LabeledInstance> synth_instances(const SynthConfig& cfg) {
  cfg.validate();
  const int levels = levels_of(cfg.spec);
  const auto [human_pmf, llm_pmf] = synth_pmfs(levels, cfg.target_delta);
  const ScaleSpec scale = synth_scale(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.n_instances);
  std::vector<LabeledInstance> out(2 * n);

  parallel_for(out.size(), 1, [&](std::size_t idx) {
    const bool is_llm = idx >= n;
    const std::size_t i = is_llm ? idx - n : idx;
    const Label label = is_llm ? Label::Llm : Label::Human;
    CounterRng rng(cfg.seed, ((static_cast<std::uint64_t>(label) + 1) << 32) | i);
    const auto& pmf = is_llm ? llm_pmf : human_pmf;
    // Humans write at a length unrelated to their score: an independent
    // draw from the same human pmf sets it.
    const auto length_level = [&](std::size_t score_level) -> double {
      const std::size_t level = is_llm ? score_level : rng.categorical(human_pmf);
      return static_cast<double>(level) / static_cast<double>(levels - 1);
    };

    LabeledInstance li;
    li.label = label;
    if (is_llm) li.judge_id = "synthetic-judge";
    Candidate& c = li.instance.candidate;
    c.id = std::string(is_llm ? "m" : "h") + std::to_string(i);
    c.prompt = "Question " + std::to_string(i) + ": describe the " + pick(rng, kAdjectives) + " " +
               pick(rng, kNouns) + ".";

    switch (cfg.spec.type) {
      case JudgmentType::Pointwise: {
        PointwiseScore score;
        double u = 0.0;
        for (int dim = 0; dim < cfg.d; ++dim) {
          const std::size_t level = rng.categorical(pmf);
          score.dims[scale.dimensions[static_cast<std::size_t>(dim)].name] = static_cast<double>(level);
          u += length_level(level);
        }
        c.responses.push_back(response_text(rng, u / cfg.d, cfg));
        li.instance.score = score;
        break;
      }
      case JudgmentType::Pairwise: {
        const std::size_t level = rng.categorical(pmf);
        const double u = length_level(level);
        c.responses.push_back(response_text(rng, 1.0 - u, cfg));
        c.responses.push_back(response_text(rng, u, cfg));
        li.instance.score = PairwiseScore{static_cast<int>(level) - cfg.spec.x};
        break;
      }
      case JudgmentType::Listwise: {
        const int k = cfg.spec.k_items;
        const auto perm = permutation_at(k, rng.categorical(pmf));
        const auto shadow = is_llm ? perm : permutation_at(k, rng.categorical(human_pmf));
        ListwiseScore score;
        score.items.assign(static_cast<std::size_t>(k), 0.0);
        std::vector<double> u(static_cast<std::size_t>(k), 0.0);
        for (int p = 0; p < k; ++p) {
          score.items[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])] = k - p;
          u[static_cast<std::size_t>(shadow[static_cast<std::size_t>(p)])] =
              static_cast<double>(k - 1 - p) / static_cast<double>(k - 1);
        }
        score.ranking = ranking_from_scores(score.items);
        for (int item = 0; item < k; ++item) c.responses.push_back(response_text(rng, u[static_cast<std::size_t>(item)], cfg));
        li.instance.score = score;
        break;
      }
    }
    out[idx] = std::move(li);
  });
  return out;
}

Dataset synth_generate(const SynthConfig& cfg) {
  const auto instances = synth_instances(cfg);
  Dataset ds;
  ds.scale = synth_scale(cfg);
  ds.dimension_names = ds.scale.dimension_names();
  ds.groups = regroup(instances, cfg.k, cfg.seed).groups;
  return ds;
}

}  // namespace judgekit::theory
