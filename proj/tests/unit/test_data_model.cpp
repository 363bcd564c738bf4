#include <algorithm>
#include <set>

#include "doctest.h"
#include "judgekit/data_model.hpp"
#include "judgekit/error.hpp"
#include "judgekit/rng.hpp"
#include "support.hpp"

using namespace judgekit;

namespace {

Dataset small_pointwise(int n_human, int n_llm) {
  Dataset ds;
  ds.scale = jk_test::five_dim_scale();
  ds.dimension_names = ds.scale.dimension_names();
  int id = 0;
  for (const auto& [label, count] : {std::pair{Label::Human, n_human}, std::pair{Label::Llm, n_llm}})
    for (int i = 0; i < count; ++i, ++id) {
      JudgmentGroup g;
      g.group_id = "g" + std::to_string(id);
      g.label = label;
      if (label == Label::Llm) g.judge_id = "judge-a";
      std::map<std::string, double> dims;
      for (std::size_t d = 0; d < ds.dimension_names.size(); ++d)
        dims[ds.dimension_names[d]] = static_cast<double>((id + d) % 5);
      g.instances.push_back(jk_test::pointwise("c" + std::to_string(id), "Answer number " + std::to_string(id) + ".", dims));
      ds.groups.push_back(g);
    }
  return ds;
}

std::vector<LabeledInstance> labeled(int n, Label label) {
  std::vector<LabeledInstance> out;
  for (int i = 0; i < n; ++i) {
    LabeledInstance li;
    li.instance = jk_test::pointwise("i" + std::to_string(i) + to_string(label).data(), "t", {{"Helpfulness", 1}});
    li.label = label;
    out.push_back(li);
  }
  return out;
}

}  // namespace

TEST_SUITE("data_model") {
  TEST_CASE("two-line file round-trips") {
    const Dataset ds = small_pointwise(1, 1);
    const std::string text = dataset_to_jsonl(ds);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    const Dataset back = parse_dataset(text, ds.scale);
    CHECK(back.groups.size() == 2);
    CHECK(back == ds);
  }

  TEST_CASE("round-trip keeps every score bit-exact") {
    ScaleSpec scale;
    scale.dimensions.push_back({"q", -1000, 1000, 1});
    Dataset ds;
    ds.scale = scale;
    ds.dimension_names = {"q"};
    CounterRng rng(5);
    for (int i = 0; i < 50; ++i) {
      JudgmentGroup g;
      g.group_id = "g" + std::to_string(i);
      g.label = i % 3 == 0 ? Label::Unknown : (i % 2 ? Label::Llm : Label::Human);
      const double v = static_cast<double>(static_cast<int>(rng.below(2001)) - 1000);
      g.instances.push_back(jk_test::pointwise("c" + std::to_string(i), "caf\xC3\xA9 \"quoted\"\n", {{"q", v}}));
      ds.groups.push_back(g);
    }
    CHECK(parse_dataset(dataset_to_jsonl(ds), scale) == ds);
  }

  TEST_CASE("scale violation names the dimension") {
    Dataset ds = small_pointwise(1, 0);
    std::string line = group_to_json_line(ds.groups[0]);
    const auto pos = line.find("\"Helpfulness\":");
    REQUIRE(pos != std::string::npos);
    const auto end = line.find_first_of(",}", pos);
    line.replace(pos, end - pos, "\"Helpfulness\":7");
    try {
      parse_dataset(line, ds.scale);
      FAIL("expected a scale violation");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("Helpfulness") != std::string::npos);
    }
  }

  TEST_CASE("empty file is an empty dataset") {
    const Dataset ds = parse_dataset("", jk_test::five_dim_scale());
    CHECK(ds.groups.empty());
  }

  TEST_CASE("malformed line reports its line number") {
    const Dataset ds = small_pointwise(1, 0);
    const std::string text = dataset_to_jsonl(ds) + "{not json\n";
    try {
      parse_dataset(text, ds.scale);
      FAIL("expected a parse error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
  }

  TEST_CASE("off-step value is rejected") {
    ScaleSpec scale;
    scale.dimensions.push_back({"s", 0, 10, 2});
    CHECK_THROWS_AS(validate_instance(jk_test::pointwise("c", "t", {{"s", 3}}), scale, "g"), InputError);
    CHECK_NOTHROW(validate_instance(jk_test::pointwise("c", "t", {{"s", 4}}), scale, "g"));
  }

  TEST_CASE("listwise ranking must match scores") {
    ScaleSpec scale;
    scale.dimensions.push_back({"relevance", 1, 5, 1});
    scale.listwise_items = 3;
    JudgmentInstance inst;
    inst.candidate.id = "c";
    inst.candidate.responses = {"a", "b", "c"};
    inst.score = ListwiseScore{{4, 2, 1}, {0, 1, 2}};
    CHECK_NOTHROW(validate_instance(inst, scale, "g"));
    inst.score = ListwiseScore{{4, 2, 1}, {1, 0, 2}};
    CHECK_THROWS_AS(validate_instance(inst, scale, "g"), InputError);
  }

  TEST_CASE("ranking_from_scores breaks ties by lower index") {
    CHECK(ranking_from_scores({1, 3, 3, 2}) == std::vector<int>{1, 2, 3, 0});
    CHECK(ranking_from_scores({}).empty());
  }

  TEST_CASE("regroup arithmetic") {
    auto r = regroup(labeled(8, Label::Human), 4, 1);
    CHECK(r.groups.size() == 2);
    CHECK(r.dropped == 0);
    CHECK_THROWS_AS(regroup(labeled(3, Label::Human), 4, 1), InputError);
    CHECK_THROWS_AS(regroup(labeled(8, Label::Human), 0, 1), InputError);
    r = regroup(labeled(9, Label::Human), 4, 1);
    CHECK(r.groups.size() == 2);
    CHECK(r.dropped == 1);
    for (const auto& g : r.groups) CHECK(g.instances.size() == 4);
  }

  TEST_CASE("regroup is deterministic and label-pure") {
    auto all = labeled(10, Label::Human);
    const auto llm = labeled(7, Label::Llm);
    all.insert(all.end(), llm.begin(), llm.end());
    const auto a = regroup(all, 3, 9);
    const auto b = regroup(all, 3, 9);
    CHECK(a.groups == b.groups);
    for (const auto& g : a.groups) {
      std::set<std::string> prefixes;
      for (const auto& inst : g.instances) prefixes.insert(inst.candidate.id.substr(inst.candidate.id.size() - 3));
      CHECK(prefixes.size() == 1);
    }
    CHECK(a.dropped == 1 + 1);
  }

  TEST_CASE("regroup then flatten recovers the kept instances once each") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CounterRng rng(seed, 77);
      const int k = 1 + static_cast<int>(rng.below(6));
      const int nh = k + static_cast<int>(rng.below(30)), nl = k + static_cast<int>(rng.below(30));
      auto all = labeled(nh, Label::Human);
      const auto llm = labeled(nl, Label::Llm);
      all.insert(all.end(), llm.begin(), llm.end());
      const auto r = regroup(all, k, seed);
      const auto flat = flatten(r.groups);
      CHECK(flat.size() + r.dropped == all.size());
      std::multiset<std::string> seen, original;
      for (const auto& li : flat) seen.insert(li.instance.candidate.id);
      for (const auto& li : all) original.insert(li.instance.candidate.id);
      for (const auto& id : seen) {
        CHECK(seen.count(id) == 1);
        CHECK(original.count(id) == 1);
      }
      CHECK(r.dropped == static_cast<std::size_t>(nh % k + nl % k));
    }
  }

  TEST_CASE("coarsen_scale maps pairwise levels") {
    Dataset ds;
    ds.scale.pair_levels_x = 3;
    JudgmentGroup g;
    g.group_id = "g";
    g.label = Label::Human;
    JudgmentInstance inst;
    inst.candidate.id = "c";
    inst.candidate.responses = {"a", "b"};
    inst.score = PairwiseScore{-2};
    g.instances.push_back(inst);
    ds.groups.push_back(g);
    const std::map<int, int> m{{-3, -1}, {-2, -1}, {-1, -1}, {0, 0}, {1, 1}, {2, 1}, {3, 1}};
    const Dataset c = coarsen_scale(ds, m);
    CHECK(std::get<PairwiseScore>(c.groups[0].instances[0].score).pair == -1);
    CHECK(c.scale.pair_levels_x == 1);
    // Idempotent because the mapping is the identity on its image.
    CHECK(coarsen_scale(c, {{-1, -1}, {0, 0}, {1, 1}}) == c);
  }

  TEST_CASE("coarsen_scale identity and totality") {
    const Dataset ds = small_pointwise(2, 2);
    const std::map<int, int> identity{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
    CHECK(coarsen_scale(ds, identity) == ds);
    CHECK_THROWS_AS(coarsen_scale(ds, {{0, 0}, {1, 1}, {3, 3}, {4, 4}}), InputError);
  }

  TEST_CASE("coarsen_scale twice equals once for idempotent mappings") {
    const Dataset ds = small_pointwise(3, 3);
    const std::map<int, int> m{{0, 0}, {1, 0}, {2, 2}, {3, 4}, {4, 4}};
    const Dataset once = coarsen_scale(ds, m);
    CHECK(coarsen_scale(once, m).groups == once.groups);
  }

  TEST_CASE("project_dimensions") {
    const Dataset ds = small_pointwise(2, 1);
    const Dataset one = project_dimensions(ds, {"Helpfulness"});
    CHECK(one.dimension_names == std::vector<std::string>{"Helpfulness"});
    CHECK(std::get<PointwiseScore>(one.groups[0].instances[0].score).dims.size() == 1);
    CHECK(project_dimensions(ds, ds.dimension_names) == ds);
    CHECK_THROWS_AS(project_dimensions(ds, {"Nonexistent"}), InputError);
    const std::vector<std::string> a{"Helpfulness", "Coherence", "Verbosity"}, b{"Verbosity", "Helpfulness"};
    CHECK(project_dimensions(project_dimensions(ds, a), b) == project_dimensions(ds, b));
  }

  TEST_CASE("split_dataset stratifies by label") {
    const Dataset ds = small_pointwise(5, 5);
    const auto [train, test] = split_dataset(ds, 0.2, 3);
    int h = 0, l = 0;
    for (const auto& g : test.groups) (g.label == Label::Human ? h : l) += 1;
    CHECK(h == 1);
    CHECK(l == 1);
    CHECK(train.groups.size() == 8);
    const auto again = split_dataset(ds, 0.2, 3);
    CHECK(again.first == train);
    CHECK(again.second == test);
    CHECK_THROWS_AS(split_dataset(small_pointwise(1, 0), 0.5, 0), InputError);
  }

  TEST_CASE("scale file round-trip") {
    ScaleSpec s = jk_test::five_dim_scale();
    s.pair_levels_x = 3;
    CHECK(parse_scale(scale_to_json(s)) == s);
    CHECK_THROWS_AS(parse_scale("{"), InputError);
  }

  TEST_CASE("file round-trip") {
    jk_test::TempDir dir("dm");
    const Dataset ds = small_pointwise(2, 3);
    save_dataset(ds, dir / "d.jsonl");
    save_scale(ds.scale, dir / "s.json");
    CHECK(load_dataset(dir / "d.jsonl", load_scale(dir / "s.json")) == ds);
    CHECK_THROWS_AS(load_dataset(dir / "missing.jsonl", ds.scale), InputError);
  }
}
