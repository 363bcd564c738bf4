#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "judgekit/classifiers.hpp"
#include "judgekit/error.hpp"
#include "judgekit/rng.hpp"
#include "support.hpp"

using namespace judgekit;

namespace {

TrainingData random_problem(CounterRng& rng, std::size_t n, std::size_t d) {
  TrainingData data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.normal();
    data.x.push_back(x);
    data.y.push_back(static_cast<int>(rng.below(2)));
  }
  return data;
}

// Two Gaussian blobs separated along (1, 1).
TrainingData separable(std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed);
  TrainingData data;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double shift = y ? 3.0 : -3.0;
    data.x.push_back({shift + 0.5 * rng.normal(), shift + 0.5 * rng.normal()});
    data.y.push_back(y);
  }
  return data;
}

FeatureMatrix to_matrix(const TrainingData& data) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < data.x[0].size(); ++j) names.push_back("base.f" + std::to_string(j));
  FeatureMatrix m;
  m.schema = make_schema(names, {}, {}, Ablation::BaseOnly);
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    m.rows.push_back({data.x[i], std::vector<unsigned char>(data.x[i].size(), 1)});
    m.group_ids.push_back("g" + std::to_string(i));
    m.labels.push_back(data.y[i] ? Label::Llm : Label::Human);
  }
  return m;
}

double accuracy(const TrainingData& data, const auto& predict) {
  double ok = 0;
  for (std::size_t i = 0; i < data.x.size(); ++i) ok += (predict(data.x[i]) >= 0.0) == (data.y[i] == 1);
  return ok / static_cast<double>(data.x.size());
}

TrainConfig small_forest(std::uint64_t seed = 0) {
  TrainConfig c;
  c.kind = ModelKind::Forest;
  c.n_trees = 25;
  c.max_depth = 5;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("classifiers") {
  TEST_CASE("first logistic gradient by hand") {
    TrainingData one{{{1.0}}, {1}};
    const std::vector<double> w{0.0};
    const auto e = logistic_objective(one, w, 0.0, 0.0);
    CHECK(e.grad_w[0] == doctest::Approx(-0.5));
    CHECK(e.grad_b == doctest::Approx(-0.5));
    CHECK(e.loss == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("logistic gradient matches central differences") {
    CounterRng rng(11);
    const double h = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 1 + rng.below(5), n = 2 + rng.below(20);
      const auto data = random_problem(rng, n, d);
      std::vector<double> w(d);
      for (auto& v : w) v = rng.normal();
      const double b = rng.normal(), lambda = rng.uniform() * 0.1;
      const auto e = logistic_objective(data, w, b, lambda);
      for (std::size_t j = 0; j <= d; ++j) {
        auto wp = w, wm = w;
        double bp = b, bm = b;
        if (j < d) {
          wp[j] += h;
          wm[j] -= h;
        } else {
          bp += h;
          bm -= h;
        }
        const double fd =
            (logistic_objective(data, wp, bp, lambda).loss - logistic_objective(data, wm, bm, lambda).loss) / (2 * h);
        const double analytic = j < d ? e.grad_w[j] : e.grad_b;
        CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(std::abs(analytic), 1e-3));
      }
    }
  }

  TEST_CASE("huge l2 drives weights to zero") {
    TrainConfig c;
    c.kind = ModelKind::Logistic;
    c.l2_lambda = 1e6;
    c.learning_rate = 1e-7;
    c.epochs = 200;
    const auto m = train_logistic(separable(1, 200), c);
    double norm = 0;
    for (double w : m.weights) norm += w * w;
    CHECK(std::sqrt(norm) < 1e-3);
  }

  TEST_CASE("separable data is learned") {
    const auto data = separable(2, 200);
    TrainConfig c;
    c.kind = ModelKind::Logistic;
    const auto m = train_logistic(data, c);
    CHECK(accuracy(data, [&](const auto& x) { return predict_logistic(m, x); }) >= 0.99);
  }

  TEST_CASE("loss is non-increasing at a small learning rate") {
    CounterRng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      const auto data = random_problem(rng, 30, 3);
      TrainConfig c;
      c.kind = ModelKind::Logistic;
      c.learning_rate = 0.01;
      c.epochs = 100;
      std::vector<double> trace;
      train_logistic(data, c, &trace);
      CHECK(trace.size() == 101);
      for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
    }
  }

  TEST_CASE("logistic prediction") {
    LogisticModel m{{1.0, -1.0}, 0.5, 0.0};
    CHECK(predict_logistic(m, std::vector<double>{2.0, 1.0}) == 1.5);
    LogisticModel zero{{0.0, 0.0}, 0.0, 0.0};
    CHECK(predict_logistic(zero, std::vector<double>{7.0, -3.0}) == 0.0);
  }

  TEST_CASE("forest on XOR") {
    TrainingData xor_data{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}};
    TrainConfig c;
    c.n_trees = 50;
    c.max_depth = 2;
    c.min_leaf = 1;
    c.feature_subsample = 1.0;
    c.row_subsample = 1.0;
    const auto f = train_forest(xor_data, c);
    CHECK(f.trees.size() == 50);
    CHECK(accuracy(xor_data, [&](const auto& x) { return predict_forest(f, x); }) == 1.0);
  }

  TEST_CASE("pure nodes become leaves") {
    TrainingData data{{{0}, {1}, {2}, {10}, {11}, {12}}, {0, 0, 0, 1, 1, 1}};
    TrainConfig c;
    c.n_trees = 1;
    c.min_leaf = 1;
    c.feature_subsample = 1.0;
    const auto f = train_forest(data, c);
    for (const auto& node : f.trees[0].nodes)
      if (node.feature >= 0) {
        CHECK(f.trees[0].nodes[node.left].feature == -1);
        CHECK(f.trees[0].nodes[node.right].feature == -1);
      }
    CHECK(f.importance == std::vector<double>{1.0});
  }

  TEST_CASE("forest is deterministic across seeds and thread counts") {
    const auto data = separable(3, 120);
    auto c = small_forest(9);
    const auto a = train_forest(data, c);
    c.jobs = 4;
    const auto b = train_forest(data, c);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) CHECK(a.trees[t] == b.trees[t]);
    CHECK(a.importance == b.importance);
    c.seed = 10;
    CHECK_FALSE(train_forest(data, c).trees == a.trees);
  }

  TEST_CASE("forest prediction is the mean of leaf values") {
    TreeEnsemble f;
    f.trees = {Tree{{TreeNode{-1, 0, -1, -1, 0.4}}}, Tree{{TreeNode{-1, 0, -1, -1, -0.2}}}};
    CHECK(predict_forest(f, std::vector<double>{1.0}) == doctest::Approx(0.1).epsilon(1e-15));
    Tree stump{{TreeNode{0, 0.5, 1, 2, 0}, TreeNode{-1, 0, -1, -1, -1.0}, TreeNode{-1, 0, -1, -1, 2.0}}};
    CHECK(predict_tree(stump, std::vector<double>{0.2}) == -1.0);
    CHECK(predict_tree(stump, std::vector<double>{0.9}) == 2.0);
  }

  TEST_CASE("leaf values are smoothed log-odds") {
    TrainingData data{{{0}, {0}, {1}, {1}}, {0, 0, 1, 1}};
    TrainConfig c;
    c.n_trees = 1;
    c.min_leaf = 1;
    c.feature_subsample = 1.0;
    const auto f = train_forest(data, c);
    for (const auto& node : f.trees[0].nodes)
      if (node.feature == -1) {
        const double pure = std::log((1.0 + kLeafEpsilon) / kLeafEpsilon);
        CHECK(std::abs(std::abs(node.value) - pure) < 1e-9);
      }
  }

  TEST_CASE("trees ignore monotone feature transforms") {
    CounterRng rng(6);
    TrainingData data;
    for (int i = 0; i < 150; ++i) {
      const double a = rng.normal(), b = rng.normal();
      data.x.push_back({a, b});
      data.y.push_back(a + 0.3 * b + 0.4 * rng.normal() > 0 ? 1 : 0);
    }
    TrainingData cubed = data;
    for (auto& x : cubed.x) x[0] = x[0] * x[0] * x[0];
    const auto c = small_forest(2);
    const auto f = train_forest(data, c), g = train_forest(cubed, c);
    for (std::size_t i = 0; i < data.x.size(); ++i)
      CHECK((predict_forest(f, data.x[i]) >= 0) == (predict_forest(g, cubed.x[i]) >= 0));
  }

  TEST_CASE("logistic decisions survive affine rescaling") {
    const auto data = separable(12, 100);
    TrainingData scaled = data;
    for (auto& x : scaled.x) {
      x[0] = 4.0 * x[0] - 7.0;
      x[1] = 0.25 * x[1] + 100.0;
    }
    TrainConfig c;
    c.kind = ModelKind::Logistic;
    const Model a = train_model(to_matrix(data), c), b = train_model(to_matrix(scaled), c);
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      const auto va = to_matrix(data).rows[i], vb = to_matrix(scaled).rows[i];
      CHECK((a.predict_logit(va) >= 0) == (b.predict_logit(vb) >= 0));
    }
  }

  TEST_CASE("training preconditions") {
    auto m = to_matrix(separable(1, 10));
    TrainConfig c;
    c.kind = ModelKind::Logistic;
    auto one_class = m;
    for (auto& l : one_class.labels) l = Label::Human;
    CHECK_THROWS_AS(train_model(one_class, c), InputError);
    auto unknown = m;
    unknown.labels[0] = Label::Unknown;
    CHECK_THROWS_AS(train_model(unknown, c), InputError);
    auto nan = m;
    nan.rows[0].values[0] = std::nan("");
    CHECK_THROWS_AS(train_model(nan, c), InputError);
    c.n_trees = 0;
    c.kind = ModelKind::Forest;
    CHECK_THROWS_AS(c.validate(), InputError);
  }

  TEST_CASE("importance ordering") {
    Model m;
    m.kind = ModelKind::Logistic;
    m.schema = make_schema({"base.a", "base.b", "base.c"}, {}, {}, Ablation::BaseOnly);
    m.logistic.weights = {0.1, -2.0, 0.5};
    auto imp = feature_importance(m);
    CHECK(imp[0].index == 1);
    CHECK(imp[1].index == 2);
    CHECK(imp[2].index == 0);
    CHECK(imp[0].value == -2.0);

    m.logistic.weights = {0, 0, 0};
    imp = feature_importance(m);
    for (std::size_t i = 0; i < 3; ++i) CHECK(imp[i].index == i);

    const Model f = train_model(to_matrix(separable(5, 80)), small_forest());
    double sum = 0;
    for (const auto& i : feature_importance(f)) sum += i.value;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  TEST_CASE("model file round-trip is bit-exact") {
    jk_test::TempDir dir("model");
    const auto matrix = to_matrix(separable(8, 80));
    for (const auto kind : {ModelKind::Logistic, ModelKind::Forest}) {
      CAPTURE(to_string(kind));
      TrainConfig c = small_forest(3);
      c.kind = kind;
      Model m = train_model(matrix, c);
      m.tau = 0.125;
      save_model(m, dir / "m.json");
      const Model back = load_model(dir / "m.json");
      CHECK(back.tau == 0.125);
      CHECK(model_to_json(back) == model_to_json(m));
      CounterRng rng(1);
      for (int i = 0; i < 100; ++i) {
        FeatureVector v{{rng.normal() * 5, rng.normal() * 5}, {1, static_cast<unsigned char>(i % 7 ? 1 : 0)}};
        CHECK(back.predict_logit(v) == m.predict_logit(v));
      }
    }
  }

  TEST_CASE("model file guards") {
    const Model m = train_model(to_matrix(separable(8, 40)), small_forest());
    auto j = nlohmann::json::parse(model_to_json(m));
    j["format_version"] = kModelFormatVersion + 1;
    try {
      model_from_json(j.dump());
      FAIL("expected a version error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
    j = nlohmann::json::parse(model_to_json(m));
    j["schema_hash"] = std::string(64, '0');
    CHECK_THROWS_AS(model_from_json(j.dump()), InputError);
    CHECK_THROWS_AS(model_from_json("{}"), InputError);

    auto other = make_schema({"base.f0", "base.zz"}, {}, {}, Ablation::BaseOnly);
    CHECK_THROWS_AS(check_schema(m, other), InputError);
    CHECK_NOTHROW(check_schema(m, m.schema));
  }

  TEST_CASE("forest imputes absent values with the training mean") {
    auto matrix = to_matrix(separable(8, 60));
    const Model m = train_model(matrix, small_forest());
    CHECK_FALSE(m.standardized);
    const auto prepared = m.prepare(FeatureVector{{123.0, 1.0}, {0, 1}});
    CHECK(prepared[0] == m.standardizer.mean[0]);
    CHECK(prepared[1] == 1.0);
  }
}
