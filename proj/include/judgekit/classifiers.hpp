#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "judgekit/features.hpp"

namespace judgekit {

enum class ModelKind { Logistic, Forest };
std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct TrainConfig {
  ModelKind kind = ModelKind::Forest;
  // Logistic.
  double learning_rate = 0.1;
  int epochs = 500;
  double l2_lambda = 1e-3;
  // Forest.
  int n_trees = 200;
  int max_depth = 8;
  int min_leaf = 2;
  /// Fraction of features tried per split; 0 means sqrt(d)/d.
  double feature_subsample = 0.0;
  double row_subsample = 1.0;
  bool standardize_forest = false;

  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

/// Dense training data: X row-major, y in {0, 1}.
struct TrainingData {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
};

struct LogisticEval {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

/// Mean log-loss + (lambda / 2) * |w|^2 and its gradient.
LogisticEval logistic_objective(const TrainingData& data, std::span<const double> w, double b, double lambda);

/// Full-batch gradient descent from zero weights. `loss_trace`, if given,
/// receives the objective before each epoch and after the last.
LogisticModel train_logistic(const TrainingData& data, const TrainConfig& cfg,
                             std::vector<double>* loss_trace = nullptr);
double predict_logistic(const LogisticModel& model, std::span<const double> x);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;  // leaf log-odds
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  bool operator==(const Tree&) const = default;
};

struct TreeEnsemble {
  std::vector<Tree> trees;
  /// Gini decrease per feature, normalized to sum 1.
  std::vector<double> importance;
};

inline constexpr double kLeafEpsilon = 1e-6;

TreeEnsemble train_forest(const TrainingData& data, const TrainConfig& cfg);
double predict_tree(const Tree& tree, std::span<const double> x);
double predict_forest(const TreeEnsemble& forest, std::span<const double> x);

/// A trained detector with everything needed to apply it to new rows.
struct Model {
  ModelKind kind = ModelKind::Forest;
  FeatureSchema schema;
  Standardizer standardizer;
  bool standardized = true;
  TrainConfig config;
  double tau = 0.0;
  LogisticModel logistic;
  TreeEnsemble forest;

  /// Row as the learner sees it: standardized, or raw with absent values
  /// replaced by the training mean.
  std::vector<double> prepare(const FeatureVector& v) const;
  double predict_logit(const FeatureVector& v) const;
};

/// Rows with Unknown labels are rejected; both classes must be present.
Model train_model(const FeatureMatrix& matrix, const TrainConfig& cfg);

/// Throws InputError unless `schema` matches the model's schema.
void check_schema(const Model& model, const FeatureSchema& schema);

struct Importance {
  std::string name;
  Block block = Block::Base;
  /// Signed coefficient (logistic) or normalized Gini importance (forest).
  double value = 0.0;
  std::size_t index = 0;
};

/// Descending by |value|, ties in schema order.
std::vector<Importance> feature_importance(const Model& model);

inline constexpr int kModelFormatVersion = 1;

/// Canonical JSON: sorted keys, shortest round-trip floats.
std::string model_to_json(const Model& model);
Model model_from_json(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace judgekit
