#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "judgekit/classifiers.hpp"
#include "judgekit/features.hpp"

namespace judgekit {

struct GroupScore {
  std::string group_id;
  std::vector<double> instance_logits;
  double aggregate = 0.0;
  int prediction = 0;
  Label true_label = Label::Unknown;
};

/// Left-to-right sum; throws on an empty list or a non-finite logit.
double aggregate_group(std::span<const double> logits);

/// 1 iff aggregate >= tau (tau lives on the logit scale).
int classify_group(double aggregate, double tau);

/// F1 of the positive (LLM = 1) class; 0 when precision + recall = 0.
double f1_score(std::span<const int> predictions, std::span<const int> labels);

/// Mann-Whitney AUROC with ties counted 1/2, by sorting.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Threshold maximizing F1 over the observed aggregates; ties go to the
/// candidate closest to 0.
double calibrate_tau(std::span<const double> aggregates, std::span<const int> labels);

/// Reassigns the matrix rows to label-pure groups of k with the same
/// shuffle as regroup(); leftovers are dropped.
FeatureMatrix regroup_matrix(const FeatureMatrix& matrix, int k, std::uint64_t seed);

/// Groups rows by group id in first-appearance order and scores each group.
std::vector<GroupScore> score_groups(const Model& model, const FeatureMatrix& matrix, double tau, int jobs = 1);

/// 0/1 labels of groups whose truth is known; throws if any is Unknown.
std::vector<int> known_labels(const std::vector<GroupScore>& groups);

struct RunMetrics {
  std::uint64_t seed = 0;
  double f1 = 0.0;
  double auroc = 0.0;
  std::size_t n_groups = 0;
  double tau = 0.0;
};

struct MetricsReport {
  std::vector<RunMetrics> runs;
  double mean_f1 = 0.0;
  double mean_auroc = 0.0;

  void finalize();
  std::string to_text() const;
  std::string to_csv() const;
  std::string to_json() const;
};

RunMetrics evaluate_scores(const std::vector<GroupScore>& groups, double tau, std::uint64_t seed);

struct DetectionOptions {
  /// Group size for regrouping the test rows; 0 keeps the matrix's groups.
  int k = 4;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::optional<double> tau;  // default: the model's tau
  int jobs = 1;
};

/// Per seed: train with that seed, regroup the test rows with that seed,
/// score and measure. Training rows are used at instance level.
MetricsReport run_detection(const FeatureMatrix& train, const FeatureMatrix& test, const TrainConfig& cfg,
                            const DetectionOptions& options);

/// Applies a fixed model; only the regrouping varies per seed.
MetricsReport evaluate_model(const Model& model, const FeatureMatrix& test, const DetectionOptions& options);

/// Dataset-level protocol: extract both splits once, then run_detection.
MetricsReport run_detection(const Dataset& train, const Dataset& test, const TrainConfig& cfg,
                            const DetectionOptions& options, const ExtractOptions& extract);

struct BiasEntry {
  std::size_t rank = 0;
  std::string name;
  Block block = Block::Base;
  double value = 0.0;
};

struct BiasReport {
  std::vector<BiasEntry> entries;
  ModelKind kind = ModelKind::Forest;
  std::optional<std::string> warning;

  std::string to_table() const;
  std::string to_csv() const;
};

/// Top-n features by |importance|; n beyond the schema is clamped with a
/// warning.
BiasReport bias_report(const Model& model, int n = 20);

}  // namespace judgekit
