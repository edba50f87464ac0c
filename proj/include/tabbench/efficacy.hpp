#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tabbench/tabular.hpp"

namespace tabbench {

enum class LearnerKind { logistic_regression, linear_regression, random_forest_lite, knn };

std::string to_string(LearnerKind k);
LearnerKind learner_kind_from_string(const std::string& s);

struct Learner {
  LearnerKind kind = LearnerKind::knn;
  std::size_t max_iterations = 5000;
  double gradient_tolerance = 1e-6;
  std::size_t trees = 25;
  std::size_t max_depth = 6;
  std::size_t neighbors = 5;
};

// Default learner set for a task.
std::vector<Learner> default_learners(Task task);

// Non-target columns: one-hot categoricals, min-max scaled continuous values.
Eigen::MatrixXd feature_matrix(const Table& t);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  Eigen::VectorXd value;  // class proportions or a single mean
};

struct Tree {
  std::vector<TreeNode> nodes;
};

struct FittedModel {
  LearnerKind kind = LearnerKind::knn;
  Task task = Task::classification;
  std::size_t classes = 0;  // classification only
  Eigen::MatrixXd weights;  // (d+1) × classes, or (d+1) × 1 for regression
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<Tree> forest;
  // knn: distinct feature locations with per-class counts (or count and y sum).
  Eigen::MatrixXd locations;
  Eigen::MatrixXd location_stats;
  std::size_t neighbors = 5;
  std::size_t iterations = 0;

  // n × classes probability matrix.
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<std::size_t> predict_class(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd predict_value(const Eigen::MatrixXd& x) const;
};

// Deterministic given (learner, data, seed).
FittedModel train_learner(const Learner& learner, const Table& train, std::uint64_t seed);

using MetricMap = std::map<std::string, double>;

MetricMap classification_metrics(std::span<const std::size_t> truth, const Eigen::MatrixXd& proba,
                                 const std::vector<std::string>& class_names = {});
MetricMap regression_metrics(std::span<const double> truth, std::span<const double> predicted);

MetricMap evaluate_classification(const FittedModel& model, const Table& test);
MetricMap evaluate_regression(const FittedModel& model, const Table& test);

bool metric_lower_better(const std::string& metric);

enum class Protocol { trtr, tstr, augmentation };

std::string to_string(Protocol p);

struct EfficacyReport {
  Protocol protocol = Protocol::trtr;
  LearnerKind learner = LearnerKind::knn;
  MetricMap scores;
  std::uint64_t seed = 0;

  bool operator==(const EfficacyReport&) const = default;
};

EfficacyReport evaluate_learner(const Learner& learner, Protocol protocol, const Table& train, const Table& test,
                                std::uint64_t seed);

// Per learner: trtr then tstr.
std::vector<EfficacyReport> run_tstr(const Table& real_train, const Table& synth_train, const Table& real_test,
                                     const std::vector<Learner>& learners, std::uint64_t seed);
// Per learner: trtr then augmentation on concat(real_train, synth).
std::vector<EfficacyReport> run_augmentation(const Table& real_train, const Table& synth, const Table& real_test,
                                             const std::vector<Learner>& learners, std::uint64_t seed);

struct EfficacySuite {
  std::vector<EfficacyReport> trtr;
  std::vector<EfficacyReport> tstr;
  std::vector<EfficacyReport> augmentation;
};

// Both protocols with the trtr reports computed once and shared. Learners that
// cannot be fitted on a given training set are skipped with a warning.
EfficacySuite run_efficacy(const Table& real_train, const Table& synth, const Table& real_test,
                           const std::vector<Learner>& learners, std::uint64_t seed);

}  // namespace tabbench
