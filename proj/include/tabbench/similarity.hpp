#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tabbench/tabular.hpp"

namespace tabbench {

inline constexpr std::size_t kDefaultKlBins = 20;

// KL(P || Q) over raw counts after adding `pseudo_count` to every cell.
double kl_from_counts(std::span<const double> p_counts, std::span<const double> q_counts, double pseudo_count = 1.0);

// Categorical: over category frequencies. Continuous: shared equal-width bins
// over the union range. Direction is real || synth, add-1 smoothing.
double kl_divergence(const Table& real, const Table& synth, std::size_t column, std::size_t bins = kDefaultKlBins);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Observed counts against expected proportions scaled to the observed total.
TestResult chi_square_from_counts(std::span<const double> expected_reference, std::span<const double> observed);
TestResult chi_square(const Table& real, const Table& synth, std::size_t column);

double ks_statistic_exact(std::vector<double> a, std::vector<double> b);
// Asymptotic Kolmogorov survival Q(lambda).
double kolmogorov_survival(double lambda);
TestResult ks_test(std::span<const double> a, std::span<const double> b);
TestResult ks_test(const Table& real, const Table& synth, std::size_t column);

enum class DiagonalDistance { perpendicular, vertical };

struct DwpPoint {
  std::size_t column = 0;
  double real = 0.0;
  double synth = 0.0;
};

std::vector<DwpPoint> dwp_points(const Table& real, const Table& synth);
double point_distance(const DwpPoint& p, DiagonalDistance mode);
double dwp(const Table& real, const Table& synth, DiagonalDistance mode = DiagonalDistance::perpendicular);
// Mean point distance for each column, in schema order.
std::vector<double> dwp_contributions(const Table& real, const Table& synth,
                                      DiagonalDistance mode = DiagonalDistance::perpendicular);

struct AssociationMatrix {
  std::vector<std::size_t> columns;  // schema indices, in order
  Eigen::MatrixXd values;
  std::vector<std::size_t> degenerate;  // columns with zero variance / a single observed category
};

double pearson(std::span<const double> x, std::span<const double> y);
AssociationMatrix pearson_corr_matrix(const Table& t);

double cramers_v(std::span<const std::size_t> a, std::size_t a_levels, std::span<const std::size_t> b,
                 std::size_t b_levels);
double cramers_v_from_contingency(const Eigen::MatrixXd& table);
AssociationMatrix cramers_v_matrix(const Table& t);

struct CorrelationDiff {
  std::string pair;  // "a|b"
  bool categorical = false;
  double real = 0.0;
  double synth = 0.0;
  double abs_diff = 0.0;
};

std::vector<CorrelationDiff> correlation_diffs(const Table& real, const Table& synth);
double correlation_diff_score(const Table& real, const Table& synth);

struct MetricValue {
  std::string metric;
  std::string column_or_pair;
  double value = 0.0;
  bool lower_better = true;
  bool informational = false;  // p-values: reported but not ranked
};

// Full suite: per-column KL, chi-square or KS, DWP contributions, the DWP
// aggregate, per-pair correlation diffs and the correlation diff score.
std::vector<MetricValue> evaluate_similarity(const Table& real, const Table& synth,
                                             DiagonalDistance mode = DiagonalDistance::perpendicular);

}  // namespace tabbench
