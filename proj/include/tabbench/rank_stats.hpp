#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tabbench {

enum class Orientation { lower_better, higher_better };

struct ScoreBlock {
  std::vector<std::string> algorithms;    // k
  std::vector<std::string> measurements;  // n
  Eigen::MatrixXd values;                 // n × k
  std::vector<Orientation> orientation;   // n

  void validate() const;
};

// s -> 1 / (1 + s) on lower-better rows, which then become higher-better.
// Rows with a negative lower-better score are dropped with a warning.
ScoreBlock normalize_scores(const ScoreBlock& block);

struct RankMatrix {
  Eigen::MatrixXd ranks;  // n × k, 1 = best
  Eigen::RowVectorXd mean_ranks;
};

// Descending ranks per row with average ties. All rows must be higher-better.
RankMatrix rank_rows(const ScoreBlock& block);
Eigen::RowVectorXd rank_descending(const Eigen::RowVectorXd& row);

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

FriedmanResult friedman_test(const RankMatrix& ranks, bool tie_correction = false);

// P(range of k iid standard normals > q).
double studentized_range_sf(double q, std::size_t k);

// Symmetric k × k matrix of pairwise p-values with a unit diagonal.
Eigen::MatrixXd nemenyi_pairwise(const RankMatrix& ranks);

enum class Verdict { much_better, better, same, worse, much_worse };

std::string symbol(Verdict v);
Verdict verdict_from_p(double p, bool row_is_better);

struct SignificanceTable {
  std::vector<std::string> algorithms;
  std::vector<std::vector<Verdict>> cells;  // cells[a][b] compares a against b; diagonal unused
  Eigen::MatrixXd p_values;

  bool antisymmetric() const;
};

// Direction from the lower mean rank; magnitude from p <= 0.01 / p <= 0.05.
SignificanceTable classify_pairs(const Eigen::MatrixXd& p_values, const Eigen::RowVectorXd& mean_ranks,
                                 const std::vector<std::string>& algorithms);

}  // namespace tabbench
