#include "tabbench/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "tabbench/error.hpp"

namespace tabbench {

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_ranks(const RankMatrix& r) {
  if (r.ranks.rows() < 2 || r.ranks.cols() < 2)
    fail(ErrorCode::DegenerateInput, "rank statistics need n >= 2 measurements and k >= 2 algorithms");
}

}  // namespace

void ScoreBlock::validate() const {
  const auto n = static_cast<Eigen::Index>(measurements.size());
  const auto k = static_cast<Eigen::Index>(algorithms.size());
  if (values.rows() != n || values.cols() != k || orientation.size() != measurements.size())
    fail(ErrorCode::DimensionMismatch, "score block dimensions are inconsistent");
  if (!values.allFinite()) fail(ErrorCode::InvalidArgument, "score block contains non-finite values");
}

ScoreBlock normalize_scores(const ScoreBlock& block) {
  block.validate();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < block.values.rows(); ++r) {
    if (block.orientation[static_cast<std::size_t>(r)] == Orientation::lower_better && block.values.row(r).minCoeff() < 0.0) {
      warn("measurement '" + block.measurements[static_cast<std::size_t>(r)] +
           "' has a negative lower-better score; row dropped");
      continue;
    }
    keep.push_back(r);
  }
  ScoreBlock out;
  out.algorithms = block.algorithms;
  out.values.resize(static_cast<Eigen::Index>(keep.size()), block.values.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto r = keep[i];
    const auto src = static_cast<std::size_t>(r);
    out.measurements.push_back(block.measurements[src]);
    out.orientation.push_back(Orientation::higher_better);
    if (block.orientation[src] == Orientation::lower_better)
      out.values.row(static_cast<Eigen::Index>(i)) = (1.0 + block.values.row(r).array()).inverse().matrix();
    else
      out.values.row(static_cast<Eigen::Index>(i)) = block.values.row(r);
  }
  return out;
}

Eigen::RowVectorXd rank_descending(const Eigen::RowVectorXd& row) {
  const auto k = static_cast<std::size_t>(row.size());
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return row(a) > row(b); });
  Eigen::RowVectorXd ranks(row.size());
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && row(order[j + 1]) == row(order[i])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks(order[t]) = r;
    i = j + 1;
  }
  return ranks;
}

RankMatrix rank_rows(const ScoreBlock& block) {
  block.validate();
  if (std::any_of(block.orientation.begin(), block.orientation.end(),
                  [](Orientation o) { return o != Orientation::higher_better; }))
    fail(ErrorCode::InvalidArgument, "rank_rows expects higher-better rows; normalize first");
  RankMatrix out;
  out.ranks.resize(block.values.rows(), block.values.cols());
  for (Eigen::Index r = 0; r < block.values.rows(); ++r) out.ranks.row(r) = rank_descending(block.values.row(r));
  out.mean_ranks = block.values.rows() > 0 ? Eigen::RowVectorXd(out.ranks.colwise().mean())
                                           : Eigen::RowVectorXd::Zero(block.values.cols());
  return out;
}

FriedmanResult friedman_test(const RankMatrix& ranks, bool tie_correction) {
  require_ranks(ranks);
  const double n = static_cast<double>(ranks.ranks.rows());
  const double k = static_cast<double>(ranks.ranks.cols());
  double statistic = 12.0 * n / (k * (k + 1.0)) * ranks.mean_ranks.squaredNorm() - 3.0 * n * (k + 1.0);
  if (tie_correction) {
    // 1 - sum(t^3 - t) / (n (k^3 - k)), over every tie group in every row.
    double ties = 0.0;
    for (Eigen::Index r = 0; r < ranks.ranks.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(ranks.ranks.cols()));
      for (Eigen::Index c = 0; c < ranks.ranks.cols(); ++c) row[static_cast<std::size_t>(c)] = ranks.ranks(r, c);
      std::sort(row.begin(), row.end());
      for (std::size_t i = 0; i < row.size();) {
        std::size_t j = i;
        while (j + 1 < row.size() && row[j + 1] == row[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        ties += t * t * t - t;
        i = j + 1;
      }
    }
    const double denom = 1.0 - ties / (n * (k * k * k - k));
    if (denom <= 1e-12) return {0.0, 1.0};
    statistic /= denom;
  }
  // Rounding can leave a tiny negative value when all mean ranks coincide.
  if (statistic < 1e-12) return {0.0, 1.0};
  boost::math::chi_squared dist(k - 1.0);
  return {statistic, boost::math::cdf(boost::math::complement(dist, statistic))};
}

double studentized_range_sf(double q, std::size_t k) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "studentized range needs k >= 2");
  if (q <= 0.0) return 1.0;
  const double kd = static_cast<double>(k);
  auto integrand = [&](double x) {
    const double inner = normal_cdf(x) - normal_cdf(x - q);
    return normal_pdf(x) * std::pow(std::max(inner, 0.0), kd - 1.0);
  };
  // Composite 20-point Gauss-Legendre; the normal density is negligible
  // outside [-8.5, 8.5].
  const double lo = -8.5;
  const double hi = 8.5;
  constexpr int panels = 40;
  const double width = (hi - lo) / panels;
  double cdf = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + i * width;
    cdf += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, a + width);
  }
  return std::clamp(1.0 - kd * cdf, 0.0, 1.0);
}

Eigen::MatrixXd nemenyi_pairwise(const RankMatrix& ranks) {
  require_ranks(ranks);
  const auto k = ranks.ranks.cols();
  const double n = static_cast<double>(ranks.ranks.rows());
  const double kd = static_cast<double>(k);
  const double se = std::sqrt(kd * (kd + 1.0) / (6.0 * n));
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double z = std::abs(ranks.mean_ranks(a) - ranks.mean_ranks(b)) / se;
      p(a, b) = p(b, a) = studentized_range_sf(z * std::numbers::sqrt2, static_cast<std::size_t>(k));
    }
  }
  return p;
}

std::string symbol(Verdict v) {
  switch (v) {
    case Verdict::much_better: return "++";
    case Verdict::better: return "+";
    case Verdict::same: return "0";
    case Verdict::worse: return "-";
    case Verdict::much_worse: return "--";
  }
  return "0";
}

Verdict verdict_from_p(double p, bool row_is_better) {
  if (p <= 0.01) return row_is_better ? Verdict::much_better : Verdict::much_worse;
  if (p <= 0.05) return row_is_better ? Verdict::better : Verdict::worse;
  return Verdict::same;
}

bool SignificanceTable::antisymmetric() const {
  auto mirror = [](Verdict v) {
    switch (v) {
      case Verdict::much_better: return Verdict::much_worse;
      case Verdict::better: return Verdict::worse;
      case Verdict::same: return Verdict::same;
      case Verdict::worse: return Verdict::better;
      case Verdict::much_worse: return Verdict::much_better;
    }
    return Verdict::same;
  };
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = 0; b < cells.size(); ++b)
      if (a != b && cells[a][b] != mirror(cells[b][a])) return false;
  return true;
}

SignificanceTable classify_pairs(const Eigen::MatrixXd& p_values, const Eigen::RowVectorXd& mean_ranks,
                                 const std::vector<std::string>& algorithms) {
  const auto k = p_values.rows();
  if (p_values.cols() != k || mean_ranks.size() != k || static_cast<Eigen::Index>(algorithms.size()) != k)
    fail(ErrorCode::DimensionMismatch, "p-value matrix, mean ranks and labels disagree in size");
  SignificanceTable out;
  out.algorithms = algorithms;
  out.p_values = p_values;
  out.cells.assign(static_cast<std::size_t>(k), std::vector<Verdict>(static_cast<std::size_t>(k), Verdict::same));
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      // One p-value per unordered pair keeps the table antisymmetric even if
      // the input matrix is slightly asymmetric.
      const double p = p_values(a, b);
      const bool a_better = mean_ranks(a) < mean_ranks(b);
      const bool tie = mean_ranks(a) == mean_ranks(b);
      const Verdict v = tie ? Verdict::same : verdict_from_p(p, a_better);
      const Verdict w = tie ? Verdict::same : verdict_from_p(p, !a_better);
      out.cells[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
      out.cells[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = w;
    }
  }
  return out;
}

}  // namespace tabbench
