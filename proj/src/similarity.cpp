#include "tabbench/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "tabbench/error.hpp"

namespace tabbench {

namespace {

// Continuous ranges may differ between independently loaded tables, so only
// names, kinds and category lists have to agree.
void require_same_schema(const Table& real, const Table& synth) {
  const auto& a = real.schema;
  const auto& b = synth.schema;
  if (a.size() != b.size()) fail(ErrorCode::SchemaMismatch, "tables have different column counts");
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].name != b[c].name) fail(ErrorCode::SchemaMismatch, "column " + std::to_string(c) + " names differ");
    if (a[c].is_categorical() != b[c].is_categorical())
      fail(ErrorCode::SchemaMismatch, "column '" + a[c].name + "' kinds differ");
    if (a[c].is_categorical() && a[c].categorical() != b[c].categorical())
      fail(ErrorCode::SchemaMismatch, "column '" + a[c].name + "' category lists differ");
  }
}

void require_column(const Table& real, const Table& synth, std::size_t column) {
  if (column >= real.column_count() || column >= synth.column_count())
    fail(ErrorCode::InvalidArgument, "column index out of range");
  if (real.schema[column].is_categorical() != synth.schema[column].is_categorical())
    fail(ErrorCode::KindMismatch, "column '" + real.schema[column].name + "' kinds differ");
}

std::vector<double> to_double(const std::vector<std::size_t>& counts) {
  return {counts.begin(), counts.end()};
}

double chi_square_sf(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

std::pair<double, double> union_range(std::span<const double> a, std::span<const double> b) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : b) lo = std::min(lo, v), hi = std::max(hi, v);
  return {lo, hi};
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string pair_label(const TableSchema& s, std::size_t a, std::size_t b) { return s[a].name + "|" + s[b].name; }

}  // namespace

double kl_from_counts(std::span<const double> p_counts, std::span<const double> q_counts, double pseudo_count) {
  if (p_counts.size() != q_counts.size()) fail(ErrorCode::DimensionMismatch, "count vectors differ in length");
  if (pseudo_count < 0.0) fail(ErrorCode::InvalidArgument, "pseudo count must be non-negative");
  double p_total = 0.0;
  double q_total = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    p_total += p_counts[i] + pseudo_count;
    q_total += q_counts[i] + pseudo_count;
  }
  if (p_total <= 0.0 || q_total <= 0.0) fail(ErrorCode::InvalidArgument, "empty count vector");
  double kl = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    const double p = (p_counts[i] + pseudo_count) / p_total;
    const double q = (q_counts[i] + pseudo_count) / q_total;
    if (p > 0.0) kl += p * std::log(p / q);
  }
  return std::max(0.0, kl);
}

double kl_divergence(const Table& real, const Table& synth, std::size_t column, std::size_t bins) {
  require_column(real, synth, column);
  if (real.schema[column].is_categorical()) {
    return kl_from_counts(to_double(real.category_counts(column)), to_double(synth.category_counts(column)));
  }
  if (bins < 2) fail(ErrorCode::InvalidArgument, "at least 2 bins are required");
  const auto a = real.numeric_column(column);
  const auto b = synth.numeric_column(column);
  std::vector<double> pa(bins, 0.0);
  std::vector<double> pb(bins, 0.0);
  if (!a.empty() || !b.empty()) {
    const auto [lo, hi] = union_range(a, b);
    const double width = hi - lo;
    auto bin_of = [&](double v) -> std::size_t {
      if (width <= 0.0) return 0;
      const auto i = static_cast<std::size_t>(std::floor((v - lo) / width * static_cast<double>(bins)));
      return std::min(i, bins - 1);
    };
    for (double v : a) pa[bin_of(v)] += 1.0;
    for (double v : b) pb[bin_of(v)] += 1.0;
  }
  return kl_from_counts(pa, pb);
}

TestResult chi_square_from_counts(std::span<const double> expected_reference, std::span<const double> observed) {
  if (expected_reference.size() != observed.size())
    fail(ErrorCode::DimensionMismatch, "count vectors differ in length");
  double ref_total = 0.0;
  double obs_total = 0.0;
  for (double v : expected_reference) ref_total += v;
  for (double v : observed) obs_total += v;
  if (ref_total <= 0.0) fail(ErrorCode::AllZeroExpected, "reference distribution has no mass");
  if (obs_total <= 0.0) fail(ErrorCode::EmptyColumn, "observed column is empty");

  double statistic = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_reference[i] / ref_total * obs_total;
    if (e <= 0.0) continue;
    ++used;
    const double d = observed[i] - e;
    statistic += d * d / e;
  }
  if (used < 2) return {0.0, 1.0};
  return {statistic, chi_square_sf(statistic, static_cast<double>(used - 1))};
}

TestResult chi_square(const Table& real, const Table& synth, std::size_t column) {
  require_column(real, synth, column);
  if (!real.schema[column].is_categorical())
    fail(ErrorCode::NotCategorical, "column '" + real.schema[column].name + "' is not categorical");
  return chi_square_from_counts(to_double(real.category_counts(column)), to_double(synth.category_counts(column)));
}

double ks_statistic_exact(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyColumn, "KS needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double k = 2.0 * j - 1.0;
      s += std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_test(std::span<const double> a, std::span<const double> b) {
  const double d = ks_statistic_exact({a.begin(), a.end()}, {b.begin(), b.end()});
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  return {d, kolmogorov_survival(std::sqrt(n * m / (n + m)) * d)};
}

TestResult ks_test(const Table& real, const Table& synth, std::size_t column) {
  require_column(real, synth, column);
  if (!real.schema[column].is_continuous())
    fail(ErrorCode::NotContinuous, "column '" + real.schema[column].name + "' is not continuous");
  return ks_test(real.numeric_column(column), synth.numeric_column(column));
}

std::vector<DwpPoint> dwp_points(const Table& real, const Table& synth) {
  require_same_schema(real, synth);
  if (real.rows.empty() || synth.rows.empty()) fail(ErrorCode::EmptyTable, "DWP needs two non-empty tables");
  std::vector<DwpPoint> points;
  const double nr = static_cast<double>(real.row_count());
  const double ns = static_cast<double>(synth.row_count());
  for (std::size_t c = 0; c < real.column_count(); ++c) {
    if (real.schema[c].is_categorical()) {
      const auto rc = real.category_counts(c);
      const auto sc = synth.category_counts(c);
      for (std::size_t k = 0; k < rc.size(); ++k)
        points.push_back({c, static_cast<double>(rc[k]) / nr, static_cast<double>(sc[k]) / ns});
    } else {
      const auto a = real.numeric_column(c);
      const auto b = synth.numeric_column(c);
      const auto [lo, hi] = union_range(a, b);
      const double width = hi - lo;
      const double ma = width > 0.0 ? (mean_of(a) - lo) / width : 0.0;
      const double mb = width > 0.0 ? (mean_of(b) - lo) / width : 0.0;
      points.push_back({c, ma, mb});
    }
  }
  return points;
}

double point_distance(const DwpPoint& p, DiagonalDistance mode) {
  const double d = std::abs(p.real - p.synth);
  return mode == DiagonalDistance::perpendicular ? d / std::numbers::sqrt2 : d;
}

double dwp(const Table& real, const Table& synth, DiagonalDistance mode) {
  const auto points = dwp_points(real, synth);
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) s += point_distance(p, mode);
  return s / static_cast<double>(points.size());
}

std::vector<double> dwp_contributions(const Table& real, const Table& synth, DiagonalDistance mode) {
  const auto points = dwp_points(real, synth);
  std::vector<double> sum(real.column_count(), 0.0);
  std::vector<double> count(real.column_count(), 0.0);
  for (const auto& p : points) {
    sum[p.column] += point_distance(p, mode);
    count[p.column] += 1.0;
  }
  for (std::size_t c = 0; c < sum.size(); ++c)
    if (count[c] > 0.0) sum[c] /= count[c];
  return sum;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "pearson inputs differ in length");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AssociationMatrix pearson_corr_matrix(const Table& t) {
  AssociationMatrix out;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < t.column_count(); ++c) {
    if (!t.schema[c].is_continuous()) continue;
    out.columns.push_back(c);
    cols.push_back(t.numeric_column(c));
    const auto& v = cols.back();
    if (v.empty() || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }))
      out.degenerate.push_back(c);
  }
  const auto k = static_cast<Eigen::Index>(cols.size());
  out.values = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j)
      out.values(i, j) = out.values(j, i) =
          pearson(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  return out;
}

double cramers_v_from_contingency(const Eigen::MatrixXd& table) {
  const Eigen::VectorXd row_tot = table.rowwise().sum();
  const Eigen::RowVectorXd col_tot = table.colwise().sum();
  const double n = table.sum();
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < table.rows(); ++i)
    if (row_tot(i) > 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < table.cols(); ++j)
    if (col_tot(j) > 0.0) cols.push_back(j);
  const std::size_t r = std::min(rows.size(), cols.size());
  if (r < 2 || n <= 0.0) return 0.0;
  double chi2 = 0.0;
  for (auto i : rows) {
    for (auto j : cols) {
      const double e = row_tot(i) * col_tot(j) / n;
      const double d = table(i, j) - e;
      chi2 += d * d / e;
    }
  }
  return std::clamp(std::sqrt(chi2 / (n * static_cast<double>(r - 1))), 0.0, 1.0);
}

double cramers_v(std::span<const std::size_t> a, std::size_t a_levels, std::span<const std::size_t> b,
                 std::size_t b_levels) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "columns differ in length");
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a_levels), static_cast<Eigen::Index>(b_levels));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= a_levels || b[i] >= b_levels) fail(ErrorCode::InvalidArgument, "category index out of range");
    table(static_cast<Eigen::Index>(a[i]), static_cast<Eigen::Index>(b[i])) += 1.0;
  }
  return cramers_v_from_contingency(table);
}

AssociationMatrix cramers_v_matrix(const Table& t) {
  AssociationMatrix out;
  std::vector<std::vector<std::size_t>> cols;
  std::vector<std::size_t> levels;
  for (std::size_t c = 0; c < t.column_count(); ++c) {
    if (!t.schema[c].is_categorical()) continue;
    out.columns.push_back(c);
    cols.push_back(t.category_column(c));
    levels.push_back(t.schema[c].categorical().categories.size());
    const auto counts = t.category_counts(c);
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; }) < 2)
      out.degenerate.push_back(c);
  }
  const auto k = static_cast<Eigen::Index>(cols.size());
  out.values = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      out.values(i, j) = out.values(j, i) = cramers_v(cols[a], levels[a], cols[b], levels[b]);
    }
  }
  return out;
}

std::vector<CorrelationDiff> correlation_diffs(const Table& real, const Table& synth) {
  require_same_schema(real, synth);
  std::vector<CorrelationDiff> out;
  auto collect = [&](const AssociationMatrix& r, const AssociationMatrix& s, bool categorical) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      for (std::size_t j = i + 1; j < r.columns.size(); ++j) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const double a = r.values(ii, jj);
        const double b = s.values(ii, jj);
        out.push_back({pair_label(real.schema, r.columns[i], r.columns[j]), categorical, a, b, std::abs(a - b)});
      }
    }
  };
  collect(pearson_corr_matrix(real), pearson_corr_matrix(synth), false);
  collect(cramers_v_matrix(real), cramers_v_matrix(synth), true);
  return out;
}

double correlation_diff_score(const Table& real, const Table& synth) {
  const auto diffs = correlation_diffs(real, synth);
  if (diffs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& d : diffs) s += d.abs_diff;
  return s / static_cast<double>(diffs.size());
}

std::vector<MetricValue> evaluate_similarity(const Table& real, const Table& synth, DiagonalDistance mode) {
  require_same_schema(real, synth);
  std::vector<MetricValue> out;
  for (std::size_t c = 0; c < real.column_count(); ++c) {
    const auto& name = real.schema[c].name;
    out.push_back({"kl", name, kl_divergence(real, synth, c)});
    if (real.schema[c].is_categorical()) {
      const auto r = chi_square(real, synth, c);
      out.push_back({"chi_square_stat", name, r.statistic});
      out.push_back({"chi_square_p", name, r.p_value, false, true});
    } else {
      const auto r = ks_test(real, synth, c);
      out.push_back({"ks_stat", name, r.statistic});
      out.push_back({"ks_p", name, r.p_value, false, true});
    }
  }
  const auto contrib = dwp_contributions(real, synth, mode);
  for (std::size_t c = 0; c < contrib.size(); ++c)
    out.push_back({"dwp_contribution", real.schema[c].name, contrib[c]});
  out.push_back({"dwp", "*", dwp(real, synth, mode)});
  const auto diffs = correlation_diffs(real, synth);
  double total = 0.0;
  for (const auto& d : diffs) {
    out.push_back({d.categorical ? "cramers_v_diff" : "pearson_diff", d.pair, d.abs_diff});
    total += d.abs_diff;
  }
  out.push_back({"correlation_diff_score", "*", diffs.empty() ? 0.0 : total / static_cast<double>(diffs.size())});
  return out;
}

}  // namespace tabbench
