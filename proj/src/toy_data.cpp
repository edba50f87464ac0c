#include "tabbench/toy_data.hpp"

#include <algorithm>
#include <random>

#include "tabbench/error.hpp"

namespace tabbench {

Table make_toy_table(std::size_t rows, std::uint64_t seed) {
  if (rows < 1) fail(ErrorCode::InvalidArgument, "toy table needs at least one row");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Row> data;
  data.reserve(rows);
  double lo[3] = {1e300, 1e300, 1e300};
  double hi[3] = {-1e300, -1e300, -1e300};
  for (std::size_t r = 0; r < rows; ++r) {
    const double x1 = normal(rng);
    const double x2 = 0.8 * x1 + 0.6 * normal(rng);
    const double x3 = 5.0 - 0.6 * x1 + 0.8 * normal(rng);
    // Threshold at the 75th percentile of N(0, 1.25).
    const bool positive = x1 + 0.5 * normal(rng) > 0.754;
    const double v[3] = {x1, x2, x3};
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], v[c]);
      hi[c] = std::max(hi[c], v[c]);
    }
    data.push_back({x1, x2, x3, Category{positive ? 1u : 0u}});
  }

  TableSchema schema;
  schema.columns = {
      {"x1", Continuous{lo[0], hi[0]}},
      {"x2", Continuous{lo[1], hi[1]}},
      {"x3", Continuous{lo[2], hi[2]}},
      {"label", Categorical{{"0", "1"}}},
  };
  schema.target_index = 3;
  schema.task = Task::classification;
  return Table{std::move(schema), std::move(data)};
}

}  // namespace tabbench
