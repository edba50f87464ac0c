#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "support.hpp"
#include "tabbench/tabbench.h"

TEST_CASE("version and null arguments") {
  CHECK(std::string(tb_version()) == "0.1.0");
  tb_schema* schema = nullptr;
  CHECK(tb_schema_load_json(nullptr, &schema) == TB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(tb_last_error()).find("path") != std::string::npos);
  CHECK(tb_schema_load_json("/nonexistent/schema.json", &schema) == TB_ERR_IO);
}

TEST_CASE("toy data, tables and similarity through the C interface") {
  testing::TempDir dir("capi");
  const auto csv = (dir / "toy.csv").string();
  const auto json = (dir / "toy.json").string();
  REQUIRE(tb_toy_write(200, 3, csv.c_str(), json.c_str()) == TB_OK);

  tb_schema* schema = nullptr;
  REQUIRE(tb_schema_load_json(json.c_str(), &schema) == TB_OK);
  CHECK(tb_schema_column_count(schema) == 4);
  tb_table* table = nullptr;
  REQUIRE(tb_table_load_csv(csv.c_str(), schema, &table) == TB_OK);
  CHECK(tb_table_row_count(table) == 200);
  CHECK(tb_table_column_count(table) == 4);

  tb_metric_set* metrics = nullptr;
  REQUIRE(tb_similarity_evaluate(table, table, &metrics) == TB_OK);
  REQUIRE(tb_metric_set_size(metrics) > 0);
  for (size_t i = 0; i < tb_metric_set_size(metrics); ++i) {
    tb_metric m{};
    REQUIRE(tb_metric_set_get(metrics, i, &m) == TB_OK);
    CHECK(m.value == (m.informational ? 1.0 : 0.0));
  }
  tb_metric m{};
  CHECK(tb_metric_set_get(metrics, 100000, &m) == TB_ERR_INVALID_ARGUMENT);
  const auto out = (dir / "metrics.csv").string();
  CHECK(tb_metric_set_write_csv(metrics, out.c_str()) == TB_OK);
  CHECK(testing::read_file(out).rfind("metric,column_or_pair,value,orientation\n", 0) == 0);

  tb_metric_set_free(metrics);
  tb_table_free(table);
  tb_schema_free(schema);
}

TEST_CASE("malformed input maps to status codes") {
  testing::TempDir dir("capi");
  testing::write_file(dir / "s.json", R"({"columns":[{"name":"c","kind":"categorical","categories":["a"]}]})");
  testing::write_file(dir / "t.csv", "c\nb\n");
  tb_schema* schema = nullptr;
  REQUIRE(tb_schema_load_json((dir / "s.json").string().c_str(), &schema) == TB_OK);
  tb_table* table = nullptr;
  CHECK(tb_table_load_csv((dir / "t.csv").string().c_str(), schema, &table) == TB_ERR_PARSE);
  CHECK(table == nullptr);
  tb_schema_free(schema);
  testing::write_file(dir / "bad.json", "{");
  CHECK(tb_schema_load_json((dir / "bad.json").string().c_str(), &schema) == TB_ERR_PARSE);
}

TEST_CASE("rank comparison through the C interface") {
  // Two algorithms over six lower-better measurements; the second always wins.
  std::vector<double> values;
  std::vector<int> orientation;
  for (int i = 0; i < 6; ++i) {
    values.push_back(1.0 + i);
    values.push_back(0.5 + i);
    orientation.push_back(TB_LOWER_BETTER);
  }
  double friedman[2];
  double p[4];
  int verdicts[4];
  REQUIRE(tb_rank_compare(values.data(), orientation.data(), 6, 2, 0, friedman, p, verdicts) == TB_OK);
  CHECK(friedman[0] == doctest::Approx(6.0));
  CHECK(verdicts[0] == 0);
  CHECK(verdicts[1] == -verdicts[2]);
  CHECK(verdicts[2] > 0);
  CHECK(p[1] == p[2]);
  CHECK(tb_rank_compare(values.data(), orientation.data(), 1, 2, 0, friedman, p, verdicts) ==
        TB_ERR_INSUFFICIENT_DATA);
}

TEST_CASE("report buffer too small") {
  char buf[4];
  CHECK(tb_bench_report("/nonexistent", "overall", "last", buf, sizeof(buf)) != TB_OK);
  CHECK(tb_bench_report("/tmp", "sideways", "last", buf, sizeof(buf)) == TB_ERR_INVALID_ARGUMENT);
}
