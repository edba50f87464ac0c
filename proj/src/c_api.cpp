#include "tabbench/tabbench.h"

#include <charconv>
#include <cstring>
#include <fstream>
#include <string>

#include "tabbench/csv.hpp"
#include "tabbench/error.hpp"
#include "tabbench/rank_stats.hpp"
#include "tabbench/report.hpp"
#include "tabbench/runner.hpp"
#include "tabbench/similarity.hpp"
#include "tabbench/tabular.hpp"
#include "tabbench/toy_data.hpp"

struct tb_schema {
  tabbench::TableSchema value;
};

struct tb_table {
  tabbench::Table value;
};

struct tb_metric_set {
  std::vector<tabbench::MetricValue> values;
};

namespace {

thread_local std::string last_error;

tb_status status_for(tabbench::ErrorCode code) {
  using tabbench::ErrorCode;
  switch (code) {
    case ErrorCode::Io: return TB_ERR_IO;
    case ErrorCode::Parse:
    case ErrorCode::UnknownCategory: return TB_ERR_PARSE;
    case ErrorCode::SchemaMismatch:
    case ErrorCode::LayoutMismatch:
    case ErrorCode::KindMismatch:
    case ErrorCode::NotCategorical:
    case ErrorCode::NotContinuous:
    case ErrorCode::TaskMismatch: return TB_ERR_SCHEMA;
    case ErrorCode::Config: return TB_ERR_CONFIG;
    case ErrorCode::EmptyTable:
    case ErrorCode::DegenerateSplit:
    case ErrorCode::InsufficientData:
    case ErrorCode::EmptyColumn:
    case ErrorCode::EmptyTest:
    case ErrorCode::SingleClassTrainingSet:
    case ErrorCode::NoCheckpoints:
    case ErrorCode::DegenerateInput: return TB_ERR_INSUFFICIENT_DATA;
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::AllZeroExpected: return TB_ERR_NUMERIC;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonScalarRoot:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::InvalidArgument: return TB_ERR_INVALID_ARGUMENT;
  }
  return TB_ERR_INTERNAL;
}

template <typename F>
tb_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return TB_OK;
  } catch (const tabbench::Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return TB_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return TB_ERR_INTERNAL;
  }
}

tb_status null_argument(const char* name) {
  last_error = std::string("argument '") + name + "' is null";
  return TB_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

TB_API const char* tb_last_error(void) { return last_error.c_str(); }

TB_API const char* tb_version(void) { return "0.1.0"; }

TB_API tb_status tb_schema_load_json(const char* path, tb_schema** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tb_schema{tabbench::load_schema(path)}; });
}

TB_API tb_status tb_schema_infer_csv(const char* path, size_t categorical_threshold, tb_schema** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tb_schema{tabbench::infer_schema(path, categorical_threshold)}; });
}

TB_API size_t tb_schema_column_count(const tb_schema* schema) { return schema ? schema->value.size() : 0; }

TB_API void tb_schema_free(tb_schema* schema) { delete schema; }

TB_API tb_status tb_table_load_csv(const char* path, const tb_schema* schema, tb_table** out) {
  if (!path) return null_argument("path");
  if (!schema) return null_argument("schema");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tb_table{tabbench::load_csv(path, schema->value)}; });
}

TB_API size_t tb_table_row_count(const tb_table* table) { return table ? table->value.row_count() : 0; }

TB_API size_t tb_table_column_count(const tb_table* table) { return table ? table->value.column_count() : 0; }

TB_API tb_status tb_table_write_csv(const tb_table* table, const char* path) {
  if (!table) return null_argument("table");
  if (!path) return null_argument("path");
  return guarded([&] { tabbench::write_csv(table->value, path); });
}

TB_API void tb_table_free(tb_table* table) { delete table; }

TB_API tb_status tb_similarity_evaluate(const tb_table* real, const tb_table* synth, tb_metric_set** out) {
  if (!real) return null_argument("real");
  if (!synth) return null_argument("synth");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tb_metric_set{tabbench::evaluate_similarity(real->value, synth->value)}; });
}

TB_API size_t tb_metric_set_size(const tb_metric_set* set) { return set ? set->values.size() : 0; }

TB_API tb_status tb_metric_set_get(const tb_metric_set* set, size_t index, tb_metric* out) {
  if (!set) return null_argument("set");
  if (!out) return null_argument("out");
  if (index >= set->values.size()) {
    last_error = "metric index out of range";
    return TB_ERR_INVALID_ARGUMENT;
  }
  const auto& m = set->values[index];
  *out = tb_metric{m.metric.c_str(), m.column_or_pair.c_str(), m.value, m.lower_better ? 1 : 0,
                   m.informational ? 1 : 0};
  return TB_OK;
}

TB_API tb_status tb_metric_set_write_csv(const tb_metric_set* set, const char* path) {
  if (!set) return null_argument("set");
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) tabbench::fail(tabbench::ErrorCode::Io, std::string("cannot write '") + path + "'");
    tabbench::csv::write_record(out, {"metric", "column_or_pair", "value", "orientation"});
    for (const auto& m : set->values) {
      char buf[64];
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), m.value);
      tabbench::csv::write_record(
          out, {m.metric, m.column_or_pair, std::string(buf, end),
                m.informational ? "info" : (m.lower_better ? "lower_better" : "higher_better")});
    }
  });
}

TB_API void tb_metric_set_free(tb_metric_set* set) { delete set; }

TB_API tb_status tb_bench_run(const char* config_path, int resume, size_t workers, tb_bench_summary* summary) {
  if (!config_path) return null_argument("config_path");
  return guarded([&] {
    const auto cfg = tabbench::load_config(config_path);
    tabbench::BenchOptions options;
    options.resume = resume != 0;
    options.workers = workers == 0 ? 1 : workers;
    const auto s = tabbench::run_benchmark(cfg, options);
    size_t audit_failures = 0;
    for (const auto& r : s.runs)
      if (!r.audit_passed && (r.status == tabbench::RunStatus::done || r.reason == tabbench::kLeakageFailure))
        ++audit_failures;
    if (summary) *summary = tb_bench_summary{s.planned, s.executed, s.skipped, s.failed, audit_failures};
  });
}

TB_API tb_status tb_bench_report(const char* store_dir, const char* grouping, const char* checkpoint, char* path_buf,
                                 size_t path_buf_len) {
  if (!store_dir) return null_argument("store_dir");
  if (!grouping) return null_argument("grouping");
  if (!checkpoint) return null_argument("checkpoint");
  std::string written;
  const tb_status st = guarded([&] {
    written = tabbench::write_report(store_dir, tabbench::grouping_from_string(grouping), checkpoint).string();
  });
  if (st != TB_OK || !path_buf) return st;
  if (written.size() + 1 > path_buf_len) {
    last_error = "path buffer too small";
    return TB_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(path_buf, written.c_str(), written.size() + 1);
  return TB_OK;
}

TB_API tb_status tb_toy_write(size_t rows, uint64_t seed, const char* csv_path, const char* schema_path) {
  if (!csv_path) return null_argument("csv_path");
  if (!schema_path) return null_argument("schema_path");
  return guarded([&] {
    const auto table = tabbench::make_toy_table(rows, seed);
    tabbench::write_csv(table, csv_path);
    tabbench::save_schema(table.schema, schema_path);
  });
}

TB_API tb_status tb_rank_compare(const double* values, const int* orientation, size_t n, size_t k, int tie_correct,
                                 double* friedman, double* p_values, int* verdicts) {
  if (!values) return null_argument("values");
  if (!orientation) return null_argument("orientation");
  return guarded([&] {
    tabbench::ScoreBlock block;
    block.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (size_t i = 0; i < n; ++i) {
      block.measurements.push_back("m" + std::to_string(i));
      block.orientation.push_back(orientation[i] == TB_LOWER_BETTER ? tabbench::Orientation::lower_better
                                                                    : tabbench::Orientation::higher_better);
      for (size_t j = 0; j < k; ++j)
        block.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * k + j];
    }
    for (size_t j = 0; j < k; ++j) block.algorithms.push_back("a" + std::to_string(j));
    const auto ranks = tabbench::rank_rows(tabbench::normalize_scores(block));
    const auto f = tabbench::friedman_test(ranks, tie_correct != 0);
    const auto p = tabbench::nemenyi_pairwise(ranks);
    const auto table = tabbench::classify_pairs(p, ranks.mean_ranks, block.algorithms);
    if (friedman) {
      friedman[0] = f.statistic;
      friedman[1] = f.p_value;
    }
    for (size_t a = 0; a < k; ++a) {
      for (size_t b = 0; b < k; ++b) {
        if (p_values) p_values[a * k + b] = p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (!verdicts) continue;
        int code = 0;
        if (a != b) {
          switch (table.cells[a][b]) {
            case tabbench::Verdict::much_better: code = 2; break;
            case tabbench::Verdict::better: code = 1; break;
            case tabbench::Verdict::same: code = 0; break;
            case tabbench::Verdict::worse: code = -1; break;
            case tabbench::Verdict::much_worse: code = -2; break;
          }
        }
        verdicts[a * k + b] = code;
      }
    }
  });
}

}  // extern "C"
