#ifndef TABBENCH_TABBENCH_H
#define TABBENCH_TABBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TABBENCH_BUILDING_LIBRARY)
#define TB_API __declspec(dllexport)
#else
#define TB_API __declspec(dllimport)
#endif
#else
#define TB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
  TB_OK = 0,
  TB_ERR_INVALID_ARGUMENT = 1,
  TB_ERR_IO = 2,
  TB_ERR_PARSE = 3,
  TB_ERR_SCHEMA = 4,
  TB_ERR_CONFIG = 5,
  TB_ERR_INSUFFICIENT_DATA = 6,
  TB_ERR_NUMERIC = 7,
  TB_ERR_BUFFER_TOO_SMALL = 8,
  TB_ERR_INTERNAL = 99
} tb_status;

typedef struct tb_schema tb_schema;
typedef struct tb_table tb_table;
typedef struct tb_metric_set tb_metric_set;

/* Message of the last failed call on this thread; never NULL. */
TB_API const char* tb_last_error(void);
TB_API const char* tb_version(void);

TB_API tb_status tb_schema_load_json(const char* path, tb_schema** out);
TB_API tb_status tb_schema_infer_csv(const char* path, size_t categorical_threshold, tb_schema** out);
TB_API size_t tb_schema_column_count(const tb_schema* schema);
TB_API void tb_schema_free(tb_schema* schema);

TB_API tb_status tb_table_load_csv(const char* path, const tb_schema* schema, tb_table** out);
TB_API size_t tb_table_row_count(const tb_table* table);
TB_API size_t tb_table_column_count(const tb_table* table);
TB_API tb_status tb_table_write_csv(const tb_table* table, const char* path);
TB_API void tb_table_free(tb_table* table);

typedef struct tb_metric {
  const char* metric;
  const char* column_or_pair;
  double value;
  int lower_better;
  int informational;
} tb_metric;

TB_API tb_status tb_similarity_evaluate(const tb_table* real, const tb_table* synth, tb_metric_set** out);
TB_API size_t tb_metric_set_size(const tb_metric_set* set);
/* Strings stay valid until the set is freed. */
TB_API tb_status tb_metric_set_get(const tb_metric_set* set, size_t index, tb_metric* out);
TB_API tb_status tb_metric_set_write_csv(const tb_metric_set* set, const char* path);
TB_API void tb_metric_set_free(tb_metric_set* set);

typedef struct tb_bench_summary {
  size_t planned;
  size_t executed;
  size_t skipped;
  size_t failed;
  size_t audit_failures; /* completed runs whose leakage audit did not pass */
} tb_bench_summary;

TB_API tb_status tb_bench_run(const char* config_path, int resume, size_t workers, tb_bench_summary* summary);
/* grouping: "overall", "dataset" or "model"; checkpoint: "optimal" or "last".
   Writes the markdown report path into path_buf (NUL-terminated). */
TB_API tb_status tb_bench_report(const char* store_dir, const char* grouping, const char* checkpoint,
                                 char* path_buf, size_t path_buf_len);

/* Toy table: three correlated continuous columns and an imbalanced binary
   target. Writes the CSV and its schema JSON. */
TB_API tb_status tb_toy_write(size_t rows, uint64_t seed, const char* csv_path, const char* schema_path);

typedef enum tb_orientation { TB_LOWER_BETTER = 0, TB_HIGHER_BETTER = 1 } tb_orientation;

/* values: n x k row-major; orientation: n entries. Outputs: friedman[2] =
   {statistic, p}; p_values and verdicts: k x k row-major. Verdicts use
   2 = "++", 1 = "+", 0 = "0", -1 = "-", -2 = "--"; the diagonal is 0. */
TB_API tb_status tb_rank_compare(const double* values, const int* orientation, size_t n, size_t k, int tie_correct,
                                 double* friedman, double* p_values, int* verdicts);

#ifdef __cplusplus
}
#endif

#endif
