#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "tabbench/tabbench.h"

namespace {

int report_failure(const char* what, tb_status st) {
  std::fprintf(stderr, "bench: %s failed (%d): %s\n", what, static_cast<int>(st), tb_last_error());
  return 1;
}

int run_metrics(const std::string& real_path, const std::string& synth_path, const std::string& schema_path,
                const std::string& out_path) {
  tb_schema* schema = nullptr;
  tb_table* real = nullptr;
  tb_table* synth = nullptr;
  tb_metric_set* metrics = nullptr;
  int rc = 0;
  tb_status st = tb_schema_load_json(schema_path.c_str(), &schema);
  if (st != TB_OK) return report_failure("loading schema", st);
  if ((st = tb_table_load_csv(real_path.c_str(), schema, &real)) != TB_OK) {
    rc = report_failure("loading real table", st);
  } else if ((st = tb_table_load_csv(synth_path.c_str(), schema, &synth)) != TB_OK) {
    rc = report_failure("loading synthetic table", st);
  } else if ((st = tb_similarity_evaluate(real, synth, &metrics)) != TB_OK) {
    rc = report_failure("similarity evaluation", st);
  } else if (!out_path.empty()) {
    if ((st = tb_metric_set_write_csv(metrics, out_path.c_str())) != TB_OK) rc = report_failure("writing metrics", st);
  } else {
    std::printf("metric,column_or_pair,value,orientation\n");
    for (size_t i = 0; i < tb_metric_set_size(metrics); ++i) {
      tb_metric m;
      tb_metric_set_get(metrics, i, &m);
      std::printf("%s,%s,%.17g,%s\n", m.metric, m.column_or_pair, m.value,
                  m.informational ? "info" : (m.lower_better ? "lower_better" : "higher_better"));
    }
  }
  tb_metric_set_free(metrics);
  tb_table_free(synth);
  tb_table_free(real);
  tb_schema_free(schema);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark loss configurations for tabular data generators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tb_version()));

  auto* run = app.add_subcommand("run", "Train, sample and evaluate every configured run");
  std::string config;
  bool resume = false;
  std::size_t workers = 1;
  run->add_option("--config", config, "Benchmark config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_flag("--resume", resume, "Skip runs already marked done in the manifest");
  run->add_option("--workers", workers, "Parallel runs")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Rank loss configurations and write significance tables");
  std::string store;
  std::string group = "overall";
  std::string checkpoint = "optimal";
  report->add_option("--store", store, "Output directory of a benchmark run")->required()->check(CLI::ExistingDirectory);
  report->add_option("--group", group, "Grouping")->check(CLI::IsMember({"overall", "dataset", "model"}));
  report->add_option("--checkpoint", checkpoint, "Checkpoint")->check(CLI::IsMember({"optimal", "last"}));

  auto* metrics = app.add_subcommand("metrics", "Statistical similarity between two tables");
  std::string real_path;
  std::string synth_path;
  std::string schema_path;
  std::string out_path;
  metrics->add_option("--real", real_path, "Real CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--synth", synth_path, "Synthetic CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--schema", schema_path, "Schema JSON")->required()->check(CLI::ExistingFile);
  metrics->add_option("--out", out_path, "Write the metrics CSV here instead of stdout");

  auto* toy = app.add_subcommand("make-toy", "Write the toy dataset and its schema");
  std::size_t rows = 1000;
  std::uint64_t seed = 7;
  std::string toy_csv;
  std::string toy_schema;
  toy->add_option("--rows", rows, "Row count")->check(CLI::PositiveNumber);
  toy->add_option("--seed", seed, "Seed");
  toy->add_option("--out", toy_csv, "CSV path")->required();
  toy->add_option("--schema", toy_schema, "Schema JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    tb_bench_summary s{};
    const tb_status st = tb_bench_run(config.c_str(), resume ? 1 : 0, workers, &s);
    if (st != TB_OK) return report_failure("run", st);
    std::printf("planned %zu, executed %zu, skipped %zu, failed %zu, leakage audit failures %zu\n", s.planned,
                s.executed, s.skipped, s.failed, s.audit_failures);
    return s.audit_failures == 0 ? 0 : 2;
  }
  if (*report) {
    char path[4096];
    const tb_status st = tb_bench_report(store.c_str(), group.c_str(), checkpoint.c_str(), path, sizeof(path));
    if (st != TB_OK) return report_failure("report", st);
    std::printf("%s\n", path);
    return 0;
  }
  if (*metrics) return run_metrics(real_path, synth_path, schema_path, out_path);
  if (*toy) {
    const tb_status st = tb_toy_write(rows, seed, toy_csv.c_str(), toy_schema.c_str());
    if (st != TB_OK) return report_failure("make-toy", st);
    return 0;
  }
  return 0;
}
