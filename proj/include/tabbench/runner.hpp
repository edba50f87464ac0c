#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tabbench/efficacy.hpp"
#include "tabbench/generators.hpp"
#include "tabbench/similarity.hpp"

namespace tabbench {

struct DatasetSpec {
  std::string name;
  std::filesystem::path csv;
  std::optional<std::filesystem::path> schema;  // inferred from the CSV when absent
  std::size_t categorical_threshold = 20;
  // Applied on top of an inferred schema.
  std::optional<std::string> target;
  Task task = Task::none;
};

struct LossSetting {
  int alpha = 0;
  int beta = 0;
  bool operator==(const LossSetting&) const = default;
};

enum class CheckpointPolicy { last, best_statistical };

// "last" / "optimal", as used in the results store and reports.
std::string checkpoint_label(CheckpointPolicy p);

struct BenchConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<GeneratorKind> models;
  std::vector<LossSetting> loss_grid{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<std::uint64_t> seeds;
  double train_fraction = 0.8;
  // Fraction of real_train held out from generator training for checkpoint scoring.
  double holdout_fraction = 0.1;
  std::optional<std::size_t> synth_rows;  // default |real_train|
  std::vector<LearnerKind> learners;      // empty selects the task defaults
  std::filesystem::path output_dir;
  std::vector<CheckpointPolicy> checkpoints{CheckpointPolicy::last, CheckpointPolicy::best_statistical};
  DiagonalDistance dwp_mode = DiagonalDistance::perpendicular;
  GanConfig gan;
  VaeConfig vae;

  // Throws Config on a violated invariant.
  void validate() const;
};

// Relative paths resolve against base_dir.
BenchConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
BenchConfig load_config(const std::filesystem::path& path);

enum class RunStatus { pending, done, failed };

std::string to_string(RunStatus s);

struct RunRecord {
  std::string run_id;
  std::string dataset;
  GeneratorKind model = GeneratorKind::gan;
  int alpha = 0;
  int beta = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::pending;
  std::string reason;
  double wall_seconds = 0.0;
  bool audit_passed = false;
  std::size_t last_epoch = 0;
  std::size_t optimal_epoch = 0;
};

struct ResultRow {
  std::string run_id;
  std::string dataset;
  std::string model;
  std::string loss_config;  // c{a}m{b}, or "none" for the independent baseline
  int alpha = 0;
  int beta = 0;
  std::uint64_t seed = 0;
  std::string checkpoint;  // last | optimal
  std::string evaluation;  // stat | tstr | aug
  std::string protocol;    // empty for stat rows
  std::string learner;     // empty for stat rows
  std::string metric;
  std::string column_or_pair;
  double value = 0.0;
  std::string orientation;  // lower_better | higher_better | info

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultsHeader =
    "run_id,dataset,model,loss_config,alpha,beta,seed,checkpoint,evaluation,protocol,learner,metric,column_or_pair,"
    "value,orientation";

std::string format_result_row(const ResultRow& row);
std::vector<ResultRow> read_results(const std::filesystem::path& path);
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

std::vector<RunRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<RunRecord>& runs, const std::filesystem::path& path);

// Cartesian expansion of the config; the independent model runs once per
// (dataset, seed) and ignores the loss grid.
std::vector<RunRecord> plan_runs(const BenchConfig& cfg);

// RunRecord::reason of a run stopped by the leakage audit.
inline constexpr const char* kLeakageFailure = "leakage audit failed";

struct LeakageAudit {
  bool passed = true;
  std::vector<std::size_t> overlapping_ids;
};

// Test ids must be disjoint from every training id set.
LeakageAudit audit_leakage(const std::vector<std::size_t>& test_ids,
                           const std::vector<std::vector<std::size_t>>& training_ids);

// Index of the checkpoint to use. best_statistical takes the lowest score,
// earliest on ties; scores align with checkpoints.
std::size_t select_checkpoint(const std::vector<Checkpoint>& checkpoints, const std::vector<double>& scores,
                              CheckpointPolicy policy);

// Mean of per-column KS (continuous) or chi-square / n (categorical), DWP and
// the correlation diff score. Lower is better.
double selection_score(const Table& reference, const Table& synth, DiagonalDistance mode);

struct BenchOptions {
  bool resume = false;
  std::size_t workers = 1;
  std::function<void(const RunRecord&)> on_run_finished;
};

struct BenchSummary {
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<RunRecord> runs;
};

// Writes results.csv and manifest.json under cfg.output_dir.
BenchSummary run_benchmark(const BenchConfig& cfg, const BenchOptions& options = {});

}  // namespace tabbench
