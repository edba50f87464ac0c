#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tabbench/rank_stats.hpp"
#include "tabbench/runner.hpp"

namespace tabbench {

enum class Grouping { overall, dataset, model };

std::string to_string(Grouping g);
Grouping grouping_from_string(const std::string& s);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics.
Quartiles quartiles(std::vector<double> values);

struct MetricDistribution {
  std::string metric;
  std::string algorithm;
  std::size_t count = 0;
  Quartiles summary;  // over normalized (higher-better) scores
};

struct ReportSection {
  std::string group;       // "all", a dataset name or a model name
  std::string evaluation;  // stat | tstr | aug | comp
  bool insufficient = false;
  std::string reason;
  std::size_t dropped_rows = 0;
  ScoreBlock block;  // normalized
  RankMatrix ranks;
  FriedmanResult friedman;
  SignificanceTable table;
  std::vector<MetricDistribution> distributions;
};

struct Report {
  Grouping grouping = Grouping::overall;
  std::string checkpoint;  // optimal | last
  std::vector<ReportSection> sections;
};

// Builds one section per (group, evaluation). Algorithms are the loss
// configurations; a measurement is one (dataset, model, seed, protocol,
// learner, metric, column) cell. The comp evaluation pools stat, tstr and aug.
Report build_report(const std::vector<ResultRow>& rows, Grouping grouping, const std::string& checkpoint,
                    bool tie_correction = false);

std::string render_markdown(const Report& report);
void write_report_csv(const Report& report, const std::filesystem::path& path);

// Reads <store>/results.csv and writes report_<grouping>_<checkpoint>.md plus
// a matching .csv. Returns the markdown path.
std::filesystem::path write_report(const std::filesystem::path& store_dir, Grouping grouping,
                                   const std::string& checkpoint, bool tie_correction = false);

}  // namespace tabbench
