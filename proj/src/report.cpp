#include "tabbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tabbench/csv.hpp"
#include "tabbench/error.hpp"

namespace tabbench {

namespace {

const std::vector<std::string> kEvaluations{"stat", "tstr", "aug", "comp"};

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string measurement_key(const ResultRow& r) {
  std::ostringstream key;
  key << r.dataset << '|' << r.model << "|s" << r.seed << '|' << r.evaluation << '|' << r.protocol << '|' << r.learner
      << '|' << r.metric << '|' << r.column_or_pair;
  return key.str();
}

ReportSection build_section(const std::vector<const ResultRow*>& rows, const std::vector<std::string>& algorithms,
                            const std::string& group, const std::string& evaluation, bool tie_correction) {
  ReportSection section;
  section.group = group;
  section.evaluation = evaluation;

  struct Cell {
    std::map<std::string, double> values;
    Orientation orientation = Orientation::higher_better;
    std::string metric;
  };
  std::map<std::string, Cell> cells;
  for (const ResultRow* r : rows) {
    if (evaluation != "comp" && r->evaluation != evaluation) continue;
    auto& cell = cells[measurement_key(*r)];
    cell.values[r->loss_config] = r->value;
    cell.orientation = r->orientation == "lower_better" ? Orientation::lower_better : Orientation::higher_better;
    cell.metric = r->metric;
  }

  ScoreBlock raw;
  raw.algorithms = algorithms;
  std::vector<std::vector<double>> values;
  std::vector<std::string> metrics;
  for (const auto& [key, cell] : cells) {
    if (cell.values.size() != algorithms.size()) {
      ++section.dropped_rows;
      continue;
    }
    std::vector<double> row;
    for (const auto& a : algorithms) row.push_back(cell.values.at(a));
    values.push_back(std::move(row));
    raw.measurements.push_back(key);
    raw.orientation.push_back(cell.orientation);
    metrics.push_back(cell.metric);
  }
  if (section.dropped_rows > 0)
    warn(group + "/" + evaluation + ": dropped " + std::to_string(section.dropped_rows) +
         " measurement rows missing a configuration");

  raw.values.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(algorithms.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < algorithms.size(); ++j)
      raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i][j];

  if (algorithms.size() < 2) {
    section.insufficient = true;
    section.reason = "fewer than 2 loss configurations";
    return section;
  }
  section.block = normalize_scores(raw);
  if (section.block.measurements.size() < 2) {
    section.insufficient = true;
    section.reason = "fewer than 2 complete measurement rows";
    return section;
  }

  section.ranks = rank_rows(section.block);
  section.friedman = friedman_test(section.ranks, tie_correction);
  section.table = classify_pairs(nemenyi_pairwise(section.ranks), section.ranks.mean_ranks, algorithms);

  // Metric of each surviving row, matched by measurement key.
  std::map<std::string, std::string> metric_of;
  for (std::size_t i = 0; i < raw.measurements.size(); ++i) metric_of[raw.measurements[i]] = metrics[i];
  std::map<std::string, std::vector<std::size_t>> rows_by_metric;
  for (std::size_t i = 0; i < section.block.measurements.size(); ++i)
    rows_by_metric[metric_of.at(section.block.measurements[i])].push_back(i);
  for (const auto& [metric, idx] : rows_by_metric) {
    for (std::size_t j = 0; j < algorithms.size(); ++j) {
      std::vector<double> v;
      for (std::size_t i : idx)
        v.push_back(section.block.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      section.distributions.push_back({metric, algorithms[j], v.size(), quartiles(v)});
    }
  }
  return section;
}

}  // namespace

std::string to_string(Grouping g) {
  switch (g) {
    case Grouping::overall: return "overall";
    case Grouping::dataset: return "dataset";
    case Grouping::model: return "model";
  }
  return "overall";
}

Grouping grouping_from_string(const std::string& s) {
  if (s == "overall") return Grouping::overall;
  if (s == "dataset" || s == "per_dataset") return Grouping::dataset;
  if (s == "model" || s == "per_model") return Grouping::model;
  fail(ErrorCode::InvalidArgument, "unknown grouping '" + s + "'");
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

Report build_report(const std::vector<ResultRow>& rows, Grouping grouping, const std::string& checkpoint,
                    bool tie_correction) {
  if (checkpoint != "optimal" && checkpoint != "last")
    fail(ErrorCode::InvalidArgument, "checkpoint must be optimal or last");
  Report report;
  report.grouping = grouping;
  report.checkpoint = checkpoint;

  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (r.checkpoint != checkpoint || r.loss_config == "none" || r.orientation == "info" || r.protocol == "trtr")
      continue;
    const std::string key =
        grouping == Grouping::overall ? "all" : grouping == Grouping::dataset ? r.dataset : r.model;
    groups[key].push_back(&r);
  }
  if (groups.empty()) {
    for (const auto& e : kEvaluations) {
      ReportSection s;
      s.group = "all";
      s.evaluation = e;
      s.insufficient = true;
      s.reason = "no rankable rows for this checkpoint";
      report.sections.push_back(std::move(s));
    }
    return report;
  }
  for (const auto& [group, members] : groups) {
    std::set<std::string> algos;
    for (const ResultRow* r : members) algos.insert(r->loss_config);
    const std::vector<std::string> algorithms(algos.begin(), algos.end());
    for (const auto& e : kEvaluations)
      report.sections.push_back(build_section(members, algorithms, group, e, tie_correction));
  }
  return report;
}

std::string render_markdown(const Report& report) {
  std::ostringstream md;
  md << "# Loss configuration comparison\n\n";
  md << "Grouping: " << to_string(report.grouping) << ", checkpoint: " << report.checkpoint << "\n\n";
  md << "Cell (row, column): `++` row much better (p <= 0.01), `+` better (p <= 0.05), `0` no significant "
        "difference, `-` worse, `--` much worse.\n";
  for (const auto& s : report.sections) {
    md << "\n## " << s.group << " / " << s.evaluation << "\n\n";
    if (s.insufficient) {
      md << "InsufficientData: " << s.reason << "\n";
      continue;
    }
    const auto& algos = s.table.algorithms;
    md << "n = " << s.block.measurements.size() << " measurements, k = " << algos.size() << " configurations";
    if (s.dropped_rows > 0) md << ", " << s.dropped_rows << " incomplete rows dropped";
    md << "\n\nFriedman chi-square = " << fmt(s.friedman.statistic) << ", p = " << fmt(s.friedman.p_value) << "\n\n";
    md << "| |";
    for (const auto& a : algos) md << ' ' << a << " |";
    md << " mean rank |\n|---|";
    for (std::size_t i = 0; i <= algos.size(); ++i) md << "---|";
    md << '\n';
    for (std::size_t a = 0; a < algos.size(); ++a) {
      md << "| " << algos[a] << " |";
      for (std::size_t b = 0; b < algos.size(); ++b) md << ' ' << (a == b ? "" : symbol(s.table.cells[a][b])) << " |";
      md << ' ' << fmt(s.ranks.mean_ranks(static_cast<Eigen::Index>(a)), "%.3f") << " |\n";
    }
    md << "\n| metric | config | n | min | q1 | median | q3 | max |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& d : s.distributions) {
      md << "| " << d.metric << " | " << d.algorithm << " | " << d.count << " | " << fmt(d.summary.min) << " | "
         << fmt(d.summary.q1) << " | " << fmt(d.summary.median) << " | " << fmt(d.summary.q3) << " | "
         << fmt(d.summary.max) << " |\n";
    }
  }
  return md.str();
}

void write_report_csv(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  csv::write_record(out, {"grouping", "checkpoint", "group", "evaluation", "row", "column", "symbol", "p_value",
                          "friedman_statistic", "friedman_p", "n"});
  const auto g = to_string(report.grouping);
  for (const auto& s : report.sections) {
    if (s.insufficient) {
      csv::write_record(out, {g, report.checkpoint, s.group, s.evaluation, "", "", "InsufficientData", "", "", "", "0"});
      continue;
    }
    const auto& algos = s.table.algorithms;
    for (std::size_t a = 0; a < algos.size(); ++a) {
      for (std::size_t b = 0; b < algos.size(); ++b) {
        if (a == b) continue;
        csv::write_record(out, {g, report.checkpoint, s.group, s.evaluation, algos[a], algos[b],
                                symbol(s.table.cells[a][b]),
                                fmt(s.table.p_values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), "%.6g"),
                                fmt(s.friedman.statistic, "%.6g"), fmt(s.friedman.p_value, "%.6g"),
                                std::to_string(s.block.measurements.size())});
      }
    }
  }
}

std::filesystem::path write_report(const std::filesystem::path& store_dir, Grouping grouping,
                                   const std::string& checkpoint, bool tie_correction) {
  const auto rows = read_results(store_dir / "results.csv");
  const Report report = build_report(rows, grouping, checkpoint, tie_correction);
  const std::string stem = "report_" + to_string(grouping) + "_" + checkpoint;
  const auto md_path = store_dir / (stem + ".md");
  {
    std::ofstream out(md_path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + md_path.string() + "'");
    out << render_markdown(report);
  }
  write_report_csv(report, store_dir / (stem + ".csv"));
  return md_path;
}

}  // namespace tabbench
