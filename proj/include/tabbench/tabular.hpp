#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace tabbench {

struct Categorical {
  std::vector<std::string> categories;

  std::optional<std::size_t> index_of(const std::string& label) const;
  bool operator==(const Categorical&) const = default;
};

// Range may be unknown (NaN) on a schema read from a file without explicit
// bounds; load_csv fills it in from the data.
struct Continuous {
  double observed_min = 0.0;
  double observed_max = 0.0;

  bool has_range() const;
  bool operator==(const Continuous&) const = default;
};

struct ColumnSpec {
  std::string name;
  std::variant<Categorical, Continuous> kind;

  bool is_categorical() const { return std::holds_alternative<Categorical>(kind); }
  bool is_continuous() const { return std::holds_alternative<Continuous>(kind); }
  const Categorical& categorical() const { return std::get<Categorical>(kind); }
  const Continuous& continuous() const { return std::get<Continuous>(kind); }
  std::size_t encoded_width() const;

  bool operator==(const ColumnSpec&) const = default;
};

enum class Task { none, classification, regression };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

struct TableSchema {
  std::vector<ColumnSpec> columns;
  std::optional<std::size_t> target_index;
  Task task = Task::none;

  std::size_t size() const { return columns.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns[i]; }
  std::optional<std::size_t> find(const std::string& name) const;

  // Throws SchemaMismatch / InvalidArgument on violated invariants.
  void validate() const;

  bool operator==(const TableSchema&) const = default;
};

struct Category {
  std::size_t index = 0;
  bool operator==(const Category&) const = default;
};

using Cell = std::variant<Category, double>;
using Row = std::vector<Cell>;

struct Table {
  TableSchema schema;
  std::vector<Row> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return schema.size(); }

  // Continuous column as a numeric vector.
  std::vector<double> numeric_column(std::size_t col) const;
  // Category index per row of a categorical column.
  std::vector<std::size_t> category_column(std::size_t col) const;
  std::vector<std::size_t> category_counts(std::size_t col) const;

  // Throws on any violated row invariant.
  void validate() const;

  Table subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const Table&) const = default;
};

Table concat(const Table& a, const Table& b);

// ---- schema files -------------------------------------------------------

TableSchema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const TableSchema& schema);
TableSchema load_schema(const std::filesystem::path& path);
void save_schema(const TableSchema& schema, const std::filesystem::path& path);

// ---- ingestion ----------------------------------------------------------

// Continuous columns with unknown range get the observed data range.
Table load_csv(const std::filesystem::path& path, const TableSchema& schema);
TableSchema infer_schema(const std::filesystem::path& path, std::size_t categorical_threshold);
void write_csv(const Table& table, const std::filesystem::path& path);
std::string format_cell(const ColumnSpec& column, const Cell& cell);

// ---- splitting ----------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitIndices split_indices(const Table& table, double train_fraction, std::uint64_t seed);
std::pair<Table, Table> split(const Table& table, double train_fraction, std::uint64_t seed);

// ---- encoding -----------------------------------------------------------

struct ColumnBlock {
  std::size_t column_index = 0;
  std::size_t offset = 0;
  std::size_t width = 0;
  bool categorical = false;
  bool constant = false;  // continuous column with min == max

  bool operator==(const ColumnBlock&) const = default;
};

std::vector<ColumnBlock> make_layout(const TableSchema& schema);

struct EncodedMatrix {
  Eigen::MatrixXd data;
  std::vector<ColumnBlock> layout;
  TableSchema schema;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index width() const { return data.cols(); }
};

EncodedMatrix encode(const Table& table);
Table decode(const EncodedMatrix& matrix);
// Decodes raw rows against a schema (layout derived from the schema).
Table decode(const Eigen::MatrixXd& data, const TableSchema& schema);

double scale_value(const Continuous& spec, double value);
double unscale_value(const Continuous& spec, double scaled);

}  // namespace tabbench
