#include "tabbench/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tabbench/csv.hpp"
#include "tabbench/error.hpp"

namespace tabbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return in;
}

bool is_blank(const csv::Record& rec) {
  return rec.size() == 1 && trim(rec[0]).empty();
}

}  // namespace

// ---- schema ---------------------------------------------------------------

std::optional<std::size_t> Categorical::index_of(const std::string& label) const {
  const auto it = std::find(categories.begin(), categories.end(), label);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

bool Continuous::has_range() const {
  return !std::isnan(observed_min) && !std::isnan(observed_max);
}

std::size_t ColumnSpec::encoded_width() const {
  return is_categorical() ? categorical().categories.size() : 1;
}

std::string to_string(Task task) {
  switch (task) {
    case Task::classification: return "classification";
    case Task::regression: return "regression";
    case Task::none: break;
  }
  return "none";
}

Task task_from_string(const std::string& s) {
  if (s == "classification") return Task::classification;
  if (s == "regression") return Task::regression;
  if (s == "none" || s.empty()) return Task::none;
  fail(ErrorCode::InvalidArgument, "unknown task '" + s + "'");
}

std::optional<std::size_t> TableSchema::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

void TableSchema::validate() const {
  std::set<std::string> names;
  for (const auto& col : columns) {
    if (col.name.empty()) fail(ErrorCode::SchemaMismatch, "column name must be non-empty");
    if (!names.insert(col.name).second)
      fail(ErrorCode::SchemaMismatch, "duplicate column name '" + col.name + "'");
    if (col.is_categorical()) {
      const auto& cats = col.categorical().categories;
      if (cats.empty())
        fail(ErrorCode::SchemaMismatch, "categorical column '" + col.name + "' has no categories");
      std::set<std::string> distinct(cats.begin(), cats.end());
      if (distinct.size() != cats.size())
        fail(ErrorCode::SchemaMismatch, "categorical column '" + col.name + "' has repeated categories");
    } else {
      const auto& c = col.continuous();
      if (c.has_range() && c.observed_min > c.observed_max)
        fail(ErrorCode::SchemaMismatch, "continuous column '" + col.name + "' has min > max");
    }
  }
  if (task != Task::none) {
    if (!target_index || *target_index >= columns.size())
      fail(ErrorCode::SchemaMismatch, "task set but target column missing or out of range");
    const auto& target = columns[*target_index];
    if (task == Task::classification && !target.is_categorical())
      fail(ErrorCode::SchemaMismatch, "classification target '" + target.name + "' must be categorical");
    if (task == Task::regression && !target.is_continuous())
      fail(ErrorCode::SchemaMismatch, "regression target '" + target.name + "' must be continuous");
  } else if (target_index && *target_index >= columns.size()) {
    fail(ErrorCode::SchemaMismatch, "target index out of range");
  }
}

// ---- table ----------------------------------------------------------------

std::vector<double> Table::numeric_column(std::size_t col) const {
  if (!schema[col].is_continuous())
    fail(ErrorCode::NotContinuous, "column '" + schema[col].name + "' is not continuous");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(std::get<double>(row[col]));
  return out;
}

std::vector<std::size_t> Table::category_column(std::size_t col) const {
  if (!schema[col].is_categorical())
    fail(ErrorCode::NotCategorical, "column '" + schema[col].name + "' is not categorical");
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(std::get<Category>(row[col]).index);
  return out;
}

std::vector<std::size_t> Table::category_counts(std::size_t col) const {
  std::vector<std::size_t> counts(schema[col].encoded_width(), 0);
  for (auto idx : category_column(col)) ++counts[idx];
  return counts;
}

void Table::validate() const {
  schema.validate();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != schema.size())
      fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " has wrong length");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (schema[c].is_categorical()) {
        const auto* cat = std::get_if<Category>(&row[c]);
        if (!cat) fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + ": numeric cell in categorical column");
        if (cat->index >= schema[c].categorical().categories.size())
          fail(ErrorCode::UnknownCategory, "row " + std::to_string(r) + ": category index out of range");
      } else {
        const auto* num = std::get_if<double>(&row[c]);
        if (!num) fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + ": categorical cell in continuous column");
        if (!std::isfinite(*num)) fail(ErrorCode::Parse, "row " + std::to_string(r) + ": non-finite value");
      }
    }
  }
}

Table Table::subset(const std::vector<std::size_t>& indices) const {
  Table out{schema, {}};
  out.rows.reserve(indices.size());
  for (auto i : indices) out.rows.push_back(rows.at(i));
  return out;
}

Table concat(const Table& a, const Table& b) {
  if (!(a.schema == b.schema)) fail(ErrorCode::SchemaMismatch, "cannot concatenate tables with different schemas");
  Table out = a;
  out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
  return out;
}

// ---- schema files -----------------------------------------------------------

TableSchema schema_from_json(const nlohmann::json& doc) {
  TableSchema schema;
  try {
    for (const auto& col : doc.at("columns")) {
      ColumnSpec spec;
      spec.name = col.at("name").get<std::string>();
      const auto kind = col.at("kind").get<std::string>();
      if (kind == "categorical") {
        Categorical cat;
        for (const auto& c : col.at("categories")) {
          cat.categories.push_back(c.is_string() ? c.get<std::string>() : c.dump());
        }
        spec.kind = std::move(cat);
      } else if (kind == "continuous") {
        Continuous cont{kNaN, kNaN};
        if (col.contains("min") && col.contains("max")) {
          cont.observed_min = col["min"].get<double>();
          cont.observed_max = col["max"].get<double>();
        }
        spec.kind = cont;
      } else {
        fail(ErrorCode::SchemaMismatch, "unknown column kind '" + kind + "'");
      }
      schema.columns.push_back(std::move(spec));
    }
    if (doc.contains("target") && !doc["target"].is_null()) {
      const auto& t = doc["target"];
      if (t.is_string()) {
        auto idx = schema.find(t.get<std::string>());
        if (!idx) fail(ErrorCode::SchemaMismatch, "target column '" + t.get<std::string>() + "' not found");
        schema.target_index = idx;
      } else {
        schema.target_index = t.get<std::size_t>();
      }
    }
    if (doc.contains("task")) schema.task = task_from_string(doc["task"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::SchemaMismatch, std::string("malformed schema document: ") + e.what());
  }
  schema.validate();
  return schema;
}

nlohmann::json schema_to_json(const TableSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : schema.columns) {
    nlohmann::json c{{"name", col.name}};
    if (col.is_categorical()) {
      c["kind"] = "categorical";
      c["categories"] = col.categorical().categories;
    } else {
      c["kind"] = "continuous";
      if (col.continuous().has_range()) {
        c["min"] = col.continuous().observed_min;
        c["max"] = col.continuous().observed_max;
      }
    }
    cols.push_back(std::move(c));
  }
  nlohmann::json doc{{"columns", std::move(cols)}};
  if (schema.target_index) doc["target"] = schema.columns[*schema.target_index].name;
  doc["task"] = to_string(schema.task);
  return doc;
}

TableSchema load_schema(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "invalid JSON in '" + path.string() + "': " + e.what());
  }
  return schema_from_json(doc);
}

void save_schema(const TableSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << schema_to_json(schema).dump(2) << '\n';
}

// ---- ingestion --------------------------------------------------------------

Table load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  schema.validate();
  auto in = open_input(path);
  csv::Reader reader(in);
  csv::Record rec;
  if (!reader.next(rec)) fail(ErrorCode::SchemaMismatch, "'" + path.string() + "' has no header row");
  if (rec.size() != schema.size())
    fail(ErrorCode::SchemaMismatch, "header has " + std::to_string(rec.size()) + " columns, schema has " +
                                        std::to_string(schema.size()));
  for (std::size_t c = 0; c < rec.size(); ++c) {
    if (std::string(trim(rec[c])) != schema[c].name)
      fail(ErrorCode::SchemaMismatch, "header column " + std::to_string(c) + " is '" + rec[c] +
                                          "', expected '" + schema[c].name + "'");
  }

  Table table{schema, {}};
  while (reader.next(rec)) {
    if (is_blank(rec)) continue;
    const std::size_t row_index = table.rows.size();
    if (rec.size() != schema.size())
      fail(ErrorCode::SchemaMismatch, "row " + std::to_string(row_index) + " has " + std::to_string(rec.size()) +
                                          " fields, expected " + std::to_string(schema.size()));
    Row row;
    row.reserve(rec.size());
    for (std::size_t c = 0; c < rec.size(); ++c) {
      const auto& col = schema[c];
      if (col.is_categorical()) {
        const std::string label(trim(rec[c]));
        if (label.empty())
          fail(ErrorCode::Parse, "missing value at row " + std::to_string(row_index) + ", column '" + col.name + "'");
        auto idx = col.categorical().index_of(label);
        if (!idx)
          fail(ErrorCode::UnknownCategory, "unknown category '" + label + "' at row " + std::to_string(row_index) +
                                               ", column '" + col.name + "'");
        row.emplace_back(Category{*idx});
      } else {
        auto value = parse_number(rec[c]);
        if (!value)
          fail(ErrorCode::Parse, "cannot parse '" + rec[c] + "' as a number at row " + std::to_string(row_index) +
                                     ", column '" + col.name + "'");
        row.emplace_back(*value);
      }
    }
    table.rows.push_back(std::move(row));
  }

  for (std::size_t c = 0; c < schema.size(); ++c) {
    auto& col = table.schema.columns[c];
    if (!col.is_continuous() || col.continuous().has_range()) continue;
    Continuous range{kNaN, kNaN};
    if (!table.rows.empty()) {
      const auto values = table.numeric_column(c);
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      range = {*lo, *hi};
    }
    col.kind = range;
  }
  return table;
}

TableSchema infer_schema(const std::filesystem::path& path, std::size_t categorical_threshold) {
  auto in = open_input(path);
  auto records = csv::read_all(in);
  std::erase_if(records, is_blank);
  if (records.empty()) fail(ErrorCode::EmptyTable, "'" + path.string() + "' has no header row");
  if (records.size() < 2) fail(ErrorCode::EmptyTable, "'" + path.string() + "' has no data rows");
  const auto& header = records.front();

  TableSchema schema;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::set<std::string> distinct;
    bool all_numeric = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].size() != header.size())
        fail(ErrorCode::SchemaMismatch, "row " + std::to_string(r - 1) + " has wrong field count");
      const std::string cell(trim(records[r][c]));
      if (cell.empty())
        fail(ErrorCode::Parse, "missing value at row " + std::to_string(r - 1) + ", column " + std::to_string(c));
      distinct.insert(cell);
      if (auto v = parse_number(cell)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      } else {
        all_numeric = false;
      }
    }
    ColumnSpec spec{std::string(trim(header[c])), Continuous{lo, hi}};
    if (!all_numeric || distinct.size() <= categorical_threshold) {
      std::vector<std::string> cats(distinct.begin(), distinct.end());
      if (all_numeric) {
        std::stable_sort(cats.begin(), cats.end(), [](const std::string& a, const std::string& b) {
          return *parse_number(a) < *parse_number(b);
        });
      }
      spec.kind = Categorical{std::move(cats)};
    }
    schema.columns.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

std::string format_cell(const ColumnSpec& column, const Cell& cell) {
  if (column.is_categorical()) return column.categorical().categories.at(std::get<Category>(cell).index);
  return format_double(std::get<double>(cell));
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  csv::Record rec;
  for (const auto& col : table.schema.columns) rec.push_back(col.name);
  csv::write_record(out, rec);
  for (const auto& row : table.rows) {
    rec.clear();
    for (std::size_t c = 0; c < row.size(); ++c) rec.push_back(format_cell(table.schema[c], row[c]));
    csv::write_record(out, rec);
  }
  if (!out) fail(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

// ---- splitting --------------------------------------------------------------

SplitIndices split_indices(const Table& table, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  const std::size_t n = table.row_count();
  const auto train_size = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n < 2 || train_size == 0 || train_size == n)
    fail(ErrorCode::DegenerateSplit, "split of " + std::to_string(n) + " rows at fraction " +
                                         std::to_string(train_fraction) + " leaves one side empty");

  // Groups: one per class with >= 2 rows; everything else in a shared pool.
  std::vector<std::vector<std::size_t>> groups;
  const auto& schema = table.schema;
  if (schema.task == Task::classification && schema.target_index) {
    const auto labels = table.category_column(*schema.target_index);
    std::vector<std::vector<std::size_t>> by_class(schema[*schema.target_index].encoded_width());
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> pool;
    for (auto& members : by_class) {
      if (members.size() >= 2) {
        groups.push_back(std::move(members));
      } else {
        pool.insert(pool.end(), members.begin(), members.end());
      }
    }
    if (!pool.empty()) groups.push_back(std::move(pool));
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    groups.push_back(std::move(all));
  }

  std::mt19937_64 rng(seed);
  for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);

  // Floor quotas, then hand out the remaining slots by largest remainder.
  std::vector<std::size_t> quota(groups.size());
  std::vector<double> remainder(groups.size());
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double exact = static_cast<double>(groups[g].size()) * train_fraction;
    quota[g] = static_cast<std::size_t>(std::floor(exact));
    remainder[g] = exact - static_cast<double>(quota[g]);
    assigned += quota[g];
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t g : order) {
    if (assigned >= train_size) break;
    if (quota[g] < groups[g].size()) {
      ++quota[g];
      ++assigned;
    }
  }

  SplitIndices out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.train.insert(out.train.end(), groups[g].begin(), groups[g].begin() + static_cast<std::ptrdiff_t>(quota[g]));
    out.test.insert(out.test.end(), groups[g].begin() + static_cast<std::ptrdiff_t>(quota[g]), groups[g].end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Table, Table> split(const Table& table, double train_fraction, std::uint64_t seed) {
  const auto idx = split_indices(table, train_fraction, seed);
  return {table.subset(idx.train), table.subset(idx.test)};
}

// ---- encoding ---------------------------------------------------------------

double scale_value(const Continuous& spec, double value) {
  const double span = spec.observed_max - spec.observed_min;
  if (!(span > 0.0)) return 0.0;
  return (value - spec.observed_min) / span;
}

double unscale_value(const Continuous& spec, double scaled) {
  const double span = spec.observed_max - spec.observed_min;
  if (!(span > 0.0)) return spec.observed_min;
  const double v = spec.observed_min + scaled * span;
  return std::clamp(v, spec.observed_min, spec.observed_max);
}

std::vector<ColumnBlock> make_layout(const TableSchema& schema) {
  std::vector<ColumnBlock> layout;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& col = schema[c];
    ColumnBlock block{c, offset, col.encoded_width(), col.is_categorical(), false};
    if (col.is_continuous()) {
      const auto& cont = col.continuous();
      if (!cont.has_range())
        fail(ErrorCode::SchemaMismatch, "continuous column '" + col.name + "' has no observed range");
      block.constant = !(cont.observed_max > cont.observed_min);
    }
    layout.push_back(block);
    offset += block.width;
  }
  return layout;
}

EncodedMatrix encode(const Table& table) {
  if (table.rows.empty()) fail(ErrorCode::EmptyTable, "cannot encode an empty table");
  EncodedMatrix out;
  out.schema = table.schema;
  out.layout = make_layout(table.schema);
  const std::size_t width = out.layout.empty() ? 0 : out.layout.back().offset + out.layout.back().width;
  out.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.row_count()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto& row = table.rows[r];
    const auto ri = static_cast<Eigen::Index>(r);
    for (const auto& block : out.layout) {
      const auto& col = table.schema[block.column_index];
      const auto& cell = row[block.column_index];
      if (col.is_categorical()) {
        out.data(ri, static_cast<Eigen::Index>(block.offset + std::get<Category>(cell).index)) = 1.0;
      } else if (!block.constant) {
        out.data(ri, static_cast<Eigen::Index>(block.offset)) = scale_value(col.continuous(), std::get<double>(cell));
      }
    }
  }
  return out;
}

Table decode(const Eigen::MatrixXd& data, const TableSchema& schema) {
  EncodedMatrix m{data, make_layout(schema), schema};
  return decode(m);
}

Table decode(const EncodedMatrix& matrix) {
  const auto expected = make_layout(matrix.schema);
  if (matrix.layout != expected) fail(ErrorCode::LayoutMismatch, "layout does not match schema");
  const std::size_t width = expected.empty() ? 0 : expected.back().offset + expected.back().width;
  if (static_cast<std::size_t>(matrix.data.cols()) != width)
    fail(ErrorCode::LayoutMismatch, "matrix width " + std::to_string(matrix.data.cols()) + " != layout width " +
                                        std::to_string(width));

  Table out{matrix.schema, {}};
  out.rows.reserve(static_cast<std::size_t>(matrix.data.rows()));
  for (Eigen::Index r = 0; r < matrix.data.rows(); ++r) {
    Row row(matrix.schema.size());
    for (const auto& block : matrix.layout) {
      const auto& col = matrix.schema[block.column_index];
      const auto off = static_cast<Eigen::Index>(block.offset);
      if (col.is_categorical()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < block.width; ++k) {
          if (matrix.data(r, off + static_cast<Eigen::Index>(k)) > matrix.data(r, off + static_cast<Eigen::Index>(best)))
            best = k;
        }
        row[block.column_index] = Category{best};
      } else {
        row[block.column_index] = unscale_value(col.continuous(), matrix.data(r, off));
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace tabbench
