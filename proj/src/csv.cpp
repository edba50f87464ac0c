#include "tabbench/csv.hpp"

#include <istream>
#include <ostream>

namespace tabbench::csv {

bool Reader::next(Record& record) {
  record.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  record_line_ = line_;

  for (int ch = in_.get(); ch != std::char_traits<char>::eof(); ch = in_.get()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        [[fallthrough]];
      case '\n':
        ++line_;
        record.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
    }
  }
  if (!any) return false;
  record.push_back(std::move(field));
  return true;
}

std::vector<Record> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Record> out;
  Record rec;
  while (reader.next(rec)) out.push_back(rec);
  return out;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, const Record& record) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) out << ',';
    out << escape(record[i]);
  }
  out << '\n';
}

}  // namespace tabbench::csv
