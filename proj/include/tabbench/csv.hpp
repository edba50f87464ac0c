#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabbench::csv {

using Record = std::vector<std::string>;

// RFC-4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks. CRLF and LF line endings are both accepted. A trailing empty
// line is not reported as a record.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input.
  bool next(Record& record);

  // 1-based physical line on which the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::vector<Record> read_all(std::istream& in);

// Quotes a field only when it contains a separator, quote or line break.
std::string escape(const std::string& field);
void write_record(std::ostream& out, const Record& record);

}  // namespace tabbench::csv
