#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace advtext::csv {

// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Throws DataError on an
  // unterminated quoted field.
  std::optional<std::vector<std::string>> next();

  // Physical line on which the last returned record started (1-based).
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::string escape_field(const std::string& field);

std::string format_row(const std::vector<std::string>& fields);

}  // namespace advtext::csv
