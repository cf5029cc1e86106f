#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace seqmotif::csv {

// RFC 4180 record reader. Quoted fields may contain commas, doubled quotes
// and line breaks. Returns false at end of input. `line` is advanced past
// every physical line consumed and is left pointing at the record's first
// line on return.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);
  std::size_t record_line() const { return record_line_; }
  // True when the last record had an unterminated quote.
  bool malformed() const { return malformed_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
  bool malformed_ = false;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace seqmotif::csv
