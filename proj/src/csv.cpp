#include "seqmotif/csv.hpp"

namespace seqmotif::csv {

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  malformed_ = false;
  std::string line;
  if (!std::getline(in_, line)) return false;
  record_line_ = ++line_;

  std::string field;
  bool quoted = false;
  bool any = false;
  for (;;) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      any = true;
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    if (!quoted) break;
    std::string continuation;
    if (!std::getline(in_, continuation)) {
      malformed_ = true;
      break;
    }
    ++line_;
    field.push_back('\n');
    line = std::move(continuation);
  }
  if (any || !fields.empty()) fields.push_back(std::move(field));
  return true;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace seqmotif::csv
