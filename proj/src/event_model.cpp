#include "seqmotif/event_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "seqmotif/csv.hpp"
#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {

using json = nlohmann::ordered_json;

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      return false;
    }
    if (extra > 0 && i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Builds a record from raw strings or explains why it can't.
std::optional<std::string> make_record(std::string artifact, std::string performer,
                                       std::string activity, std::string_view timestamp,
                                       std::optional<std::string_view> size_delta,
                                       EventRecord& out) {
  if (artifact.empty()) return "empty artifact_id";
  if (performer.empty()) return "empty performer_id";
  const auto ts = parse_iso8601(timestamp);
  if (!ts) return "unparseable timestamp '" + std::string(timestamp) + "'";
  out.artifact_id = std::move(artifact);
  out.performer_id = std::move(performer);
  out.activity = std::move(activity);
  out.timestamp = *ts;
  out.size_delta.reset();
  if (size_delta && !size_delta->empty()) {
    const auto v = parse_int(*size_delta);
    if (!v) return "size_delta is not an integer: '" + std::string(*size_delta) + "'";
    out.size_delta = *v;
  }
  return std::nullopt;
}

class IssueSink {
 public:
  IssueSink(ParseResult& result, bool strict) : result_(result), strict_(strict) {}
  void report(std::size_t line, std::string message) {
    if (strict_) {
      throw ParseError(line, "line " + std::to_string(line) + ": " + message);
    }
    result_.skipped.push_back({line, std::move(message)});
  }

 private:
  ParseResult& result_;
  bool strict_;
};

ParseResult parse_csv(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  IssueSink issues(result, options.strict);
  csv::Reader reader(in);
  std::vector<std::string> fields;

  std::vector<std::string> header;
  while (reader.next(fields)) {
    if (!fields.empty()) {
      header = fields;
      break;
    }
  }
  if (in.bad()) throw IoError("failed reading event log");
  if (!header.empty() && !header[0].empty() &&
      header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header[0].erase(0, 3);
  }
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw SchemaError(name, "missing required column '" + name + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto artifact_col = *column("artifact_id", true);
  const auto performer_col = *column("performer_id", true);
  const auto timestamp_col = *column("timestamp", true);
  const auto activity_col = column("activity", false);
  const auto size_col = column("size_delta", false);

  std::vector<EventRecord> events;
  while (reader.next(fields)) {
    const std::size_t line = reader.record_line();
    if (fields.empty()) continue;
    if (reader.malformed()) {
      issues.report(line, "unterminated quoted field");
      continue;
    }
    if (fields.size() != header.size()) {
      issues.report(line, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
      continue;
    }
    bool utf8_ok = true;
    for (const auto& f : fields) utf8_ok = utf8_ok && valid_utf8(f);
    if (!utf8_ok) {
      issues.report(line, "invalid UTF-8");
      continue;
    }
    EventRecord rec;
    std::optional<std::string_view> size;
    if (size_col) size = fields[*size_col];
    if (auto err = make_record(fields[artifact_col], fields[performer_col],
                               activity_col ? fields[*activity_col] : std::string{},
                               fields[timestamp_col], size, rec)) {
      issues.report(line, *err);
      continue;
    }
    events.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("failed reading event log");
  result.log = EventLog(std::move(events));
  return result;
}

ParseResult parse_jsonl(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  IssueSink issues(result, options.strict);
  std::vector<EventRecord> events;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::exception& e) {
      issues.report(line, std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (!obj.is_object()) {
      issues.report(line, "line is not a JSON object");
      continue;
    }
    auto get_string = [&](const char* key, bool required,
                          std::string& out) -> std::optional<std::string> {
      const auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        if (required) return std::string("missing key '") + key + "'";
        out.clear();
        return std::nullopt;
      }
      if (!it->is_string()) return std::string("key '") + key + "' is not a string";
      out = it->get<std::string>();
      return std::nullopt;
    };
    std::string artifact, performer, activity, timestamp;
    std::optional<std::string> err;
    if (!(err = get_string("artifact_id", true, artifact)) &&
        !(err = get_string("performer_id", true, performer)) &&
        !(err = get_string("timestamp", true, timestamp))) {
      err = get_string("activity", false, activity);
    }
    std::optional<std::string> size_text;
    if (!err) {
      const auto it = obj.find("size_delta");
      if (it != obj.end() && !it->is_null()) {
        if (it->is_number_integer()) {
          size_text = std::to_string(it->get<std::int64_t>());
        } else {
          err = "size_delta is not an integer";
        }
      }
    }
    if (err) {
      issues.report(line, *err);
      continue;
    }
    EventRecord rec;
    std::optional<std::string_view> size;
    if (size_text) size = *size_text;
    if (auto e = make_record(std::move(artifact), std::move(performer), std::move(activity),
                             timestamp, size, rec)) {
      issues.report(line, *e);
      continue;
    }
    events.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("failed reading event log");
  result.log = EventLog(std::move(events));
  return result;
}

auto sort_key(const EventRecord& e) {
  return std::tie(e.artifact_id, e.timestamp, e.performer_id);
}

}  // namespace

std::optional<LogFormat> format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return LogFormat::csv;
  if (ext == ".jsonl" || ext == ".ndjson") return LogFormat::jsonl;
  return std::nullopt;
}

EventLog::EventLog(std::vector<EventRecord> events) : events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    index_[events_[i].artifact_id].push_back(i);
  }
}

std::vector<std::string> EventLog::artifact_ids() const {
  std::vector<std::string> ids;
  ids.reserve(index_.size());
  for (const auto& [id, _] : index_) ids.push_back(id);
  return ids;
}

std::vector<EventRecord> EventLog::artifact_events(const std::string& artifact_id) const {
  std::vector<EventRecord> out;
  if (const auto it = index_.find(artifact_id); it != index_.end()) {
    out.reserve(it->second.size());
    for (auto pos : it->second) out.push_back(events_[pos]);
  }
  return out;
}

std::size_t EventLog::performer_count() const {
  std::set<std::string_view> performers;
  for (const auto& e : events_) performers.insert(e.performer_id);
  return performers.size();
}

ParseResult parse_event_log(std::istream& in, LogFormat format, const ParseOptions& options) {
  if (!in) throw IoError("event log stream is not readable");
  return format == LogFormat::csv ? parse_csv(in, options) : parse_jsonl(in, options);
}

ParseResult read_event_log(const std::filesystem::path& path, std::optional<LogFormat> format,
                           const ParseOptions& options) {
  if (!format) format = format_from_path(path);
  if (!format) throw ArgumentError("cannot infer log format from '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_event_log(in, *format, options);
}

EventLog normalize(const EventLog& log) {
  std::vector<EventRecord> events = log.events();
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     return sort_key(a) < sort_key(b);
                   });
  // stable_sort keeps log order among exact key ties, so unique() keeps the first.
  events.erase(std::unique(events.begin(), events.end(),
                           [](const EventRecord& a, const EventRecord& b) {
                             return sort_key(a) == sort_key(b);
                           }),
               events.end());
  return EventLog(std::move(events));
}

bool is_normalized(const EventLog& log) {
  const auto& ev = log.events();
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (!(sort_key(ev[i - 1]) < sort_key(ev[i]))) return false;
  }
  return true;
}

void write_event_log(std::ostream& out, const EventLog& log, LogFormat format) {
  if (format == LogFormat::csv) {
    out << kEventCsvHeader << '\n';
    for (const auto& e : log.events()) {
      csv::write_row(out, {e.artifact_id, e.performer_id, e.activity,
                           format_iso8601(e.timestamp),
                           e.size_delta ? std::to_string(*e.size_delta) : std::string{}});
    }
  } else {
    for (const auto& e : log.events()) {
      json obj;
      obj["artifact_id"] = e.artifact_id;
      obj["performer_id"] = e.performer_id;
      obj["activity"] = e.activity;
      obj["timestamp"] = format_iso8601(e.timestamp);
      obj["size_delta"] = e.size_delta ? json(*e.size_delta) : json(nullptr);
      out << obj.dump() << '\n';
    }
  }
  if (!out) throw IoError("failed writing event log");
}

void write_event_log(const std::filesystem::path& path, const EventLog& log,
                     std::optional<LogFormat> format) {
  if (!format) format = format_from_path(path);
  if (!format) throw ArgumentError("cannot infer log format from '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_event_log(out, log, *format);
}

}  // namespace seqmotif
