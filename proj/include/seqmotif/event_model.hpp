#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/time.hpp"

namespace seqmotif {

// One logged action: who did what to which artifact, and when.
struct EventRecord {
  std::string artifact_id;
  std::string performer_id;  // registered username or IP address
  std::string activity;      // opaque tag, may be empty
  Instant timestamp;
  std::optional<std::int64_t> size_delta;

  bool operator==(const EventRecord&) const = default;
};

enum class LogFormat { csv, jsonl };

// Picks the format from a file extension (".csv", ".jsonl", ".ndjson").
std::optional<LogFormat> format_from_path(const std::filesystem::path& path);

class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<EventRecord> events);

  const std::vector<EventRecord>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  // artifact_id -> positions into events(), in log order.
  const std::map<std::string, std::vector<std::size_t>>& artifact_index() const {
    return index_;
  }
  std::vector<std::string> artifact_ids() const;
  std::vector<EventRecord> artifact_events(const std::string& artifact_id) const;
  std::size_t performer_count() const;

  bool operator==(const EventLog& other) const { return events_ == other.events_; }

 private:
  std::vector<EventRecord> events_;
  std::map<std::string, std::vector<std::size_t>> index_;
};

struct RowIssue {
  std::size_t line = 0;  // 1-based physical line of the offending row
  std::string message;
};

struct ParseOptions {
  // Turn the first malformed row into a ParseError instead of skipping it.
  bool strict = false;
};

struct ParseResult {
  EventLog log;
  std::vector<RowIssue> skipped;
};

// CSV needs a header naming at least artifact_id, performer_id and timestamp;
// activity and size_delta are optional columns. JSONL carries the same keys
// per line. Malformed rows are collected in `skipped` and dropped.
ParseResult parse_event_log(std::istream& in, LogFormat format,
                            const ParseOptions& options = {});
ParseResult read_event_log(const std::filesystem::path& path,
                           std::optional<LogFormat> format = std::nullopt,
                           const ParseOptions& options = {});

// Sorts by (artifact_id, timestamp, performer_id) and drops exact duplicates
// on (artifact_id, performer_id, timestamp), keeping the first in log order.
EventLog normalize(const EventLog& log);

bool is_normalized(const EventLog& log);

void write_event_log(std::ostream& out, const EventLog& log, LogFormat format);
void write_event_log(const std::filesystem::path& path, const EventLog& log,
                     std::optional<LogFormat> format = std::nullopt);

inline constexpr const char* kEventCsvHeader =
    "artifact_id,performer_id,activity,timestamp,size_delta";

}  // namespace seqmotif
