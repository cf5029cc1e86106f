#include "seqmotif/sessionizer.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "seqmotif/csv.hpp"
#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {

using json = nlohmann::ordered_json;

void add_size(Session& s, const std::optional<std::int64_t>& delta) {
  if (!delta) return;
  s.size_total = s.size_total.value_or(0) + *delta;
  s.size_magnitude = s.size_magnitude.value_or(0) + std::llabs(*delta);
}

}  // namespace

SessionVector sessionize(std::span<const EventRecord> events, std::chrono::seconds gap) {
  if (gap.count() < 0) throw ArgumentError("session gap must be non-negative");
  SessionVector out;
  if (events.empty()) return out;
  out.artifact_id = events.front().artifact_id;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.artifact_id != out.artifact_id) {
      throw PreconditionError("sessionize: mixed artifact ids '" + out.artifact_id + "' and '" +
                              e.artifact_id + "'");
    }
    if (i > 0 && e.timestamp < events[i - 1].timestamp) {
      throw PreconditionError("sessionize: events of '" + out.artifact_id +
                              "' are not sorted by timestamp");
    }
    if (!out.sessions.empty()) {
      Session& last = out.sessions.back();
      if (last.performer_id == e.performer_id && e.timestamp - last.end <= gap) {
        last.end = e.timestamp;
        ++last.edit_count;
        add_size(last, e.size_delta);
        continue;
      }
    }
    Session s;
    s.artifact_id = e.artifact_id;
    s.performer_id = e.performer_id;
    s.start = s.end = e.timestamp;
    s.ordinal = out.sessions.size() + 1;
    add_size(s, e.size_delta);
    out.sessions.push_back(std::move(s));
  }
  return out;
}

std::vector<SessionVector> sessionize_corpus(const EventLog& log, std::chrono::seconds gap) {
  std::vector<SessionVector> out;
  out.reserve(log.artifact_index().size());
  for (const auto& [artifact, positions] : log.artifact_index()) {
    std::vector<EventRecord> events;
    events.reserve(positions.size());
    for (auto p : positions) events.push_back(log.events()[p]);
    out.push_back(sessionize(events, gap));
  }
  return out;
}

std::size_t total_sessions(std::span<const SessionVector> vectors) {
  std::size_t n = 0;
  for (const auto& v : vectors) n += v.sessions.size();
  return n;
}

std::vector<std::int64_t> default_gap_edges() {
  return {0,    30,    60,    120,   300,    600,    900,    1800,
          3600, 7200,  21600, 43200, 86400,  604800, 2592000};
}

GapHistogram gap_histogram(const EventLog& log, std::vector<std::int64_t> upper_edges) {
  GapHistogram h;
  h.upper_edges = std::move(upper_edges);
  h.counts.assign(h.upper_edges.size() + 1, 0);
  for (const auto& [artifact, positions] : log.artifact_index()) {
    for (std::size_t i = 1; i < positions.size(); ++i) {
      const auto& prev = log.events()[positions[i - 1]];
      const auto& cur = log.events()[positions[i]];
      if (prev.performer_id != cur.performer_id) continue;
      const std::int64_t gap = (cur.timestamp - prev.timestamp).count();
      std::size_t bin = 0;
      while (bin < h.upper_edges.size() && gap > h.upper_edges[bin]) ++bin;
      ++h.counts[bin];
      ++h.total;
    }
  }
  return h;
}

void write_gap_histogram_csv(std::ostream& out, const GapHistogram& h) {
  out << "lower_exclusive_s,upper_inclusive_s,count,fraction\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const std::string lower = i == 0 ? "" : std::to_string(h.upper_edges[i - 1]);
    const std::string upper = i < h.upper_edges.size() ? std::to_string(h.upper_edges[i]) : "";
    const double frac = h.total ? static_cast<double>(h.counts[i]) / h.total : 0.0;
    out << lower << ',' << upper << ',' << h.counts[i] << ',' << frac << '\n';
  }
}

void write_sessions_jsonl(std::ostream& out, std::span<const SessionVector> vectors) {
  for (const auto& v : vectors) {
    for (const auto& s : v.sessions) {
      json obj;
      obj["artifact_id"] = s.artifact_id;
      obj["ordinal"] = s.ordinal;
      obj["performer_id"] = s.performer_id;
      obj["start"] = format_iso8601(s.start);
      obj["end"] = format_iso8601(s.end);
      obj["duration_s"] = s.duration().count();
      obj["edit_count"] = s.edit_count;
      obj["size_total"] = s.size_total ? json(*s.size_total) : json(nullptr);
      obj["size_magnitude"] = s.size_magnitude ? json(*s.size_magnitude) : json(nullptr);
      out << obj.dump() << '\n';
    }
  }
  if (!out) throw IoError("failed writing sessions");
}

std::vector<SessionVector> read_sessions_jsonl(std::istream& in) {
  std::vector<SessionVector> out;
  std::map<std::string, std::size_t> slot;
  std::string text;
  std::size_t line = 0;
  auto optional_int = [](const json& obj, const char* key) -> std::optional<std::int64_t> {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return it->get<std::int64_t>();
  };
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Session s;
    try {
      const json obj = json::parse(text);
      s.artifact_id = obj.at("artifact_id").get<std::string>();
      s.performer_id = obj.at("performer_id").get<std::string>();
      s.ordinal = obj.at("ordinal").get<std::size_t>();
      s.edit_count = obj.at("edit_count").get<std::int64_t>();
      const auto start = parse_iso8601(obj.at("start").get<std::string>());
      const auto end = parse_iso8601(obj.at("end").get<std::string>());
      if (!start || !end) throw ParseError(line, "bad session timestamp");
      s.start = *start;
      s.end = *end;
      s.size_total = optional_int(obj, "size_total");
      s.size_magnitude = optional_int(obj, "size_magnitude");
    } catch (const json::exception& e) {
      throw ParseError(line, "sessions line " + std::to_string(line) + ": " + e.what());
    }
    if (s.end < s.start || s.edit_count < 1) {
      throw ParseError(line, "sessions line " + std::to_string(line) + ": invalid session");
    }
    auto [it, inserted] = slot.try_emplace(s.artifact_id, out.size());
    if (inserted) out.push_back(SessionVector{s.artifact_id, {}});
    auto& vec = out[it->second];
    if (s.ordinal != vec.sessions.size() + 1) {
      throw ParseError(line, "sessions line " + std::to_string(line) + ": ordinal " +
                                 std::to_string(s.ordinal) + " out of sequence for '" +
                                 s.artifact_id + "'");
    }
    vec.sessions.push_back(std::move(s));
  }
  if (in.bad()) throw IoError("failed reading sessions");
  return out;
}

std::vector<SessionVector> read_sessions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_sessions_jsonl(in);
}

}  // namespace seqmotif
