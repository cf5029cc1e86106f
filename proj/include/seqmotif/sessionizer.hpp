#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/event_model.hpp"

namespace seqmotif {

inline constexpr std::chrono::seconds kDefaultSessionGap{600};

// A run of consecutive events by one performer on one artifact.
struct Session {
  std::string artifact_id;
  std::string performer_id;
  Instant start;
  Instant end;
  std::int64_t edit_count = 1;
  std::optional<std::int64_t> size_total;      // sum of signed size deltas
  std::optional<std::int64_t> size_magnitude;  // sum of |size delta|
  std::size_t ordinal = 1;                     // 1-based within the artifact

  std::chrono::seconds duration() const { return end - start; }
  bool operator==(const Session&) const = default;
};

struct SessionVector {
  std::string artifact_id;
  std::vector<Session> sessions;

  bool operator==(const SessionVector&) const = default;
};

// Merges adjacent events into one session when they share a performer and
// the gap between neighbouring timestamps is at most `gap`. Any event by a
// different performer ends the run. Input must be one artifact's events in
// non-decreasing timestamp order.
SessionVector sessionize(std::span<const EventRecord> events, std::chrono::seconds gap);

// One vector per artifact, ordered by artifact_id. The log must be normalized.
std::vector<SessionVector> sessionize_corpus(const EventLog& log, std::chrono::seconds gap);

std::size_t total_sessions(std::span<const SessionVector> vectors);

// Distribution of gaps between consecutive same-performer events within an
// artifact, for choosing a session threshold.
struct GapHistogram {
  std::vector<std::int64_t> upper_edges;  // bin i holds gaps <= upper_edges[i]
  std::vector<std::uint64_t> counts;      // one more entry than edges: overflow
  std::uint64_t total = 0;
};

std::vector<std::int64_t> default_gap_edges();
GapHistogram gap_histogram(const EventLog& log,
                           std::vector<std::int64_t> upper_edges = default_gap_edges());
void write_gap_histogram_csv(std::ostream& out, const GapHistogram& histogram);

// sessions.jsonl: one session object per line.
void write_sessions_jsonl(std::ostream& out, std::span<const SessionVector> vectors);
std::vector<SessionVector> read_sessions_jsonl(std::istream& in);
std::vector<SessionVector> read_sessions_jsonl(const std::filesystem::path& path);

}  // namespace seqmotif
