#pragma once

// Slow, obviously-correct reference implementations and random generators
// used to cross-check the library.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "seqmotif/event_model.hpp"
#include "seqmotif/schematizer.hpp"

namespace oracle {

struct RefSession {
  std::string performer;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t edits = 0;
  std::optional<std::int64_t> size_total;
  std::optional<std::int64_t> size_magnitude;
};

// Starts from one session per event and merges any adjacent same-performer
// pair within `gap` until nothing changes.
std::vector<RefSession> merge_sessions(const std::vector<seqmotif::EventRecord>& events,
                                       std::int64_t gap);

// Label of session i from a full scan of sessions [0, i).
char label_by_scan(const std::vector<std::string>& performers,
                   const std::vector<std::int64_t>& starts, std::size_t i,
                   const std::map<std::string, std::int64_t>& first_edits);

// Every length-k window, extracted character by character.
struct WindowScan {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t windows = 0;
};
WindowScan scan_windows(const std::vector<std::string>& sequences, std::size_t k);

// Exhaustive recursion; only for short inputs.
double edit_distance_recursive(const std::string& a, const std::string& b, double ins,
                               double del, double sub);

// Agglomerative clustering recomputing every cluster distance from leaf sets.
// Returns cluster ids per leaf after n-k merges, numbered by smallest leaf,
// plus the merge heights.
struct RefClustering {
  std::vector<std::size_t> assignment;
  std::vector<double> heights;
};
RefClustering cluster_naive(const std::vector<std::vector<double>>& d, const std::string& linkage,
                            std::size_t k);

// ---- generators ----

using Rng = std::mt19937_64;

// Events for one artifact, sorted, with bursts and long pauses.
std::vector<seqmotif::EventRecord> random_stream(Rng& rng, const std::string& artifact,
                                                 std::size_t max_events, std::size_t performers);

// Session vector with distinct timestamps and optional first-edit index that
// hits some sessions exactly.
struct RandomSessions {
  seqmotif::SessionVector vec;
  seqmotif::FirstEditIndex first_edits;
  std::map<std::string, std::int64_t> first_map;
};
RandomSessions random_sessions(Rng& rng, std::size_t max_sessions, std::size_t performers);

// Label strings over A-F with random lengths in [0, max_len].
std::vector<std::string> random_label_strings(Rng& rng, std::size_t count, std::size_t max_len,
                                              const std::string& alphabet = "ABCDEF");

std::vector<seqmotif::LabelSequence> to_sequences(const std::vector<std::string>& strings);

}  // namespace oracle
