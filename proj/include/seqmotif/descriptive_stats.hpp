#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/schematizer.hpp"
#include "seqmotif/sessionizer.hpp"

namespace seqmotif {

// How a session's size is derived from its events' size deltas.
enum class SizeMode {
  magnitude,  // sum of |delta|; deltas are signed page-size changes
  raw,        // sum of delta as given; deltas are already magnitudes
};

std::string to_string(SizeMode mode);
SizeMode size_mode_from_string(const std::string& text);

struct LabelSummary {
  RecencyLabel label = RecencyLabel::A;
  std::uint64_t count = 0;
  double fraction = 0.0;
  std::optional<double> mean_size;
  std::optional<double> mean_duration;  // seconds
  std::optional<double> mean_gap_prev;  // seconds since the previous session ended
  std::optional<double> mean_gap_same;  // seconds since this performer's previous session ended
};

// Gaps of one session, measured from the end of the earlier session to the
// start of this one.
struct SessionGaps {
  std::optional<std::int64_t> gap_prev;
  std::optional<std::int64_t> gap_same;
};

std::vector<SessionGaps> session_gaps(const SessionVector& vec);

// Always returns six rows, A through F. Throws ConsistencyError when the
// vectors and sequences are not aligned per artifact and ordinal.
std::vector<LabelSummary> summarize_labels(std::span<const SessionVector> vectors,
                                           std::span<const LabelSequence> sequences,
                                           SizeMode size_mode = SizeMode::magnitude);

enum class TimeUnit { seconds, minutes, hours, days };

std::string to_string(TimeUnit unit);
TimeUnit time_unit_from_string(const std::string& text);
double in_unit(double seconds, TimeUnit unit);

struct SummaryRendering {
  TimeUnit duration_unit = TimeUnit::hours;
  TimeUnit gap_unit = TimeUnit::days;
  SizeMode size_mode = SizeMode::magnitude;
};

// CSV carries the display columns followed by raw seconds.
void write_label_summary_csv(std::ostream& out, std::span<const LabelSummary> rows,
                             const SummaryRendering& rendering = {});
void write_label_summary_markdown(std::ostream& out, std::span<const LabelSummary> rows,
                                  const SummaryRendering& rendering = {});

}  // namespace seqmotif
