#include "seqmotif/descriptive_stats.hpp"

#include <cstdlib>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "seqmotif/csv.hpp"
#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {

struct Mean {
  double sum = 0.0;
  std::uint64_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

std::string fixed(const std::optional<double>& v, int digits) {
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string("n/a");
}

}  // namespace

std::string to_string(SizeMode mode) { return mode == SizeMode::magnitude ? "magnitude" : "raw"; }

SizeMode size_mode_from_string(const std::string& text) {
  if (text == "magnitude") return SizeMode::magnitude;
  if (text == "raw") return SizeMode::raw;
  throw ArgumentError("unknown size mode '" + text + "'");
}

std::string to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return "seconds";
    case TimeUnit::minutes: return "minutes";
    case TimeUnit::hours: return "hours";
    case TimeUnit::days: return "days";
  }
  return "seconds";
}

TimeUnit time_unit_from_string(const std::string& text) {
  if (text == "seconds" || text == "s") return TimeUnit::seconds;
  if (text == "minutes" || text == "m") return TimeUnit::minutes;
  if (text == "hours" || text == "h") return TimeUnit::hours;
  if (text == "days" || text == "d") return TimeUnit::days;
  throw ArgumentError("unknown time unit '" + text + "'");
}

double in_unit(double seconds, TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return seconds;
    case TimeUnit::minutes: return seconds / 60.0;
    case TimeUnit::hours: return seconds / 3600.0;
    case TimeUnit::days: return seconds / 86400.0;
  }
  return seconds;
}

std::vector<SessionGaps> session_gaps(const SessionVector& vec) {
  std::vector<SessionGaps> out(vec.sessions.size());
  std::unordered_map<std::string, Instant> last_end;
  for (std::size_t i = 0; i < vec.sessions.size(); ++i) {
    const Session& s = vec.sessions[i];
    if (i > 0) out[i].gap_prev = (s.start - vec.sessions[i - 1].end).count();
    if (const auto it = last_end.find(s.performer_id); it != last_end.end()) {
      out[i].gap_same = (s.start - it->second).count();
    }
    last_end[s.performer_id] = s.end;
  }
  return out;
}

std::vector<LabelSummary> summarize_labels(std::span<const SessionVector> vectors,
                                           std::span<const LabelSequence> sequences,
                                           SizeMode size_mode) {
  if (vectors.size() != sequences.size()) {
    throw ConsistencyError("summary: " + std::to_string(vectors.size()) +
                           " session vectors but " + std::to_string(sequences.size()) +
                           " label sequences");
  }
  std::array<std::uint64_t, kLabelCount> counts{};
  std::array<Mean, kLabelCount> size, duration, gap_prev, gap_same;
  std::uint64_t total = 0;

  for (std::size_t a = 0; a < vectors.size(); ++a) {
    const auto& vec = vectors[a];
    const auto& seq = sequences[a];
    if (vec.artifact_id != seq.artifact_id || vec.sessions.size() != seq.labels.size()) {
      throw ConsistencyError("summary: artifact '" + vec.artifact_id +
                             "' does not align with label sequence '" + seq.artifact_id + "'");
    }
    const auto gaps = session_gaps(vec);
    for (std::size_t i = 0; i < vec.sessions.size(); ++i) {
      const Session& s = vec.sessions[i];
      if (seq.ordinals.size() == seq.labels.size() && seq.ordinals[i] != s.ordinal) {
        throw ConsistencyError("summary: ordinal mismatch in '" + vec.artifact_id + "'");
      }
      const std::size_t l = index_of(seq.labels[i]);
      ++counts[l];
      ++total;
      const auto& sz = size_mode == SizeMode::magnitude ? s.size_magnitude : s.size_total;
      if (sz) size[l].add(static_cast<double>(*sz));
      duration[l].add(static_cast<double>(s.duration().count()));
      if (gaps[i].gap_prev) gap_prev[l].add(static_cast<double>(*gaps[i].gap_prev));
      const bool same_defined = seq.labels[i] != RecencyLabel::E && seq.labels[i] != RecencyLabel::F;
      if (same_defined && gaps[i].gap_same) gap_same[l].add(static_cast<double>(*gaps[i].gap_same));
    }
  }

  std::vector<LabelSummary> out;
  for (auto label : kAllLabels) {
    const std::size_t l = index_of(label);
    LabelSummary row;
    row.label = label;
    row.count = counts[l];
    row.fraction = total ? static_cast<double>(counts[l]) / static_cast<double>(total) : 0.0;
    row.mean_size = size[l].value();
    row.mean_duration = duration[l].value();
    row.mean_gap_prev = gap_prev[l].value();
    row.mean_gap_same = gap_same[l].value();
    out.push_back(row);
  }
  return out;
}

void write_label_summary_csv(std::ostream& out, std::span<const LabelSummary> rows,
                             const SummaryRendering& r) {
  const std::string du = to_string(r.duration_unit);
  const std::string gu = to_string(r.gap_unit);
  csv::write_row(out, {"label", "description", "count", "percent",
                       "size_" + to_string(r.size_mode), "duration_" + du,
                       "last_session_" + gu, "last_same_session_" + gu, "duration_s",
                       "last_session_s", "last_same_session_s"});
  auto scaled = [](const std::optional<double>& v, TimeUnit u) -> std::optional<double> {
    if (!v) return std::nullopt;
    return in_unit(*v, u);
  };
  for (const auto& row : rows) {
    csv::write_row(out, {std::string(1, to_char(row.label)), std::string(describe(row.label)),
                         std::to_string(row.count), fmt::format("{:.2f}", row.fraction * 100.0),
                         fixed(row.mean_size, 0), fixed(scaled(row.mean_duration, r.duration_unit), 2),
                         fixed(scaled(row.mean_gap_prev, r.gap_unit), 2),
                         fixed(scaled(row.mean_gap_same, r.gap_unit), 2),
                         fixed(row.mean_duration, 1), fixed(row.mean_gap_prev, 1),
                         fixed(row.mean_gap_same, 1)});
  }
}

void write_label_summary_markdown(std::ostream& out, std::span<const LabelSummary> rows,
                                  const SummaryRendering& r) {
  out << "| Label | Description | Count | % | Size | Duration (" << to_string(r.duration_unit)
      << ") | Last session (" << to_string(r.gap_unit) << ") | Last same-session ("
      << to_string(r.gap_unit) << ") |\n";
  out << "|---|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& row : rows) {
    auto scaled = [](const std::optional<double>& v, TimeUnit u) -> std::optional<double> {
      if (!v) return std::nullopt;
      return in_unit(*v, u);
    };
    out << "| " << to_char(row.label) << " | " << describe(row.label) << " | "
        << row.count << " | " << fmt::format("{:.0f}%", row.fraction * 100.0)
        << " | " << fixed(row.mean_size, 0) << " | "
        << fixed(scaled(row.mean_duration, r.duration_unit), 2) << " | "
        << fixed(scaled(row.mean_gap_prev, r.gap_unit), 2) << " | "
        << fixed(scaled(row.mean_gap_same, r.gap_unit), 2) << " |\n";
  }
}

}  // namespace seqmotif
