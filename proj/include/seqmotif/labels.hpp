#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace seqmotif {

// Contributor-recency code of a session.
//   A  same performer as the previous session
//   B  performer last active two sessions back
//   C  performer last active 3-5 sessions back
//   D  performer last active 6 or more sessions back
//   E  performer's first session on this artifact
//   F  performer's first session on the platform
enum class RecencyLabel : std::uint8_t { A, B, C, D, E, F };

inline constexpr std::size_t kLabelCount = 6;
inline constexpr std::array<RecencyLabel, kLabelCount> kAllLabels = {
    RecencyLabel::A, RecencyLabel::B, RecencyLabel::C,
    RecencyLabel::D, RecencyLabel::E, RecencyLabel::F};

using LabelHistogram = std::array<std::uint64_t, kLabelCount>;

constexpr std::size_t index_of(RecencyLabel l) { return static_cast<std::size_t>(l); }
constexpr char to_char(RecencyLabel l) { return static_cast<char>('A' + index_of(l)); }

constexpr std::optional<RecencyLabel> label_from_char(char c) {
  if (c < 'A' || c > 'F') return std::nullopt;
  return static_cast<RecencyLabel>(c - 'A');
}

std::string_view describe(RecencyLabel l);

}  // namespace seqmotif
