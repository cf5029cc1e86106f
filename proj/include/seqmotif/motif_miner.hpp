#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqmotif/labels.hpp"
#include "seqmotif/schematizer.hpp"

namespace seqmotif {

inline constexpr std::size_t kMinMotifLength = 2;
inline constexpr std::size_t kDefaultMaxMotifLength = 10;

// A contiguous k-gram of recency labels.
class Motif {
 public:
  Motif() = default;
  explicit Motif(std::vector<RecencyLabel> labels) : labels_(std::move(labels)) {}
  static Motif parse(std::string_view text);

  const std::vector<RecencyLabel>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::string to_string() const;

  auto operator<=>(const Motif&) const = default;

 private:
  std::vector<RecencyLabel> labels_;
};

struct MotifCounts {
  std::size_t k = 0;
  std::map<Motif, std::uint64_t> counts;
  // Number of length-k windows: sum over sequences of max(0, len - k + 1).
  std::uint64_t window_total = 0;
  // Corpus the windows came from, for consistency checks downstream.
  std::uint64_t label_total = 0;
  std::uint64_t sequence_count = 0;
};

// Counts every contiguous length-k window of every sequence. Windows never
// cross sequence boundaries.
MotifCounts count_motifs(std::span<const LabelSequence> sequences, std::size_t k,
                         std::size_t max_k = kDefaultMaxMotifLength);

enum class SupportComparison { at_least, more_than };

struct SupportThreshold {
  std::uint64_t min_count = 0;
  SupportComparison comparison = SupportComparison::at_least;

  bool passes(std::uint64_t count) const {
    return comparison == SupportComparison::at_least ? count >= min_count : count > min_count;
  }
};

// >= 200 for pairs, > 100 for triples, > 50 for quadruples, keep-all beyond.
SupportThreshold default_support(std::size_t k);

MotifCounts filter_by_support(const MotifCounts& counts, SupportThreshold threshold);

struct RankedMotif {
  Motif motif;
  std::uint64_t count = 0;
  double fraction = 0.0;  // count / window_total
};

// Descending count, then ascending motif string.
std::vector<RankedMotif> rank_by_count(const MotifCounts& counts);

// motifs.json: {"levels":[{"k":2,"window_total":..,"label_total":..,
//   "sequence_count":..,"motifs":[{"motif":"AA","count":..,"fraction":..}]}]}
void write_motifs_json(std::ostream& out, std::span<const MotifCounts> levels);
std::vector<MotifCounts> read_motifs_json(std::istream& in);
std::vector<MotifCounts> read_motifs_json(const std::filesystem::path& path);

}  // namespace seqmotif
