#include "seqmotif/motif_miner.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {
using json = nlohmann::ordered_json;
}  // namespace

Motif Motif::parse(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (c != '-') compact.push_back(c);
  }
  return Motif(parse_labels(compact));
}

std::string Motif::to_string() const {
  std::string s;
  s.reserve(labels_.size());
  for (auto l : labels_) s.push_back(to_char(l));
  return s;
}

MotifCounts count_motifs(std::span<const LabelSequence> sequences, std::size_t k,
                         std::size_t max_k) {
  if (k < kMinMotifLength) throw ArgumentError("motif length must be at least 2");
  if (k > max_k) {
    throw ArgumentError("motif length " + std::to_string(k) + " exceeds maximum " +
                        std::to_string(max_k));
  }
  MotifCounts out;
  out.k = k;
  // Encode windows base-6 so tallies go through a flat map keyed by integer;
  // 6^10 fits comfortably in 64 bits.
  std::map<std::uint64_t, std::uint64_t> tally;
  std::uint64_t top = 1;
  for (std::size_t i = 1; i < k; ++i) top *= kLabelCount;
  for (const auto& seq : sequences) {
    out.label_total += seq.labels.size();
    ++out.sequence_count;
    if (seq.labels.size() < k) continue;
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < seq.labels.size(); ++i) {
      if (i >= k) code -= index_of(seq.labels[i - k]) * top;
      code = code * kLabelCount + index_of(seq.labels[i]);
      if (i + 1 >= k) {
        ++tally[code];
        ++out.window_total;
      }
    }
  }
  for (const auto& [code, count] : tally) {
    std::vector<RecencyLabel> labels(k);
    std::uint64_t c = code;
    for (std::size_t i = k; i-- > 0;) {
      labels[i] = static_cast<RecencyLabel>(c % kLabelCount);
      c /= kLabelCount;
    }
    out.counts.emplace(Motif(std::move(labels)), count);
  }
  return out;
}

SupportThreshold default_support(std::size_t k) {
  switch (k) {
    case 2: return {200, SupportComparison::at_least};
    case 3: return {100, SupportComparison::more_than};
    case 4: return {50, SupportComparison::more_than};
    default: return {0, SupportComparison::at_least};
  }
}

MotifCounts filter_by_support(const MotifCounts& counts, SupportThreshold threshold) {
  MotifCounts out = counts;
  std::erase_if(out.counts, [&](const auto& kv) { return !threshold.passes(kv.second); });
  return out;
}

std::vector<RankedMotif> rank_by_count(const MotifCounts& counts) {
  std::vector<RankedMotif> out;
  out.reserve(counts.counts.size());
  for (const auto& [motif, count] : counts.counts) {
    const double frac =
        counts.window_total ? static_cast<double>(count) / counts.window_total : 0.0;
    out.push_back({motif, count, frac});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedMotif& a, const RankedMotif& b) {
    return a.count > b.count;
  });
  return out;
}

void write_motifs_json(std::ostream& out, std::span<const MotifCounts> levels) {
  json doc;
  doc["levels"] = json::array();
  for (const auto& level : levels) {
    json l;
    l["k"] = level.k;
    l["window_total"] = level.window_total;
    l["label_total"] = level.label_total;
    l["sequence_count"] = level.sequence_count;
    l["motifs"] = json::array();
    for (const auto& r : rank_by_count(level)) {
      l["motifs"].push_back(
          {{"motif", r.motif.to_string()}, {"count", r.count}, {"fraction", r.fraction}});
    }
    doc["levels"].push_back(std::move(l));
  }
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing motifs");
}

std::vector<MotifCounts> read_motifs_json(std::istream& in) {
  std::vector<MotifCounts> out;
  try {
    const json doc = json::parse(in);
    for (const auto& l : doc.at("levels")) {
      MotifCounts level;
      level.k = l.at("k").get<std::size_t>();
      level.window_total = l.at("window_total").get<std::uint64_t>();
      level.label_total = l.value("label_total", std::uint64_t{0});
      level.sequence_count = l.value("sequence_count", std::uint64_t{0});
      for (const auto& m : l.at("motifs")) {
        Motif motif = Motif::parse(m.at("motif").get<std::string>());
        if (motif.size() != level.k) {
          throw ParseError(0, "motif '" + motif.to_string() + "' does not have length " +
                                  std::to_string(level.k));
        }
        level.counts[std::move(motif)] = m.at("count").get<std::uint64_t>();
      }
      out.push_back(std::move(level));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("motifs file: ") + e.what());
  }
  return out;
}

std::vector<MotifCounts> read_motifs_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_motifs_json(in);
}

}  // namespace seqmotif
