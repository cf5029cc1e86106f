#include "seqmotif/families.hpp"

#include <algorithm>
#include <regex>

#include "seqmotif/errors.hpp"
#include "seqmotif/schematizer.hpp"

namespace seqmotif {
namespace {

bool search(const std::string& pattern, const std::string& text) {
  if (pattern.empty()) return false;
  try {
    return std::regex_search(text, std::regex(pattern, std::regex::ECMAScript));
  } catch (const std::regex_error& e) {
    throw ArgumentError("bad family rule '" + pattern + "': " + e.what());
  }
}

// Label the session appended to `performers` would get, without F.
RecencyLabel label_of_next(const std::vector<int>& performers, int next) {
  const RecencyBuckets buckets;
  for (std::size_t back = 1; back <= performers.size(); ++back) {
    if (performers[performers.size() - back] == next) return buckets.classify(back);
  }
  return RecencyLabel::E;
}

// Depth-first search over restricted-growth strings: prefix positions are
// free, motif positions must produce the wanted label.
bool extend(std::vector<int>& seq, int used, std::size_t prefix_len, const Motif& motif,
            std::size_t pos_total) {
  if (seq.size() == pos_total) return true;
  const std::size_t pos = seq.size();
  for (int p = 0; p <= used; ++p) {
    if (pos >= prefix_len) {
      const RecencyLabel want = motif.labels()[pos - prefix_len];
      if (label_of_next(seq, p) != want) continue;
    }
    seq.push_back(p);
    if (extend(seq, std::max(used, p + 1), prefix_len, motif, pos_total)) return true;
    seq.pop_back();
  }
  return false;
}

}  // namespace

std::string to_string(MotifFamily family) {
  switch (family) {
    case MotifFamily::solo: return "solo";
    case MotifFamily::reactive: return "reactive";
    case MotifFamily::inactive: return "inactive";
    case MotifFamily::distinctive: return "distinctive";
    case MotifFamily::unclassified: return "unclassified";
  }
  return "unclassified";
}

MotifFamily classify_motif(const Motif& motif, std::optional<double> z,
                           const FamilyRules& rules) {
  const std::string s = motif.to_string();
  if (search(rules.solo, s)) return MotifFamily::solo;
  if (search(rules.reactive, s)) return MotifFamily::reactive;
  if (search(rules.inactive, s)) return MotifFamily::inactive;
  if (search(rules.distinctive, s) &&
      (!rules.distinctive_needs_negative_z || (z && *z < 0.0))) {
    return MotifFamily::distinctive;
  }
  return MotifFamily::unclassified;
}

std::vector<FamilyRow> classify_motif_families(std::span<const MotifStats> stats,
                                               const FamilyRules& rules) {
  std::vector<FamilyRow> out;
  out.reserve(stats.size());
  for (const auto& s : stats) {
    FamilyRow row;
    row.family = classify_motif(s.motif, s.z, rules);
    row.stats = s;
    row.example = example_performer_sequence(s.motif).value_or("n/a");
    out.push_back(std::move(row));
  }
  return out;
}

std::optional<std::string> example_performer_sequence(const Motif& motif,
                                                      std::size_t max_prefix) {
  if (motif.size() == 0) return std::nullopt;
  if (std::find(motif.labels().begin(), motif.labels().end(), RecencyLabel::F) !=
      motif.labels().end()) {
    return std::nullopt;
  }
  for (std::size_t prefix = 0; prefix <= max_prefix; ++prefix) {
    std::vector<int> seq;
    if (!extend(seq, 0, prefix, motif, prefix + motif.size())) continue;
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out.push_back('-');
      out += "U" + std::to_string(seq[i] + 1);
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace seqmotif
