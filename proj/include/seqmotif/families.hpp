#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/motif_miner.hpp"
#include "seqmotif/motif_stats.hpp"

namespace seqmotif {

// Heuristic behavioural groupings of motifs. Rules are checked in this order
// and the first match wins.
enum class MotifFamily { solo, reactive, inactive, distinctive, unclassified };

std::string to_string(MotifFamily family);

// ECMAScript regexes searched against the motif string.
struct FamilyRules {
  std::string solo = "^E?A{2,}E?$";   // runs of same-contributor sessions
  std::string reactive = "BB";        // back-and-forth between two contributors
  std::string inactive = "^[DE]+$";   // newcomers and long-absent contributors only
  std::string distinctive = "[ABC]E"; // active contributor handing over to a newcomer...
  bool distinctive_needs_negative_z = true;  // ...and seen less often than chance
};

MotifFamily classify_motif(const Motif& motif, std::optional<double> z,
                           const FamilyRules& rules = {});

struct FamilyRow {
  MotifFamily family = MotifFamily::unclassified;
  MotifStats stats;
  std::string example;  // shortest performer sequence producing the motif
};

// Tags every row; order follows the input.
std::vector<FamilyRow> classify_motif_families(std::span<const MotifStats> stats,
                                               const FamilyRules& rules = {});

// Shortest performer sequence (U1, U2, ... numbered by first appearance) whose
// trailing sessions schematize to `motif`, e.g. "AA" -> "U1-U1-U1". Returns
// nullopt for motifs containing F, which depend on platform history, and for
// motifs no performer sequence can produce, e.g. "DAB".
std::optional<std::string> example_performer_sequence(const Motif& motif,
                                                      std::size_t max_prefix = 10);

}  // namespace seqmotif
