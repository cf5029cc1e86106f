#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/labels.hpp"
#include "seqmotif/schematizer.hpp"

namespace seqmotif {

// First-order label transitions within artifacts.
struct TransitionMatrix {
  std::array<std::array<std::uint64_t, kLabelCount>, kLabelCount> counts{};
  std::array<std::array<double, kLabelCount>, kLabelCount> probabilities{};
  std::array<std::uint64_t, kLabelCount> row_totals{};

  // False for rows with no outgoing bigram; their probabilities stay zero.
  bool row_defined(RecencyLabel from) const { return row_totals[index_of(from)] > 0; }
  std::uint64_t total() const;
};

TransitionMatrix transition_matrix(std::span<const LabelSequence> sequences);
void write_transition_csv(std::ostream& out, const TransitionMatrix& tm);

struct EditCosts {
  double insert = 1.0;
  double remove = 1.0;
  double substitute = 1.0;

  // Throws ArgumentError on negative costs or substitute > insert + remove.
  void validate() const;
};

EditCosts parse_edit_costs(const std::string& text);  // "i,d,s"

double edit_distance(std::span<const RecencyLabel> a, std::span<const RecencyLabel> b,
                     const EditCosts& costs = {});
double edit_distance(const LabelSequence& a, const LabelSequence& b,
                     const EditCosts& costs = {});

// Any dissimilarity over label sequences; edit distance is the default.
using SequenceMetric = std::function<double(const LabelSequence&, const LabelSequence&)>;

SequenceMetric edit_distance_metric(EditCosts costs = {});

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
  void set(std::size_t i, std::size_t j, double v);

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
};

DistanceMatrix distance_matrix(std::span<const LabelSequence> sequences,
                               const SequenceMetric& metric);
void write_distance_csv(std::ostream& out, const DistanceMatrix& dm);

enum class Linkage { single, complete, average };

std::string to_string(Linkage linkage);
Linkage linkage_from_string(const std::string& text);

// Leaves are 0..n-1; the cluster created by merges[i] has id n + i.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;

  // Applies the first n - k merges. Cluster numbers follow the order of each
  // cluster's smallest leaf.
  std::vector<std::size_t> cut(std::size_t k) const;
};

// Agglomerative clustering. Among equally close pairs the one with the
// lowest (i, j) slot indices merges first, where a cluster's slot is its
// smallest leaf.
Dendrogram build_dendrogram(const DistanceMatrix& dm, Linkage linkage);

std::vector<std::size_t> cluster_sequences(const DistanceMatrix& dm, Linkage linkage,
                                           std::size_t k);

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d);

}  // namespace seqmotif
