#include "seqmotif/sequence_analytics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "seqmotif/csv.hpp"
#include "seqmotif/errors.hpp"

namespace seqmotif {

std::uint64_t TransitionMatrix::total() const {
  return std::accumulate(row_totals.begin(), row_totals.end(), std::uint64_t{0});
}

TransitionMatrix transition_matrix(std::span<const LabelSequence> sequences) {
  TransitionMatrix tm;
  for (const auto& seq : sequences) {
    for (std::size_t i = 1; i < seq.labels.size(); ++i) {
      ++tm.counts[index_of(seq.labels[i - 1])][index_of(seq.labels[i])];
      ++tm.row_totals[index_of(seq.labels[i - 1])];
    }
  }
  for (std::size_t r = 0; r < kLabelCount; ++r) {
    if (tm.row_totals[r] == 0) continue;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      tm.probabilities[r][c] =
          static_cast<double>(tm.counts[r][c]) / static_cast<double>(tm.row_totals[r]);
    }
  }
  return tm;
}

void write_transition_csv(std::ostream& out, const TransitionMatrix& tm) {
  std::vector<std::string> header{"from", "row_total", "defined"};
  for (auto l : kAllLabels) header.push_back(std::string("p_") + to_char(l));
  for (auto l : kAllLabels) header.push_back(std::string("n_") + to_char(l));
  csv::write_row(out, header);
  for (auto from : kAllLabels) {
    const std::size_t r = index_of(from);
    std::vector<std::string> row{std::string(1, to_char(from)), std::to_string(tm.row_totals[r]),
                                 tm.row_defined(from) ? "1" : "0"};
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      std::ostringstream v;
      v.precision(17);
      v << tm.probabilities[r][c];
      row.push_back(v.str());
    }
    for (std::size_t c = 0; c < kLabelCount; ++c) row.push_back(std::to_string(tm.counts[r][c]));
    csv::write_row(out, row);
  }
}

void EditCosts::validate() const {
  if (insert < 0 || remove < 0 || substitute < 0) {
    throw ArgumentError("edit costs must be non-negative");
  }
  if (substitute > insert + remove) {
    throw ArgumentError("substitution cost must not exceed insert + delete");
  }
}

EditCosts parse_edit_costs(const std::string& text) {
  std::istringstream in(text);
  EditCosts c;
  char comma1 = 0, comma2 = 0;
  if (!(in >> c.insert >> comma1 >> c.remove >> comma2 >> c.substitute) || comma1 != ',' ||
      comma2 != ',' || !(in >> std::ws).eof()) {
    throw ArgumentError("costs must look like 'insert,delete,substitute', got '" + text + "'");
  }
  c.validate();
  return c;
}

double edit_distance(std::span<const RecencyLabel> a, std::span<const RecencyLabel> b,
                     const EditCosts& costs) {
  costs.validate();
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<double>(j) * costs.insert;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<double>(i) * costs.remove;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : costs.substitute);
      cur[j] = std::min({sub, prev[j] + costs.remove, cur[j - 1] + costs.insert});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_distance(const LabelSequence& a, const LabelSequence& b, const EditCosts& costs) {
  return edit_distance(std::span<const RecencyLabel>(a.labels),
                       std::span<const RecencyLabel>(b.labels), costs);
}

SequenceMetric edit_distance_metric(EditCosts costs) {
  costs.validate();
  return [costs](const LabelSequence& a, const LabelSequence& b) {
    return edit_distance(a, b, costs);
  };
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids)
    : ids_(std::move(ids)), values_(ids_.size() * ids_.size(), 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
  if (v < 0) throw ArgumentError("distances must be non-negative");
  values_[i * ids_.size() + j] = v;
  values_[j * ids_.size() + i] = v;
}

DistanceMatrix distance_matrix(std::span<const LabelSequence> sequences,
                               const SequenceMetric& metric) {
  std::vector<std::string> ids;
  ids.reserve(sequences.size());
  for (const auto& s : sequences) ids.push_back(s.artifact_id);
  DistanceMatrix dm(std::move(ids));
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (std::size_t j = i + 1; j < sequences.size(); ++j) {
      dm.set(i, j, metric(sequences[i], sequences[j]));
    }
  }
  return dm;
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& dm) {
  std::vector<std::string> header{"artifact_id"};
  header.insert(header.end(), dm.ids().begin(), dm.ids().end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < dm.size(); ++i) {
    std::vector<std::string> row{dm.ids()[i]};
    for (std::size_t j = 0; j < dm.size(); ++j) {
      std::ostringstream v;
      v.precision(17);
      v << dm.at(i, j);
      row.push_back(v.str());
    }
    csv::write_row(out, row);
  }
}

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
  }
  return "average";
}

Linkage linkage_from_string(const std::string& text) {
  if (text == "single") return Linkage::single;
  if (text == "complete") return Linkage::complete;
  if (text == "average") return Linkage::average;
  throw ArgumentError("unknown linkage '" + text + "'");
}

Dendrogram build_dendrogram(const DistanceMatrix& dm, Linkage linkage) {
  const std::size_t n = dm.size();
  Dendrogram out;
  out.leaf_count = n;
  if (n < 2) return out;

  // Working copy indexed by slot; a merged cluster keeps the lower slot.
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = dm.at(i, j);
  }
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1), cluster_id(n);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d[i * n + j] < best) {
          best = d[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    Merge m;
    m.left = std::min(cluster_id[bi], cluster_id[bj]);
    m.right = std::max(cluster_id[bi], cluster_id[bj]);
    m.height = best;
    m.size = size[bi] + size[bj];
    out.merges.push_back(m);

    for (std::size_t x = 0; x < n; ++x) {
      if (!active[x] || x == bi || x == bj) continue;
      const double di = d[bi * n + x];
      const double dj = d[bj * n + x];
      double nd = 0.0;
      switch (linkage) {
        case Linkage::single: nd = std::min(di, dj); break;
        case Linkage::complete: nd = std::max(di, dj); break;
        case Linkage::average:
          nd = (di * static_cast<double>(size[bi]) + dj * static_cast<double>(size[bj])) /
               static_cast<double>(size[bi] + size[bj]);
          break;
      }
      d[bi * n + x] = d[x * n + bi] = nd;
    }
    active[bj] = false;
    size[bi] += size[bj];
    cluster_id[bi] = n + step;
  }
  return out;
}

std::vector<std::size_t> Dendrogram::cut(std::size_t k) const {
  const std::size_t n = leaf_count;
  if (k < 1 || k > n) {
    throw ArgumentError("cluster count " + std::to_string(k) + " outside [1, " +
                        std::to_string(n) + "]");
  }
  // Union-find over leaves plus internal nodes.
  std::vector<std::size_t> parent(n + merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n - k; ++i) {
    parent[find(merges[i].left)] = n + i;
    parent[find(merges[i].right)] = n + i;
  }
  std::vector<std::size_t> out(n);
  std::vector<std::size_t> numbering(parent.size(), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const std::size_t root = find(leaf);
    if (numbering[root] == std::numeric_limits<std::size_t>::max()) numbering[root] = next++;
    out[leaf] = numbering[root];
  }
  return out;
}

std::vector<std::size_t> cluster_sequences(const DistanceMatrix& dm, Linkage linkage,
                                           std::size_t k) {
  if (k < 1 || k > dm.size()) {
    throw ArgumentError("cluster count " + std::to_string(k) + " outside [1, " +
                        std::to_string(dm.size()) + "]");
  }
  return build_dendrogram(dm, linkage).cut(k);
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d) {
  csv::write_row(out, {"step", "left", "right", "height", "size"});
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const auto& m = d.merges[i];
    std::ostringstream h;
    h.precision(17);
    h << m.height;
    csv::write_row(out, {std::to_string(i + 1), std::to_string(m.left), std::to_string(m.right),
                         h.str(), std::to_string(m.size)});
  }
}

}  // namespace seqmotif
