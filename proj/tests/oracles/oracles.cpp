#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "seqmotif/sessionizer.hpp"

namespace oracle {

std::vector<RefSession> merge_sessions(const std::vector<seqmotif::EventRecord>& events,
                                       std::int64_t gap) {
  std::vector<RefSession> s;
  for (const auto& e : events) {
    RefSession r;
    r.performer = e.performer_id;
    r.start = r.end = e.timestamp.epoch_seconds;
    r.edits = 1;
    if (e.size_delta) {
      r.size_total = *e.size_delta;
      r.size_magnitude = std::llabs(*e.size_delta);
    }
    s.push_back(r);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (s[i].performer != s[i + 1].performer || s[i + 1].start - s[i].end > gap) continue;
      auto add = [](std::optional<std::int64_t> a, std::optional<std::int64_t> b) {
        if (!a) return b;
        if (!b) return a;
        return std::optional<std::int64_t>(*a + *b);
      };
      s[i].end = s[i + 1].end;
      s[i].edits += s[i + 1].edits;
      s[i].size_total = add(s[i].size_total, s[i + 1].size_total);
      s[i].size_magnitude = add(s[i].size_magnitude, s[i + 1].size_magnitude);
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      changed = true;
      break;
    }
  }
  return s;
}

char label_by_scan(const std::vector<std::string>& performers,
                   const std::vector<std::int64_t>& starts, std::size_t i,
                   const std::map<std::string, std::int64_t>& first_edits) {
  std::optional<std::size_t> last;
  for (std::size_t j = 0; j < i; ++j) {
    if (performers[j] == performers[i]) last = j;
  }
  if (!last) {
    const auto it = first_edits.find(performers[i]);
    return it != first_edits.end() && it->second == starts[i] ? 'F' : 'E';
  }
  const std::size_t d = i - *last;
  if (d == 1) return 'A';
  if (d == 2) return 'B';
  if (d <= 5) return 'C';
  return 'D';
}

WindowScan scan_windows(const std::vector<std::string>& sequences, std::size_t k) {
  WindowScan out;
  for (const auto& s : sequences) {
    for (std::size_t start = 0; start < s.size(); ++start) {
      std::string w;
      for (std::size_t j = start; j < s.size() && w.size() < k; ++j) w.push_back(s[j]);
      if (w.size() != k) continue;
      ++out.counts[w];
      ++out.windows;
    }
  }
  return out;
}

double edit_distance_recursive(const std::string& a, const std::string& b, double ins,
                               double del, double sub) {
  if (a.empty()) return ins * static_cast<double>(b.size());
  if (b.empty()) return del * static_cast<double>(a.size());
  const std::string ra = a.substr(1);
  const std::string rb = b.substr(1);
  const double match = edit_distance_recursive(ra, rb, ins, del, sub) + (a[0] == b[0] ? 0.0 : sub);
  const double remove = edit_distance_recursive(ra, b, ins, del, sub) + del;
  const double insert = edit_distance_recursive(a, rb, ins, del, sub) + ins;
  return std::min({match, remove, insert});
}

RefClustering cluster_naive(const std::vector<std::vector<double>>& d, const std::string& linkage,
                            std::size_t k) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  RefClustering out;
  auto link = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (auto x : a) {
      for (auto y : b) {
        lo = std::min(lo, d[x][y]);
        hi = std::max(hi, d[x][y]);
        sum += d[x][y];
      }
    }
    if (linkage == "single") return lo;
    if (linkage == "complete") return hi;
    return sum / static_cast<double>(a.size() * b.size());
  };
  auto min_leaf = [](const std::vector<std::size_t>& c) {
    return *std::min_element(c.begin(), c.end());
  };
  while (clusters.size() > 1) {
    std::sort(clusters.begin(), clusters.end(),
              [&](const auto& a, const auto& b) { return min_leaf(a) < min_leaf(b); });
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double v = link(clusters[i], clusters[j]);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    out.heights.push_back(best);
    if (clusters.size() == k) {
      out.assignment.assign(n, 0);
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (auto leaf : clusters[c]) out.assignment[leaf] = c;
      }
    }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  if (k == 1) out.assignment.assign(n, 0);
  return out;
}

std::vector<seqmotif::EventRecord> random_stream(Rng& rng, const std::string& artifact,
                                                 std::size_t max_events, std::size_t performers) {
  std::uniform_int_distribution<std::size_t> len(0, max_events);
  std::uniform_int_distribution<std::size_t> who(1, performers);
  std::uniform_int_distribution<int> step_kind(0, 9);
  std::uniform_int_distribution<std::int64_t> short_step(0, 900);
  std::uniform_int_distribution<std::int64_t> long_step(901, 200000);
  std::uniform_int_distribution<std::int64_t> delta(-500, 500);
  std::bernoulli_distribution keep_performer(0.5), has_size(0.9);
  std::vector<seqmotif::EventRecord> out;
  std::int64_t t = 1300000000;
  std::string performer = "P" + std::to_string(who(rng));
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep_performer(rng)) performer = "P" + std::to_string(who(rng));
    t += step_kind(rng) < 7 ? short_step(rng) : long_step(rng);
    seqmotif::EventRecord e;
    e.artifact_id = artifact;
    e.performer_id = performer;
    e.activity = "edit";
    e.timestamp = seqmotif::Instant{t};
    if (has_size(rng)) e.size_delta = delta(rng);
    out.push_back(e);
  }
  // Timestamps may repeat (step 0); keep the (timestamp, performer) order the
  // normalizer would produce and drop exact duplicates.
  return seqmotif::normalize(seqmotif::EventLog(out)).events();
}

RandomSessions random_sessions(Rng& rng, std::size_t max_sessions, std::size_t performers) {
  std::uniform_int_distribution<std::size_t> len(1, max_sessions);
  std::uniform_int_distribution<std::size_t> who(1, performers);
  std::uniform_int_distribution<std::int64_t> step(601, 100000);
  std::bernoulli_distribution known(0.6), on_first(0.3);
  RandomSessions out;
  out.vec.artifact_id = "art";
  std::int64_t t = 1200000000;
  const std::size_t n = len(rng);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    seqmotif::Session s;
    s.artifact_id = "art";
    s.performer_id = "P" + std::to_string(who(rng));
    t += step(rng);
    s.start = seqmotif::Instant{t};
    s.end = s.start;
    s.ordinal = i + 1;
    if (!seen.count(s.performer_id)) {
      seen.insert(s.performer_id);
      if (known(rng)) {
        // Either exactly this session (platform newcomer) or some earlier date.
        const std::int64_t first = on_first(rng) ? t : t - 86400 * 30;
        out.first_map[s.performer_id] = first;
        out.first_edits.set(s.performer_id, seqmotif::Instant{first});
      }
    }
    out.vec.sessions.push_back(s);
  }
  return out;
}

std::vector<std::string> random_label_strings(Rng& rng, std::size_t count, std::size_t max_len,
                                              const std::string& alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t j = 0; j < n; ++j) s.push_back(alphabet[pick(rng)]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<seqmotif::LabelSequence> to_sequences(const std::vector<std::string>& strings) {
  std::vector<seqmotif::LabelSequence> out;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    seqmotif::LabelSequence s;
    s.artifact_id = "a" + std::to_string(i);
    s.labels = seqmotif::parse_labels(strings[i]);
    for (std::size_t j = 0; j < s.labels.size(); ++j) s.ordinals.push_back(j + 1);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace oracle
