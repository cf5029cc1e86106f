#include "seqmotif/motif_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <boost/math/special_functions/erf.hpp>
#include <json.hpp>

#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {
using json = nlohmann::ordered_json;
}  // namespace

MarginalFrequencies MarginalFrequencies::from_counts(const LabelHistogram& counts) {
  MarginalFrequencies m;
  m.counts = counts;
  for (auto c : counts) m.total += c;
  if (m.total == 0) throw ArgumentError("marginals of an empty corpus are undefined");
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    m.fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(m.total);
  }
  return m;
}

MarginalFrequencies MarginalFrequencies::rounded_to_percent() const {
  MarginalFrequencies m = *this;
  for (auto& f : m.fractions) f = std::round(f * 100.0) / 100.0;
  return m;
}

MarginalFrequencies marginals(std::span<const LabelSequence> sequences) {
  return MarginalFrequencies::from_counts(histogram_of(sequences));
}

double expected_fraction(const Motif& motif, const MarginalFrequencies& marg) {
  double p = 1.0;
  for (auto l : motif.labels()) p *= marg.fraction(l);
  return p;
}

double z_score(std::uint64_t observed_count, std::uint64_t window_total, double p_expected) {
  if (window_total == 0) throw ArgumentError("z_score needs at least one window");
  if (!(p_expected > 0.0 && p_expected < 1.0)) {
    throw DegenerateNullError("expected fraction " + std::to_string(p_expected) +
                              " gives zero null variance");
  }
  const double n = static_cast<double>(window_total);
  const double observed = static_cast<double>(observed_count) / n;
  return (observed - p_expected) / std::sqrt(p_expected * (1.0 - p_expected) / n);
}

double two_tailed_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

double critical_z(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  return std::sqrt(2.0) * boost::math::erfc_inv(alpha);
}

double bonferroni(double p_raw, std::uint64_t m) {
  if (m < 1) throw ArgumentError("Bonferroni needs at least one comparison");
  return std::min(1.0, p_raw * static_cast<double>(m));
}

std::string to_string(ComparisonCount mode) {
  return mode == ComparisonCount::alphabet_power ? "alphabet-power" : "tested-count";
}

ComparisonCount comparison_count_from_string(const std::string& text) {
  if (text == "alphabet-power" || text == "alphabet_power") return ComparisonCount::alphabet_power;
  if (text == "tested-count" || text == "tested_count") return ComparisonCount::tested_count;
  throw ArgumentError("unknown comparison-count mode '" + text + "'");
}

SignificanceReport significance_report(const MotifCounts& counts,
                                       const MarginalFrequencies& marg, double alpha,
                                       ComparisonCount m_mode) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const std::size_t k = counts.k;
  if (counts.label_total != 0 && counts.label_total != marg.total) {
    throw ConsistencyError("motif counts cover " + std::to_string(counts.label_total) +
                           " labels but marginals cover " + std::to_string(marg.total));
  }
  if (k >= 1 && counts.window_total + (k - 1) > marg.total && counts.window_total > 0) {
    throw ConsistencyError("window total " + std::to_string(counts.window_total) +
                           " is impossible for " + std::to_string(marg.total) +
                           " labels at k=" + std::to_string(k));
  }
  std::uint64_t observed_sum = 0;
  for (const auto& [motif, count] : counts.counts) {
    if (motif.size() != k) {
      throw ConsistencyError("motif '" + motif.to_string() + "' has the wrong length");
    }
    for (auto l : motif.labels()) {
      if (marg.counts[index_of(l)] == 0 && marg.fraction(l) == 0.0) {
        throw ConsistencyError("motif '" + motif.to_string() + "' uses label " +
                               std::string(1, to_char(l)) + " absent from the marginals");
      }
    }
    observed_sum += count;
  }
  if (observed_sum > counts.window_total) {
    throw ConsistencyError("motif counts exceed the window total");
  }

  SignificanceReport report;
  report.k = k;
  report.window_total = counts.window_total;
  report.alpha = alpha;
  report.m_mode = m_mode;
  if (m_mode == ComparisonCount::alphabet_power) {
    report.comparisons = 1;
    for (std::size_t i = 0; i < k; ++i) report.comparisons *= kLabelCount;
  } else {
    report.comparisons = std::max<std::uint64_t>(1, counts.counts.size());
  }
  report.z_critical = critical_z(alpha / static_cast<double>(report.comparisons));

  for (const auto& [motif, count] : counts.counts) {
    MotifStats row;
    row.motif = motif;
    row.observed_count = count;
    row.observed_fraction =
        counts.window_total ? static_cast<double>(count) / counts.window_total : 0.0;
    row.expected_fraction = expected_fraction(motif, marg);
    row.comparisons = report.comparisons;
    if (counts.window_total > 0 && row.expected_fraction > 0.0 && row.expected_fraction < 1.0) {
      row.z = z_score(count, counts.window_total, row.expected_fraction);
      row.p_raw = two_tailed_p(*row.z);
      row.p_adjusted = bonferroni(row.p_raw, report.comparisons);
      // Once the tail mass underflows, fall back to the equivalent |z| cut.
      row.significant = row.p_raw > 0.0 ? row.p_adjusted < alpha
                                         : std::fabs(*row.z) > report.z_critical;
    } else {
      row.degenerate = true;
    }
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const MotifStats& a, const MotifStats& b) {
                     if (a.z.has_value() != b.z.has_value()) return a.z.has_value();
                     const double za = a.z ? std::fabs(*a.z) : 0.0;
                     const double zb = b.z ? std::fabs(*b.z) : 0.0;
                     if (za != zb) return za > zb;
                     return a.observed_count > b.observed_count;
                   });
  return report;
}

void write_stats_json(std::ostream& out, std::span<const SignificanceReport> reports,
                      const MarginalFrequencies& marg) {
  json doc;
  json m;
  m["total"] = marg.total;
  for (auto l : kAllLabels) {
    m["labels"].push_back({{"label", std::string(1, to_char(l))},
                           {"count", marg.counts[index_of(l)]},
                           {"fraction", marg.fraction(l)}});
  }
  doc["marginals"] = std::move(m);
  doc["reports"] = json::array();
  for (const auto& r : reports) {
    json jr;
    jr["k"] = r.k;
    jr["window_total"] = r.window_total;
    jr["alpha"] = r.alpha;
    jr["m_mode"] = to_string(r.m_mode);
    jr["comparisons"] = r.comparisons;
    jr["z_critical"] = r.z_critical;
    jr["motifs"] = json::array();
    for (const auto& row : r.rows) {
      jr["motifs"].push_back({{"motif", row.motif.to_string()},
                              {"observed_count", row.observed_count},
                              {"observed_fraction", row.observed_fraction},
                              {"expected_fraction", row.expected_fraction},
                              {"z", row.z ? json(*row.z) : json(nullptr)},
                              {"p_raw", row.p_raw},
                              {"p_adjusted", row.p_adjusted},
                              {"significant", row.significant},
                              {"degenerate", row.degenerate}});
    }
    doc["reports"].push_back(std::move(jr));
  }
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing stats");
}

std::vector<SignificanceReport> read_stats_json(std::istream& in) {
  std::vector<SignificanceReport> out;
  try {
    const json doc = json::parse(in);
    for (const auto& jr : doc.at("reports")) {
      SignificanceReport r;
      r.k = jr.at("k").get<std::size_t>();
      r.window_total = jr.at("window_total").get<std::uint64_t>();
      r.alpha = jr.at("alpha").get<double>();
      r.m_mode = comparison_count_from_string(jr.at("m_mode").get<std::string>());
      r.comparisons = jr.at("comparisons").get<std::uint64_t>();
      r.z_critical = jr.at("z_critical").get<double>();
      for (const auto& jm : jr.at("motifs")) {
        MotifStats row;
        row.motif = Motif::parse(jm.at("motif").get<std::string>());
        row.observed_count = jm.at("observed_count").get<std::uint64_t>();
        row.observed_fraction = jm.at("observed_fraction").get<double>();
        row.expected_fraction = jm.at("expected_fraction").get<double>();
        if (!jm.at("z").is_null()) row.z = jm.at("z").get<double>();
        row.p_raw = jm.at("p_raw").get<double>();
        row.p_adjusted = jm.at("p_adjusted").get<double>();
        row.significant = jm.at("significant").get<bool>();
        row.degenerate = jm.at("degenerate").get<bool>();
        row.comparisons = r.comparisons;
        r.rows.push_back(std::move(row));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("stats file: ") + e.what());
  }
  return out;
}

std::vector<SignificanceReport> read_stats_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_stats_json(in);
}

}  // namespace seqmotif
