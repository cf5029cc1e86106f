#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/labels.hpp"
#include "seqmotif/motif_miner.hpp"

namespace seqmotif {

// Unigram label fractions of a corpus.
struct MarginalFrequencies {
  LabelHistogram counts{};
  std::uint64_t total = 0;
  std::array<double, kLabelCount> fractions{};

  static MarginalFrequencies from_counts(const LabelHistogram& counts);
  // Fractions rounded to whole percent, as printed in summary tables. The
  // rounded values need not sum to one.
  MarginalFrequencies rounded_to_percent() const;

  double fraction(RecencyLabel l) const { return fractions[index_of(l)]; }
};

MarginalFrequencies marginals(std::span<const LabelSequence> sequences);

// Independence null: the product of the motif's label fractions.
double expected_fraction(const Motif& motif, const MarginalFrequencies& marg);

// One-proportion z statistic with the null variance p(1-p)/N.
double z_score(std::uint64_t observed_count, std::uint64_t window_total, double p_expected);

// Standard normal two-tailed tail mass; underflows to 0 for |z| > ~38.
double two_tailed_p(double z);

// |z| whose two-tailed tail mass equals alpha.
double critical_z(double alpha);

double bonferroni(double p_raw, std::uint64_t m);

enum class ComparisonCount { alphabet_power, tested_count };

std::string to_string(ComparisonCount mode);
ComparisonCount comparison_count_from_string(const std::string& text);

struct MotifStats {
  Motif motif;
  std::uint64_t observed_count = 0;
  double observed_fraction = 0.0;
  double expected_fraction = 0.0;
  std::optional<double> z;  // absent when the null variance is zero
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  std::uint64_t comparisons = 1;
  bool significant = false;
  bool degenerate = false;
};

struct SignificanceReport {
  std::size_t k = 0;
  std::uint64_t window_total = 0;
  double alpha = 0.001;
  ComparisonCount m_mode = ComparisonCount::alphabet_power;
  std::uint64_t comparisons = 0;
  double z_critical = 0.0;  // |z| equivalent to alpha / comparisons
  std::vector<MotifStats> rows;  // by |z| descending, count breaks ties
};

// One row per motif in `counts`. Throws ConsistencyError when counts and
// marginals cannot come from the same corpus.
SignificanceReport significance_report(const MotifCounts& counts,
                                       const MarginalFrequencies& marg, double alpha,
                                       ComparisonCount m_mode);

// stats.json: {"reports":[{k, window_total, alpha, m_mode, comparisons,
//   z_critical, "motifs":[...]}], "marginals":{...}}
void write_stats_json(std::ostream& out, std::span<const SignificanceReport> reports,
                      const MarginalFrequencies& marg);
std::vector<SignificanceReport> read_stats_json(std::istream& in);
std::vector<SignificanceReport> read_stats_json(const std::filesystem::path& path);

}  // namespace seqmotif
