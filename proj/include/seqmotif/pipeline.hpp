#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqmotif/descriptive_stats.hpp"
#include "seqmotif/errors.hpp"
#include "seqmotif/event_model.hpp"
#include "seqmotif/families.hpp"
#include "seqmotif/motif_miner.hpp"
#include "seqmotif/motif_stats.hpp"

namespace seqmotif {

inline constexpr const char* kVersion = "0.3.0";

enum class MarginalMode { exact, rounded_percent };

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<LogFormat> input_format;
  std::optional<std::filesystem::path> first_edits;
  std::chrono::seconds gap_threshold = kDefaultSessionGap;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::map<std::size_t, SupportThreshold> support;  // missing k -> default_support(k)
  double alpha = 0.001;
  ComparisonCount m_mode = ComparisonCount::alphabet_power;
  MarginalMode marginal_mode = MarginalMode::exact;
  std::filesystem::path output_dir = "report";
  SummaryRendering rendering;
  std::size_t top_n = 5;
  bool strict = false;
  FamilyRules families;

  void validate() const;
  SupportThreshold support_for(std::size_t k) const;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& config);
// Keys absent from the document keep their defaults. Relative paths resolve
// against `base_dir`.
PipelineConfig config_from_json(const nlohmann::ordered_json& doc,
                                 const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

struct MotifTableRow {
  std::size_t k = 0;
  std::size_t rank = 0;
  std::string motif;
  std::uint64_t count = 0;
  double observed_fraction = 0.0;
  double expected_fraction = 0.0;
  std::optional<double> z;
};

struct ReportBundle {
  std::vector<LabelSummary> table3;
  std::vector<MotifTableRow> table4;  // most frequent motifs per k
  std::vector<MotifTableRow> table5;  // significant motifs by |z| per k
  std::vector<FamilyRow> families;    // significant motifs tagged by family
  nlohmann::ordered_json metadata;
};

// Thrown when a stage fails; names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// parse -> normalize -> sessionize -> label -> mine -> marginals -> stats
// -> summary -> report. Every intermediate lands in config.output_dir; on
// failure a FAILED marker is written next to whatever was produced.
ReportBundle run_pipeline(const PipelineConfig& config);

// Rebuilds the tables from the intermediates already in `run_dir`.
ReportBundle render_report(const std::filesystem::path& run_dir, const PipelineConfig& config);

void write_report_bundle(const std::filesystem::path& dir, const ReportBundle& bundle,
                         const PipelineConfig& config);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace seqmotif
