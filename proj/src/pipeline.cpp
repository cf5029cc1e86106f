#include "seqmotif/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "seqmotif/csv.hpp"
#include "seqmotif/schematizer.hpp"
#include "seqmotif/sessionizer.hpp"

namespace seqmotif {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string to_string(SupportComparison c) {
  return c == SupportComparison::at_least ? "at_least" : "more_than";
}

SupportComparison support_comparison_from_string(const std::string& s) {
  if (s == "at_least" || s == ">=") return SupportComparison::at_least;
  if (s == "more_than" || s == ">") return SupportComparison::more_than;
  throw ArgumentError("unknown support comparison '" + s + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::string percent(double fraction) { return fmt::format("{:.2f}%", fraction * 100.0); }

std::string z_text(const std::optional<double>& z) {
  return z ? fmt::format("{:.1f}", *z) : std::string("n/a");
}

std::string dashed(const std::string& motif) {
  std::string out;
  for (char c : motif) {
    if (!out.empty()) out.push_back('-');
    out.push_back(c);
  }
  return out;
}

// Runs `fn` as pipeline stage `name`, converting failures to StageError.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_motif_tables(const fs::path& dir, const std::string& stem,
                        const std::vector<MotifTableRow>& rows, bool with_stats) {
  {
    auto out = open_out(dir / (stem + ".csv"));
    if (with_stats) {
      csv::write_row(out, {"k", "rank", "motif", "count", "expected_percent", "observed_percent", "z"});
    } else {
      csv::write_row(out, {"k", "rank", "motif", "count", "fraction_percent"});
    }
    for (const auto& r : rows) {
      std::vector<std::string> f{std::to_string(r.k), std::to_string(r.rank), r.motif,
                                 std::to_string(r.count)};
      if (with_stats) {
        f.push_back(fmt::format("{:.4f}", r.expected_fraction * 100.0));
        f.push_back(fmt::format("{:.4f}", r.observed_fraction * 100.0));
        f.push_back(r.z ? fmt::format("{:.3f}", *r.z) : "n/a");
      } else {
        f.push_back(fmt::format("{:.4f}", r.observed_fraction * 100.0));
      }
      csv::write_row(out, f);
    }
  }
  auto md = open_out(dir / (stem + ".md"));
  if (with_stats) {
    md << "| k | Motif | Expected | Observed | Z-Score |\n|---:|---|---:|---:|---:|\n";
    for (const auto& r : rows) {
      md << "| " << r.k << " | " << dashed(r.motif) << " | " << percent(r.expected_fraction)
         << " | " << percent(r.observed_fraction) << " | " << z_text(r.z) << " |\n";
    }
  } else {
    md << "| k | Motif | Count | Fraction |\n|---:|---|---:|---:|\n";
    for (const auto& r : rows) {
      md << "| " << r.k << " | " << dashed(r.motif) << " | " << r.count << " | "
         << fmt::format("{:.1f}%", r.observed_fraction * 100.0) << " |\n";
    }
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

void PipelineConfig::validate() const {
  if (k_min < kMinMotifLength || k_max > kDefaultMaxMotifLength || k_min > k_max) {
    throw ArgumentError("k range must lie within [2, 10]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (gap_threshold.count() < 0) throw ArgumentError("gap threshold must be non-negative");
}

SupportThreshold PipelineConfig::support_for(std::size_t k) const {
  const auto it = support.find(k);
  return it == support.end() ? default_support(k) : it->second;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["input"] = c.input.generic_string();
  j["input_format"] = c.input_format
                          ? json(*c.input_format == LogFormat::csv ? "csv" : "jsonl")
                          : json(nullptr);
  j["first_edits"] = c.first_edits ? json(c.first_edits->generic_string()) : json(nullptr);
  j["gap_seconds"] = c.gap_threshold.count();
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  json support = json::object();
  for (std::size_t k = c.k_min; k <= c.k_max; ++k) {
    const auto s = c.support_for(k);
    support[std::to_string(k)] = {{"min_count", s.min_count}, {"comparison", to_string(s.comparison)}};
  }
  j["support"] = std::move(support);
  j["alpha"] = c.alpha;
  j["m_mode"] = to_string(c.m_mode);
  j["marginal_mode"] = c.marginal_mode == MarginalMode::exact ? "exact" : "rounded-percent";
  j["output_dir"] = c.output_dir.generic_string();
  j["duration_unit"] = to_string(c.rendering.duration_unit);
  j["gap_unit"] = to_string(c.rendering.gap_unit);
  j["size_mode"] = to_string(c.rendering.size_mode);
  j["top_n"] = c.top_n;
  j["strict"] = c.strict;
  j["families"] = {{"solo", c.families.solo},
                   {"reactive", c.families.reactive},
                   {"inactive", c.families.inactive},
                   {"distinctive", c.families.distinctive},
                   {"distinctive_needs_negative_z", c.families.distinctive_needs_negative_z}};
  return j;
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  auto path_of = [&](const std::string& s) {
    fs::path p(s);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  try {
    if (j.contains("input")) c.input = path_of(j["input"].get<std::string>());
    if (j.contains("input_format") && !j["input_format"].is_null()) {
      const auto f = j["input_format"].get<std::string>();
      if (f == "csv") c.input_format = LogFormat::csv;
      else if (f == "jsonl") c.input_format = LogFormat::jsonl;
      else throw ArgumentError("unknown input_format '" + f + "'");
    }
    if (j.contains("first_edits") && !j["first_edits"].is_null()) {
      c.first_edits = path_of(j["first_edits"].get<std::string>());
    }
    if (j.contains("gap_seconds")) c.gap_threshold = std::chrono::seconds{j["gap_seconds"].get<std::int64_t>()};
    if (j.contains("gap")) {
      const auto g = parse_duration(j["gap"].get<std::string>());
      if (!g) throw ArgumentError("bad gap duration");
      c.gap_threshold = *g;
    }
    c.k_min = j.value("k_min", c.k_min);
    c.k_max = j.value("k_max", c.k_max);
    if (j.contains("support")) {
      for (const auto& [k, v] : j["support"].items()) {
        SupportThreshold t;
        t.min_count = v.at("min_count").get<std::uint64_t>();
        t.comparison = support_comparison_from_string(v.value("comparison", std::string("at_least")));
        c.support[static_cast<std::size_t>(std::stoul(k))] = t;
      }
    }
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("m_mode")) c.m_mode = comparison_count_from_string(j["m_mode"].get<std::string>());
    if (j.contains("marginal_mode")) {
      const auto m = j["marginal_mode"].get<std::string>();
      if (m == "exact") c.marginal_mode = MarginalMode::exact;
      else if (m == "rounded-percent" || m == "rounded") c.marginal_mode = MarginalMode::rounded_percent;
      else throw ArgumentError("unknown marginal_mode '" + m + "'");
    }
    if (j.contains("output_dir")) c.output_dir = path_of(j["output_dir"].get<std::string>());
    if (j.contains("duration_unit")) c.rendering.duration_unit = time_unit_from_string(j["duration_unit"].get<std::string>());
    if (j.contains("gap_unit")) c.rendering.gap_unit = time_unit_from_string(j["gap_unit"].get<std::string>());
    if (j.contains("size_mode")) c.rendering.size_mode = size_mode_from_string(j["size_mode"].get<std::string>());
    c.top_n = j.value("top_n", c.top_n);
    c.strict = j.value("strict", c.strict);
    if (j.contains("families")) {
      const auto& f = j["families"];
      c.families.solo = f.value("solo", c.families.solo);
      c.families.reactive = f.value("reactive", c.families.reactive);
      c.families.inactive = f.value("inactive", c.families.inactive);
      c.families.distinctive = f.value("distinctive", c.families.distinctive);
      c.families.distinctive_needs_negative_z =
          f.value("distinctive_needs_negative_z", c.families.distinctive_needs_negative_z);
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

ReportBundle run_pipeline(const PipelineConfig& config) {
  config.validate();
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  fs::remove(dir / "FAILED", ec);

  try {
    json run;
    run["version"] = kVersion;
    run["config"] = config_to_json(config);
    run["config"].erase("output_dir");
    // File names only, so the bundle does not depend on the working directory.
    run["config"]["input"] = config.input.filename().generic_string();
    if (config.first_edits) {
      run["config"]["first_edits"] = config.first_edits->filename().generic_string();
    }

    const ParseResult parsed = stage("parse", [&] {
      ParseOptions opts;
      opts.strict = config.strict;
      return read_event_log(config.input, config.input_format, opts);
    });
    {
      auto out = open_out(dir / "parse_issues.csv");
      csv::write_row(out, {"line", "message"});
      for (const auto& issue : parsed.skipped) {
        csv::write_row(out, {std::to_string(issue.line), issue.message});
      }
    }

    const EventLog log = stage("normalize", [&] {
      EventLog normalized = normalize(parsed.log);
      std::ostringstream bytes;
      write_event_log(bytes, normalized, LogFormat::csv);
      auto out = open_out(dir / "events.normalized.csv");
      out << bytes.str();
      run["corpus_hash"] = fnv1a_hex(bytes.str());
      return normalized;
    });
    run["events_parsed"] = parsed.log.size();
    run["rows_skipped"] = parsed.skipped.size();
    run["events_normalized"] = log.size();
    run["artifacts"] = log.artifact_index().size();
    run["performers"] = log.performer_count();

    const auto vectors = stage("sessionize", [&] {
      auto v = sessionize_corpus(log, config.gap_threshold);
      auto out = open_out(dir / "sessions.jsonl");
      write_sessions_jsonl(out, v);
      return v;
    });
    run["sessions"] = total_sessions(vectors);

    const LabeledCorpus labeled = stage("label", [&] {
      FirstEditIndex first_edits;
      if (config.first_edits) first_edits = read_first_edits_csv(*config.first_edits);
      run["first_edit_violations"] = first_edit_violations(vectors, first_edits);
      auto corpus = label_corpus(vectors, first_edits);
      auto out = open_out(dir / "labels.jsonl");
      write_labels_jsonl(out, corpus.sequences);
      return corpus;
    });

    const auto levels = stage("mine", [&] {
      std::vector<MotifCounts> l;
      for (std::size_t k = config.k_min; k <= config.k_max; ++k) {
        l.push_back(count_motifs(labeled.sequences, k));
      }
      auto out = open_out(dir / "motifs.json");
      write_motifs_json(out, l);
      return l;
    });

    const MarginalFrequencies marg = stage("marginals", [&] {
      auto m = marginals(labeled.sequences);
      return config.marginal_mode == MarginalMode::exact ? m : m.rounded_to_percent();
    });

    stage("stats", [&] {
      std::vector<SignificanceReport> reports;
      for (const auto& level : levels) {
        reports.push_back(significance_report(filter_by_support(level, config.support_for(level.k)),
                                              marg, config.alpha, config.m_mode));
      }
      auto out = open_out(dir / "stats.json");
      write_stats_json(out, reports, marg);
      return 0;
    });

    stage("summary", [&] {
      summarize_labels(vectors, labeled.sequences, config.rendering.size_mode);
      return 0;
    });

    {
      auto out = open_out(dir / "run.json");
      out << run.dump(2) << '\n';
    }
    return stage("report", [&] { return render_report(dir, config); });
  } catch (const StageError& e) {
    std::ofstream marker(dir / "FAILED", std::ios::trunc);
    marker << e.stage() << ": " << e.what() << '\n';
    throw;
  }
}

ReportBundle render_report(const fs::path& dir, const PipelineConfig& config) {
  ReportBundle bundle;
  const auto vectors = read_sessions_jsonl(dir / "sessions.jsonl");
  const auto sequences = read_labels_jsonl(dir / "labels.jsonl");
  const auto levels = read_motifs_json(dir / "motifs.json");
  const auto reports = read_stats_json(dir / "stats.json");

  bundle.table3 = summarize_labels(vectors, sequences, config.rendering.size_mode);

  for (const auto& level : levels) {
    const auto ranked = rank_by_count(level);
    for (std::size_t i = 0; i < ranked.size() && i < config.top_n; ++i) {
      MotifTableRow row;
      row.k = level.k;
      row.rank = i + 1;
      row.motif = ranked[i].motif.to_string();
      row.count = ranked[i].count;
      row.observed_fraction = ranked[i].fraction;
      bundle.table4.push_back(std::move(row));
    }
  }

  std::vector<MotifStats> significant;
  for (const auto& report : reports) {
    std::size_t rank = 0;
    for (const auto& s : report.rows) {
      if (!s.significant) continue;
      significant.push_back(s);
      if (rank >= config.top_n) continue;
      MotifTableRow row;
      row.k = report.k;
      row.rank = ++rank;
      row.motif = s.motif.to_string();
      row.count = s.observed_count;
      row.observed_fraction = s.observed_fraction;
      row.expected_fraction = s.expected_fraction;
      row.z = s.z;
      bundle.table5.push_back(std::move(row));
    }
  }

  auto tagged = classify_motif_families(significant, config.families);
  std::stable_sort(tagged.begin(), tagged.end(), [](const FamilyRow& a, const FamilyRow& b) {
    return static_cast<int>(a.family) < static_cast<int>(b.family);
  });
  bundle.families = std::move(tagged);

  json meta;
  std::ifstream run_in(dir / "run.json");
  if (run_in) {
    meta["run"] = json::parse(run_in, nullptr, false);
  } else {
    meta["run"] = json{{"version", kVersion}, {"config", config_to_json(config)}};
  }
  meta["families"] = "heuristic rule-based grouping";
  meta["size_mode"] = to_string(config.rendering.size_mode);
  meta["m_mode"] = to_string(config.m_mode);
  meta["generated_at"] = format_iso8601(Instant{std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::system_clock::now().time_since_epoch()).count()});
  bundle.metadata = std::move(meta);

  write_report_bundle(dir, bundle, config);
  return bundle;
}

void write_report_bundle(const fs::path& dir, const ReportBundle& bundle,
                         const PipelineConfig& config) {
  {
    auto out = open_out(dir / "table3.csv");
    write_label_summary_csv(out, bundle.table3, config.rendering);
  }
  {
    auto out = open_out(dir / "table3.md");
    write_label_summary_markdown(out, bundle.table3, config.rendering);
  }
  write_motif_tables(dir, "table4", bundle.table4, false);
  write_motif_tables(dir, "table5", bundle.table5, true);
  {
    auto out = open_out(dir / "families.csv");
    csv::write_row(out, {"family", "k", "motif", "example", "count", "z", "significant"});
    for (const auto& f : bundle.families) {
      csv::write_row(out, {to_string(f.family), std::to_string(f.stats.motif.size()),
                           f.stats.motif.to_string(), f.example,
                           std::to_string(f.stats.observed_count),
                           f.stats.z ? fmt::format("{:.3f}", *f.stats.z) : "n/a",
                           f.stats.significant ? "1" : "0"});
    }
  }
  {
    auto md = open_out(dir / "families.md");
    md << "Family groupings are heuristic.\n";
    std::optional<MotifFamily> current;
    for (const auto& f : bundle.families) {
      if (current != f.family) {
        current = f.family;
        md << "\n### " << to_string(f.family) << "\n\n| Motif | Example | Count | Z-Score |\n"
           << "|---|---|---:|---:|\n";
      }
      md << "| " << dashed(f.stats.motif.to_string()) << " | " << f.example << " | "
         << f.stats.observed_count << " | " << z_text(f.stats.z) << " |\n";
    }
  }
  {
    auto out = open_out(dir / "metadata.json");
    out << bundle.metadata.dump(2) << '\n';
  }
}

}  // namespace seqmotif
