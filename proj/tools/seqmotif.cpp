// seqmotif command-line front end.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "seqmotif/csv.hpp"
#include "seqmotif/descriptive_stats.hpp"
#include "seqmotif/errors.hpp"
#include "seqmotif/event_model.hpp"
#include "seqmotif/motif_miner.hpp"
#include "seqmotif/motif_stats.hpp"
#include "seqmotif/pipeline.hpp"
#include "seqmotif/schematizer.hpp"
#include "seqmotif/sequence_analytics.hpp"
#include "seqmotif/sessionizer.hpp"
#include "seqmotif/wiki_ingest.hpp"

namespace fs = std::filesystem;
using namespace seqmotif;

namespace {

// Output goes to `path`, or stdout when path is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
      }
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::chrono::seconds duration_arg(const std::string& text) {
  const auto d = parse_duration(text);
  if (!d || d->count() < 0) throw ArgumentError("bad duration '" + text + "'");
  return *d;
}

// "3" or "2..4".
std::pair<std::size_t, std::size_t> k_range_arg(const std::string& text) {
  std::size_t lo = 0;
  std::size_t hi = 0;
  try {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      lo = hi = std::stoul(text);
    } else {
      lo = std::stoul(text.substr(0, dots));
      hi = std::stoul(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ArgumentError("bad k range '" + text + "'");
  }
  if (lo < kMinMotifLength || hi > kDefaultMaxMotifLength || lo > hi) {
    throw ArgumentError("k range must lie within [2, 10]");
  }
  return {lo, hi};
}

// "k:count" (at least) or "k:>count" (strictly more than).
std::pair<std::size_t, SupportThreshold> support_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("bad support '" + text + "'");
  SupportThreshold t;
  std::string count = text.substr(colon + 1);
  if (!count.empty() && count[0] == '>') {
    t.comparison = SupportComparison::more_than;
    count.erase(0, 1);
  }
  try {
    t.min_count = std::stoull(count);
    return {std::stoul(text.substr(0, colon)), t};
  } catch (const std::exception&) {
    throw ArgumentError("bad support '" + text + "'");
  }
}

MarginalMode marginal_mode_arg(const std::string& text) {
  if (text == "exact") return MarginalMode::exact;
  if (text == "rounded" || text == "rounded-percent") return MarginalMode::rounded_percent;
  throw ArgumentError("unknown marginal mode '" + text + "'");
}

std::optional<LogFormat> format_arg(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  if (text == "csv") return LogFormat::csv;
  if (text == "jsonl") return LogFormat::jsonl;
  throw ArgumentError("unknown format '" + text + "'");
}

EventLog load_events(const std::string& path, const std::string& format, bool strict) {
  ParseOptions opts;
  opts.strict = strict;
  auto parsed = read_event_log(path, format_arg(format), opts);
  for (const auto& issue : parsed.skipped) {
    std::cerr << "warning: line " << issue.line << ": " << issue.message << '\n';
  }
  return normalize(parsed.log);
}

struct FetchArgs {
  std::string titles;
  std::string cutoff;
  std::string cache = "cache";
  std::string out = "events.csv";
  std::string first_edits_out;
  std::string fixtures;
  std::string record;
  std::string endpoint = "https://en.wikipedia.org/w/api.php";
  double rate = 1.0;
  std::size_t concurrency = 2;
  int retries = 3;
  bool offline = false;
};

int do_fetch(const FetchArgs& a) {
  wiki::FetchSpec spec;
  spec.titles = wiki::read_titles(a.titles);
  const auto cutoff = parse_iso8601(a.cutoff);
  if (!cutoff) throw ArgumentError("bad cutoff '" + a.cutoff + "'");
  spec.cutoff = *cutoff;
  spec.cache_dir = a.cache;
  spec.api_endpoint = a.endpoint;
  spec.rate_limit = a.rate;
  spec.concurrency = a.concurrency;
  spec.max_retries = a.retries;

  std::unique_ptr<wiki::HttpTransport> base;
  if (a.offline) {
    base = std::make_unique<wiki::OfflineTransport>();
  } else if (!a.fixtures.empty()) {
    base = std::make_unique<wiki::FixtureTransport>(a.fixtures);
  } else {
    base = wiki::make_http_transport(a.endpoint, std::string("seqmotif/") + kVersion);
  }
  std::unique_ptr<wiki::RecordingTransport> recorder;
  wiki::HttpTransport* transport = base.get();
  if (!a.record.empty()) {
    recorder = std::make_unique<wiki::RecordingTransport>(*base);
    transport = recorder.get();
  }

  wiki::SystemClock clock;
  wiki::WikiClient client(spec, *transport, clock);
  const auto outcome = client.fetch_all();
  for (const auto& f : outcome.failures) {
    std::cerr << (f.not_found ? "not found: " : "failed: ") << f.title << ": " << f.message
              << '\n';
  }
  std::size_t skipped = 0;
  for (const auto& art : outcome.articles) skipped += art.skipped;
  write_event_log(a.out, wiki::export_event_log(outcome.articles), LogFormat::csv);

  if (!a.first_edits_out.empty()) {
    const auto index = client.fetch_first_edits(outcome.articles);
    Sink sink(a.first_edits_out);
    write_first_edits_csv(sink.out(), index);
  }
  if (recorder) recorder->save(a.record);
  std::cerr << fmt::format("fetched {} article(s), {} failure(s), {} revision(s) skipped, {} request(s)\n",
                           outcome.articles.size(), outcome.failures.size(), skipped,
                           client.requests_made());
  return outcome.articles.empty() && !outcome.failures.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral motif mining for collaboration event logs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // fetch
  FetchArgs fa;
  auto* fetch = app.add_subcommand("fetch", "Download revision histories into a cache and export an event log");
  fetch->add_option("--titles", fa.titles, "File with one article title per line")->required();
  fetch->add_option("--cutoff", fa.cutoff, "Inclusive upper bound on revision timestamps (ISO 8601)")->required();
  fetch->add_option("--cache", fa.cache, "Cache directory")->capture_default_str();
  fetch->add_option("--out", fa.out, "Event log CSV to write")->capture_default_str();
  fetch->add_option("--first-edits-out", fa.first_edits_out, "Also resolve first edits and write them as CSV");
  fetch->add_option("--fixtures", fa.fixtures, "Serve API responses from a recorded fixture file");
  fetch->add_option("--record", fa.record, "Save every API exchange to this fixture file");
  fetch->add_flag("--offline", fa.offline, "Fail on any request not served by the cache");
  fetch->add_option("--endpoint", fa.endpoint, "MediaWiki API endpoint")->capture_default_str();
  fetch->add_option("--rate", fa.rate, "Maximum requests per second")->capture_default_str();
  fetch->add_option("--concurrency", fa.concurrency, "Concurrent article fetches")->capture_default_str();
  fetch->add_option("--retries", fa.retries, "Retries per request")->capture_default_str();

  // sessionize
  std::string s_in, s_out, s_gap = "600s", s_format;
  bool s_strict = false;
  auto* sess = app.add_subcommand("sessionize", "Collapse events into editing sessions");
  sess->add_option("--in", s_in, "Event log (CSV or JSONL)")->required();
  sess->add_option("--format", s_format, "csv, jsonl or auto");
  sess->add_option("--gap", s_gap, "Maximum gap inside a session (e.g. 600s, 10m)")->capture_default_str();
  sess->add_option("--out", s_out, "Sessions JSONL (stdout if omitted)");
  sess->add_flag("--strict", s_strict, "Abort on the first malformed row");

  // gap-histogram
  std::string h_in, h_out, h_format;
  auto* hist = app.add_subcommand("gap-histogram", "Histogram of same-performer inter-event gaps");
  hist->add_option("--in", h_in, "Event log (CSV or JSONL)")->required();
  hist->add_option("--format", h_format, "csv, jsonl or auto");
  hist->add_option("--out", h_out, "CSV output (stdout if omitted)");

  // label
  std::string l_sessions, l_first, l_out;
  RecencyBuckets buckets;
  auto* label = app.add_subcommand("label", "Assign A-F recency labels to sessions");
  label->add_option("--sessions", l_sessions, "Sessions JSONL")->required();
  label->add_option("--first-edits", l_first, "CSV performer_id,first_edit_timestamp");
  label->add_option("--out", l_out, "Labels JSONL (stdout if omitted)");
  label->add_option("--a-max", buckets.a_max, "Largest distance labeled A")->capture_default_str();
  label->add_option("--b-max", buckets.b_max, "Largest distance labeled B")->capture_default_str();
  label->add_option("--c-max", buckets.c_max, "Largest distance labeled C")->capture_default_str();

  // mine
  std::string m_labels, m_out, m_k = "2..4";
  auto* mine = app.add_subcommand("mine", "Count k-gram motifs");
  mine->add_option("--labels", m_labels, "Labels JSONL")->required();
  mine->add_option("--k", m_k, "Motif length or range, e.g. 3 or 2..4")->capture_default_str();
  mine->add_option("--out", m_out, "Motif counts JSON (stdout if omitted)");

  // stats
  std::string st_motifs, st_labels, st_out, st_m_mode = "alphabet-power", st_marginals = "exact";
  double st_alpha = 0.001;
  std::vector<std::string> st_support;
  auto* stats = app.add_subcommand("stats", "Test motifs against the label-independence null");
  stats->add_option("--motifs", st_motifs, "Motif counts JSON")->required();
  stats->add_option("--labels", st_labels, "Labels JSONL (source of the marginals)")->required();
  stats->add_option("--alpha", st_alpha, "Family-wise significance level")->capture_default_str();
  stats->add_option("--m-mode", st_m_mode, "alphabet-power or tested-count")->capture_default_str();
  stats->add_option("--marginals", st_marginals, "exact or rounded")->capture_default_str();
  stats->add_option("--support", st_support, "Per-k support, k:count (>=) or k:>count");
  stats->add_option("--out", st_out, "Stats JSON (stdout if omitted)");

  // summary
  std::string su_sessions, su_labels, su_out, su_dur = "hours", su_gap = "days",
                                              su_size = "magnitude", su_format = "csv";
  auto* summary = app.add_subcommand("summary", "Per-label session summary table");
  summary->add_option("--sessions", su_sessions, "Sessions JSONL")->required();
  summary->add_option("--labels", su_labels, "Labels JSONL")->required();
  summary->add_option("--out", su_out, "Output (stdout if omitted)");
  summary->add_option("--format", su_format, "csv or md")->capture_default_str();
  summary->add_option("--duration-unit", su_dur, "seconds, minutes, hours or days")->capture_default_str();
  summary->add_option("--gap-unit", su_gap, "seconds, minutes, hours or days")->capture_default_str();
  summary->add_option("--size-mode", su_size, "magnitude or raw")->capture_default_str();

  // analyze
  std::string an_mode, an_labels, an_out, an_costs = "1,1,1", an_linkage = "average";
  std::size_t an_k = 2;
  auto* analyze = app.add_subcommand("analyze", "Transition matrix, distance matrix or clustering");
  analyze->add_option("mode", an_mode, "transitions, distance or cluster")
      ->required()
      ->check(CLI::IsMember({"transitions", "distance", "cluster"}));
  analyze->add_option("--labels", an_labels, "Labels JSONL")->required();
  analyze->add_option("--out", an_out, "CSV output (stdout if omitted)");
  analyze->add_option("--costs", an_costs, "Edit costs insert,delete,substitute")->capture_default_str();
  analyze->add_option("--linkage", an_linkage, "single, complete or average")->capture_default_str();
  analyze->add_option("--k", an_k, "Clusters to cut the dendrogram into")->capture_default_str();

  // report
  std::string r_dir, r_config;
  auto* report = app.add_subcommand("report", "Render tables from the intermediates of a run");
  report->add_option("--run-dir", r_dir, "Directory written by `run`")->required();
  report->add_option("--config", r_config, "Config used for rendering (defaults otherwise)");

  // run
  std::string ru_config, ru_input, ru_first, ru_out, ru_gap, ru_k, ru_m_mode, ru_marginals;
  std::optional<double> ru_alpha;
  bool ru_strict = false;
  auto* run = app.add_subcommand("run", "Full pipeline: parse through report");
  run->add_option("--config", ru_config, "JSON config mirroring the pipeline options");
  run->add_option("--input", ru_input, "Event log (overrides config)");
  run->add_option("--first-edits", ru_first, "First-edit CSV (overrides config)");
  run->add_option("--out", ru_out, "Output directory (overrides config)");
  run->add_option("--gap", ru_gap, "Session gap (overrides config)");
  run->add_option("--k", ru_k, "Motif length range (overrides config)");
  run->add_option("--alpha", ru_alpha, "Significance level (overrides config)");
  run->add_option("--m-mode", ru_m_mode, "alphabet-power or tested-count");
  run->add_option("--marginals", ru_marginals, "exact or rounded");
  run->add_flag("--strict", ru_strict, "Abort on the first malformed row");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fetch) return do_fetch(fa);

    if (*sess) {
      const auto log = load_events(s_in, s_format, s_strict);
      const auto vectors = sessionize_corpus(log, duration_arg(s_gap));
      Sink sink(s_out);
      write_sessions_jsonl(sink.out(), vectors);
      std::cerr << fmt::format("{} event(s) -> {} session(s)\n", log.size(), total_sessions(vectors));
      return 0;
    }

    if (*hist) {
      const auto log = load_events(h_in, h_format, false);
      Sink sink(h_out);
      write_gap_histogram_csv(sink.out(), gap_histogram(log));
      return 0;
    }

    if (*label) {
      buckets.validate();
      const auto vectors = read_sessions_jsonl(fs::path(l_sessions));
      FirstEditIndex first;
      if (!l_first.empty()) first = read_first_edits_csv(fs::path(l_first));
      for (const auto& v : first_edit_violations(vectors, first)) {
        std::cerr << "warning: " << v << '\n';
      }
      LabelingHook hook = [&](const SessionVector& vec, const FirstEditIndex& idx) {
        return label_sessions(vec, idx, buckets);
      };
      const auto corpus = label_corpus(vectors, first, hook);
      Sink sink(l_out);
      write_labels_jsonl(sink.out(), corpus.sequences);
      return 0;
    }

    if (*mine) {
      const auto [lo, hi] = k_range_arg(m_k);
      const auto seqs = read_labels_jsonl(fs::path(m_labels));
      std::vector<MotifCounts> levels;
      for (std::size_t k = lo; k <= hi; ++k) levels.push_back(count_motifs(seqs, k));
      Sink sink(m_out);
      write_motifs_json(sink.out(), levels);
      return 0;
    }

    if (*stats) {
      if (!(st_alpha > 0.0 && st_alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
      std::map<std::size_t, SupportThreshold> support;
      for (const auto& s : st_support) support.insert(support_arg(s));
      const auto seqs = read_labels_jsonl(fs::path(st_labels));
      auto marg = marginals(seqs);
      if (marginal_mode_arg(st_marginals) == MarginalMode::rounded_percent) {
        marg = marg.rounded_to_percent();
      }
      const auto mode = comparison_count_from_string(st_m_mode);
      std::vector<SignificanceReport> reports;
      for (const auto& level : read_motifs_json(fs::path(st_motifs))) {
        const auto it = support.find(level.k);
        const auto threshold = it == support.end() ? default_support(level.k) : it->second;
        reports.push_back(significance_report(filter_by_support(level, threshold), marg, st_alpha, mode));
      }
      Sink sink(st_out);
      write_stats_json(sink.out(), reports, marg);
      return 0;
    }

    if (*summary) {
      SummaryRendering rendering;
      rendering.duration_unit = time_unit_from_string(su_dur);
      rendering.gap_unit = time_unit_from_string(su_gap);
      rendering.size_mode = size_mode_from_string(su_size);
      const auto vectors = read_sessions_jsonl(fs::path(su_sessions));
      const auto seqs = read_labels_jsonl(fs::path(su_labels));
      const auto rows = summarize_labels(vectors, seqs, rendering.size_mode);
      Sink sink(su_out);
      if (su_format == "md") {
        write_label_summary_markdown(sink.out(), rows, rendering);
      } else if (su_format == "csv") {
        write_label_summary_csv(sink.out(), rows, rendering);
      } else {
        throw ArgumentError("unknown summary format '" + su_format + "'");
      }
      return 0;
    }

    if (*analyze) {
      const auto seqs = read_labels_jsonl(fs::path(an_labels));
      Sink sink(an_out);
      if (an_mode == "transitions") {
        write_transition_csv(sink.out(), transition_matrix(seqs));
        return 0;
      }
      const auto dm = distance_matrix(seqs, edit_distance_metric(parse_edit_costs(an_costs)));
      if (an_mode == "distance") {
        write_distance_csv(sink.out(), dm);
        return 0;
      }
      const auto linkage = linkage_from_string(an_linkage);
      const auto assignment = cluster_sequences(dm, linkage, an_k);
      sink.out() << "artifact_id,cluster\n";
      for (std::size_t i = 0; i < dm.size(); ++i) {
        csv::write_row(sink.out(), {dm.ids()[i], std::to_string(assignment[i])});
      }
      return 0;
    }

    if (*report) {
      const PipelineConfig config = r_config.empty() ? PipelineConfig{} : load_config(r_config);
      render_report(r_dir, config);
      return 0;
    }

    if (*run) {
      PipelineConfig config = ru_config.empty() ? PipelineConfig{} : load_config(ru_config);
      if (!ru_input.empty()) config.input = ru_input;
      if (!ru_first.empty()) config.first_edits = fs::path(ru_first);
      if (!ru_out.empty()) config.output_dir = ru_out;
      if (!ru_gap.empty()) config.gap_threshold = duration_arg(ru_gap);
      if (!ru_k.empty()) std::tie(config.k_min, config.k_max) = k_range_arg(ru_k);
      if (ru_alpha) config.alpha = *ru_alpha;
      if (!ru_m_mode.empty()) config.m_mode = comparison_count_from_string(ru_m_mode);
      if (!ru_marginals.empty()) config.marginal_mode = marginal_mode_arg(ru_marginals);
      if (ru_strict) config.strict = true;
      if (config.input.empty()) throw ArgumentError("no input: pass --input or a config with \"input\"");
      config.validate();
      const auto bundle = run_pipeline(config);
      std::cerr << fmt::format("report written to {} ({} significant motif(s))\n",
                               config.output_dir.string(), bundle.families.size());
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
