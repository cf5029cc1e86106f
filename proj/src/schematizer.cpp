#include "seqmotif/schematizer.hpp"

#include <fstream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "seqmotif/csv.hpp"
#include "seqmotif/errors.hpp"

namespace seqmotif {
namespace {
using json = nlohmann::ordered_json;
}  // namespace

std::string LabelSequence::to_string() const {
  std::string s;
  s.reserve(labels.size());
  for (auto l : labels) s.push_back(to_char(l));
  return s;
}

std::vector<RecencyLabel> parse_labels(std::string_view text) {
  std::vector<RecencyLabel> out;
  out.reserve(text.size());
  for (char c : text) {
    const auto l = label_from_char(c);
    if (!l) throw ArgumentError(std::string("invalid recency label '") + c + "'");
    out.push_back(*l);
  }
  return out;
}

void FirstEditIndex::set(std::string performer_id, Instant first_edit) {
  entries_[std::move(performer_id)] = first_edit;
}

std::optional<Instant> FirstEditIndex::find(const std::string& performer_id) const {
  const auto it = entries_.find(performer_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RecencyBuckets::validate() const {
  if (a_max < 1 || b_max <= a_max || c_max <= b_max) {
    throw ArgumentError("recency buckets must satisfy 1 <= a_max < b_max < c_max");
  }
}

RecencyLabel RecencyBuckets::classify(std::size_t d) const {
  if (d <= a_max) return RecencyLabel::A;
  if (d <= b_max) return RecencyLabel::B;
  if (d <= c_max) return RecencyLabel::C;
  return RecencyLabel::D;
}

LabelSequence label_sessions(const SessionVector& vec, const FirstEditIndex& first_edits,
                             const RecencyBuckets& buckets) {
  buckets.validate();
  if (vec.sessions.empty()) {
    throw PreconditionError("label_sessions: artifact '" + vec.artifact_id + "' has no sessions");
  }
  LabelSequence out;
  out.artifact_id = vec.artifact_id;
  out.labels.reserve(vec.sessions.size());
  out.ordinals.reserve(vec.sessions.size());

  std::unordered_map<std::string, std::size_t> last_seen;
  for (std::size_t i = 0; i < vec.sessions.size(); ++i) {
    const Session& s = vec.sessions[i];
    if (s.ordinal != i + 1) {
      throw PreconditionError("label_sessions: ordinal gap in '" + vec.artifact_id +
                              "' at position " + std::to_string(i + 1));
    }
    RecencyLabel label;
    if (const auto it = last_seen.find(s.performer_id); it != last_seen.end()) {
      label = buckets.classify(s.ordinal - it->second);
    } else {
      const auto first = first_edits.find(s.performer_id);
      label = first && *first == s.start ? RecencyLabel::F : RecencyLabel::E;
    }
    last_seen[s.performer_id] = s.ordinal;
    out.labels.push_back(label);
    out.ordinals.push_back(s.ordinal);
  }
  return out;
}

LabelHistogram histogram_of(std::span<const LabelSequence> sequences) {
  LabelHistogram h{};
  for (const auto& seq : sequences) {
    for (auto l : seq.labels) ++h[index_of(l)];
  }
  return h;
}

LabeledCorpus label_corpus(std::span<const SessionVector> vectors,
                           const FirstEditIndex& first_edits, const LabelingHook& hook) {
  LabeledCorpus out;
  out.sequences.reserve(vectors.size());
  for (const auto& v : vectors) {
    out.sequences.push_back(hook ? hook(v, first_edits) : label_sessions(v, first_edits));
  }
  out.histogram = histogram_of(out.sequences);
  return out;
}

std::vector<std::string> first_edit_violations(std::span<const SessionVector> vectors,
                                               const FirstEditIndex& first_edits) {
  std::vector<std::string> out;
  for (const auto& v : vectors) {
    for (const auto& s : v.sessions) {
      const auto first = first_edits.find(s.performer_id);
      if (first && s.start < *first) {
        out.push_back(s.performer_id + " edits '" + v.artifact_id + "' at " +
                      format_iso8601(s.start) + " before recorded first edit " +
                      format_iso8601(*first));
      }
    }
  }
  return out;
}

FirstEditIndex read_first_edits_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  std::vector<std::string> header;
  while (reader.next(fields)) {
    if (!fields.empty()) {
      header = fields;
      break;
    }
  }
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError(name, "first-edits file is missing column '" + name + "'");
  };
  const std::size_t performer_col = column("performer_id");
  const std::size_t ts_col = column("first_edit_timestamp");
  FirstEditIndex index;
  while (reader.next(fields)) {
    if (fields.empty()) continue;
    if (fields.size() != header.size()) {
      throw ParseError(reader.record_line(),
                       "first-edits line " + std::to_string(reader.record_line()) +
                           ": wrong field count");
    }
    if (fields[ts_col].empty()) continue;
    const auto ts = parse_iso8601(fields[ts_col]);
    if (!ts) {
      throw ParseError(reader.record_line(), "first-edits line " +
                                                 std::to_string(reader.record_line()) +
                                                 ": bad timestamp '" + fields[ts_col] + "'");
    }
    index.set(fields[performer_col], *ts);
  }
  return index;
}

FirstEditIndex read_first_edits_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_first_edits_csv(in);
}

void write_first_edits_csv(std::ostream& out, const FirstEditIndex& index) {
  out << "performer_id,first_edit_timestamp\n";
  for (const auto& [performer, ts] : index.entries()) {
    csv::write_row(out, {performer, format_iso8601(ts)});
  }
}

void write_labels_jsonl(std::ostream& out, std::span<const LabelSequence> sequences) {
  for (const auto& seq : sequences) {
    json obj;
    obj["artifact_id"] = seq.artifact_id;
    obj["labels"] = seq.to_string();
    obj["ordinals"] = seq.ordinals;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing labels");
}

std::vector<LabelSequence> read_labels_jsonl(std::istream& in) {
  std::vector<LabelSequence> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    LabelSequence seq;
    try {
      const json obj = json::parse(text);
      seq.artifact_id = obj.at("artifact_id").get<std::string>();
      seq.labels = parse_labels(obj.at("labels").get<std::string>());
      if (const auto it = obj.find("ordinals"); it != obj.end()) {
        seq.ordinals = it->get<std::vector<std::size_t>>();
      } else {
        for (std::size_t i = 1; i <= seq.labels.size(); ++i) seq.ordinals.push_back(i);
      }
    } catch (const json::exception& e) {
      throw ParseError(line, "labels line " + std::to_string(line) + ": " + e.what());
    } catch (const ArgumentError& e) {
      throw ParseError(line, "labels line " + std::to_string(line) + ": " + e.what());
    }
    if (seq.ordinals.size() != seq.labels.size()) {
      throw ParseError(line, "labels line " + std::to_string(line) +
                                 ": ordinals and labels differ in length");
    }
    out.push_back(std::move(seq));
  }
  if (in.bad()) throw IoError("failed reading labels");
  return out;
}

std::vector<LabelSequence> read_labels_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_labels_jsonl(in);
}

}  // namespace seqmotif
