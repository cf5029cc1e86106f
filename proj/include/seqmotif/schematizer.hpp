#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/labels.hpp"
#include "seqmotif/sessionizer.hpp"

namespace seqmotif {

struct LabelSequence {
  std::string artifact_id;
  std::vector<RecencyLabel> labels;
  std::vector<std::size_t> ordinals;  // parallel to labels

  std::string to_string() const;
  std::size_t size() const { return labels.size(); }
  bool operator==(const LabelSequence&) const = default;
};

// Performer -> instant of their first-ever platform activity.
class FirstEditIndex {
 public:
  void set(std::string performer_id, Instant first_edit);
  std::optional<Instant> find(const std::string& performer_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Instant>& entries() const { return entries_; }

 private:
  std::map<std::string, Instant> entries_;
};

// Upper bounds of the A, B and C buckets on the ordinal distance d to the
// performer's previous session; anything above c_max is D.
struct RecencyBuckets {
  std::size_t a_max = 1;
  std::size_t b_max = 2;
  std::size_t c_max = 5;

  void validate() const;
  RecencyLabel classify(std::size_t distance) const;
};

LabelSequence label_sessions(const SessionVector& vec, const FirstEditIndex& first_edits,
                             const RecencyBuckets& buckets = {});

// Alternative alphabets plug in here; the default is label_sessions.
using LabelingHook =
    std::function<LabelSequence(const SessionVector&, const FirstEditIndex&)>;

struct LabeledCorpus {
  std::vector<LabelSequence> sequences;
  LabelHistogram histogram{};
};

LabeledCorpus label_corpus(std::span<const SessionVector> vectors,
                           const FirstEditIndex& first_edits,
                           const LabelingHook& hook = {});

LabelHistogram histogram_of(std::span<const LabelSequence> sequences);

// Entries that claim a first edit later than some corpus session of the
// same performer.
std::vector<std::string> first_edit_violations(std::span<const SessionVector> vectors,
                                               const FirstEditIndex& first_edits);

// first_edits.csv: performer_id,first_edit_timestamp. Empty timestamps mean
// unknown and are skipped.
FirstEditIndex read_first_edits_csv(std::istream& in);
FirstEditIndex read_first_edits_csv(const std::filesystem::path& path);
void write_first_edits_csv(std::ostream& out, const FirstEditIndex& index);

// labels.jsonl: {"artifact_id":..., "labels":"EEECEB", "ordinals":[1,...]}
void write_labels_jsonl(std::ostream& out, std::span<const LabelSequence> sequences);
std::vector<LabelSequence> read_labels_jsonl(std::istream& in);
std::vector<LabelSequence> read_labels_jsonl(const std::filesystem::path& path);

std::vector<RecencyLabel> parse_labels(std::string_view text);

}  // namespace seqmotif
