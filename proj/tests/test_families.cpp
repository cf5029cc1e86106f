#include <doctest.h>

#include "seqmotif/families.hpp"
#include "seqmotif/schematizer.hpp"

using namespace seqmotif;

namespace {

MotifFamily family(const std::string& m, std::optional<double> z = 5.0) {
  return classify_motif(Motif::parse(m), z);
}

// Labels an explicit performer string like "U1-U1-U2" and returns the last
// `k` labels.
std::string label_tail(const std::string& performers, std::size_t k) {
  SessionVector v;
  v.artifact_id = "X";
  std::size_t pos = 0;
  std::size_t ordinal = 1;
  while (pos < performers.size()) {
    const auto dash = performers.find('-', pos);
    Session s;
    s.artifact_id = "X";
    s.performer_id = performers.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
    s.start = s.end = Instant{static_cast<std::int64_t>(ordinal) * 10000};
    s.ordinal = ordinal++;
    v.sessions.push_back(s);
    if (dash == std::string::npos) break;
    pos = dash + 1;
  }
  const auto l = label_sessions(v, {}).to_string();
  return l.substr(l.size() - k);
}

}  // namespace

TEST_CASE("family rules") {
  CHECK(family("AAA") == MotifFamily::solo);
  CHECK(family("AA") == MotifFamily::solo);
  CHECK(family("EAA") == MotifFamily::solo);
  CHECK(family("AAE") == MotifFamily::solo);
  CHECK(family("AAAE") == MotifFamily::solo);
  CHECK(family("BBE") == MotifFamily::reactive);
  CHECK(family("BB") == MotifFamily::reactive);
  CHECK(family("EBBB") == MotifFamily::reactive);
  CHECK(family("EEE") == MotifFamily::inactive);
  CHECK(family("EDE") == MotifFamily::inactive);
  CHECK(family("AE", -3.0) == MotifFamily::distinctive);
  CHECK(family("AE", 3.0) == MotifFamily::unclassified);
  CHECK(family("ECE", -4.0) == MotifFamily::distinctive);
  CHECK(family("ABC") == MotifFamily::unclassified);
  CHECK(family("AEA") == MotifFamily::unclassified);
}

TEST_CASE("family precedence follows the rule order") {
  // Matches both the solo pattern and, were it below chance, nothing else.
  CHECK(family("AAE", -3.0) == MotifFamily::solo);
  // Reactive beats distinctive.
  CHECK(family("BBE", -3.0) == MotifFamily::reactive);
}

TEST_CASE("rules are configurable") {
  FamilyRules rules;
  rules.distinctive_needs_negative_z = false;
  CHECK(classify_motif(Motif::parse("AE"), 3.0, rules) == MotifFamily::distinctive);
  rules.solo = "^A+$";
  CHECK(classify_motif(Motif::parse("EAA"), 3.0, rules) == MotifFamily::unclassified);
}

TEST_CASE("example performer sequences reproduce their motif") {
  CHECK(*example_performer_sequence(Motif::parse("AA")) == "U1-U1-U1");
  CHECK(*example_performer_sequence(Motif::parse("AAA")) == "U1-U1-U1-U1");
  CHECK(*example_performer_sequence(Motif::parse("BB")) == "U1-U2-U1-U2");
  CHECK(*example_performer_sequence(Motif::parse("BBB")) == "U1-U2-U1-U2-U1");
  CHECK(*example_performer_sequence(Motif::parse("EEE")) == "U1-U2-U3");
  CHECK(*example_performer_sequence(Motif::parse("AAE")) == "U1-U1-U1-U2");
  CHECK(*example_performer_sequence(Motif::parse("BBE")) == "U1-U2-U1-U2-U3");
  CHECK_FALSE(example_performer_sequence(Motif::parse("AF")).has_value());
  // A fixes the last two performers as equal, so B cannot follow.
  CHECK_FALSE(example_performer_sequence(Motif::parse("DAB")).has_value());
  for (const char* m : {"AA", "BBE", "EEE", "CE", "DE", "AEB", "CCD", "ECE", "DEB"}) {
    const auto ex = example_performer_sequence(Motif::parse(m));
    REQUIRE(ex.has_value());
    CHECK(label_tail(*ex, std::string(m).size()) == m);
  }
}

TEST_CASE("classify_motif_families tags rows with examples") {
  MotifStats a;
  a.motif = Motif::parse("AAA");
  a.z = 130.8;
  MotifStats e;
  e.motif = Motif::parse("EEE");
  e.z = 20.0;
  const std::vector<MotifStats> rows{a, e};
  const auto tagged = classify_motif_families(rows);
  REQUIRE(tagged.size() == 2);
  CHECK(tagged[0].family == MotifFamily::solo);
  CHECK(tagged[0].example == "U1-U1-U1-U1");
  CHECK(tagged[1].family == MotifFamily::inactive);
  CHECK(to_string(MotifFamily::distinctive) == "distinctive");
}
