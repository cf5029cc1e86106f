#include <algorithm>
#include <sstream>

#include <doctest.h>

#include "oracles/oracles.hpp"
#include "seqmotif/errors.hpp"
#include "seqmotif/motif_miner.hpp"

using namespace seqmotif;

TEST_CASE("small hand-checked windows") {
  const auto one = oracle::to_sequences({"E"});
  const auto c1 = count_motifs(one, 2);
  CHECK(c1.window_total == 0);
  CHECK(c1.counts.empty());

  const auto seqs = oracle::to_sequences({"EEDE"});
  const auto c = count_motifs(seqs, 3);
  CHECK(c.window_total == 2);
  REQUIRE(c.counts.size() == 2);
  CHECK(c.counts.at(Motif::parse("EED")) == 1);
  CHECK(c.counts.at(Motif::parse("EDE")) == 1);
  CHECK(c.label_total == 4);
  CHECK(c.sequence_count == 1);
}

TEST_CASE("windows never cross artifacts") {
  const auto seqs = oracle::to_sequences({"AB", "CD"});
  const auto c = count_motifs(seqs, 2);
  CHECK(c.window_total == 2);
  CHECK(c.counts.count(Motif::parse("BC")) == 0);
}

TEST_CASE("k range is validated") {
  const auto seqs = oracle::to_sequences({"AAAA"});
  CHECK_THROWS_AS(count_motifs(seqs, 1), ArgumentError);
  CHECK_THROWS_AS(count_motifs(seqs, 11), ArgumentError);
  CHECK_NOTHROW(count_motifs(seqs, 10));
}

TEST_CASE("motif parsing and printing") {
  CHECK(Motif::parse("AAE").to_string() == "AAE");
  CHECK(Motif::parse("A-A-E").to_string() == "AAE");
  CHECK(Motif::parse("AAE").size() == 3);
  CHECK_THROWS(Motif::parse("AZ"));
}

TEST_CASE("support filtering") {
  MotifCounts c;
  c.k = 2;
  c.window_total = 20;
  c.counts[Motif::parse("AA")] = 5;
  c.counts[Motif::parse("AB")] = 4;
  const auto f = filter_by_support(c, {5, SupportComparison::at_least});
  CHECK(f.counts.size() == 1);
  CHECK(f.counts.count(Motif::parse("AA")) == 1);
  CHECK(f.window_total == 20);
  CHECK(filter_by_support(c, {5, SupportComparison::more_than}).counts.empty());
  CHECK(filter_by_support(c, {100, SupportComparison::at_least}).counts.empty());
  CHECK(filter_by_support(c, {100, SupportComparison::at_least}).window_total == 20);

  CHECK(default_support(2).passes(200));
  CHECK_FALSE(default_support(2).passes(199));
  CHECK(default_support(2).passes(839));
  CHECK_FALSE(default_support(3).passes(100));
  CHECK(default_support(3).passes(101));
  CHECK_FALSE(default_support(4).passes(50));
  CHECK(default_support(4).passes(51));
  CHECK(default_support(5).passes(1));
}

TEST_CASE("ranking orders by count then motif") {
  const auto seqs = oracle::to_sequences({"AAAB", "BAAC"});
  const auto r = rank_by_count(count_motifs(seqs, 2));
  REQUIRE(r.size() == 4);
  CHECK(r[0].motif.to_string() == "AA");
  CHECK(r[0].count == 3);
  CHECK(r[0].fraction == doctest::Approx(0.5));
  CHECK(r[1].motif.to_string() == "AB");
  CHECK(r[2].motif.to_string() == "AC");
  CHECK(r[3].motif.to_string() == "BA");
}

TEST_CASE("property: counts match the brute-force window scanner") {
  oracle::Rng rng(1234);
  for (int trial = 0; trial < 150; ++trial) {
    const auto strings = oracle::random_label_strings(rng, 1 + rng() % 12, 30);
    const auto seqs = oracle::to_sequences(strings);
    for (std::size_t k = 2; k <= 6; ++k) {
      const auto got = count_motifs(seqs, k);
      const auto want = oracle::scan_windows(strings, k);
      CHECK(got.window_total == want.windows);
      std::uint64_t sum = 0;
      std::map<std::string, std::uint64_t> as_strings;
      for (const auto& [m, n] : got.counts) {
        sum += n;
        as_strings[m.to_string()] = n;
      }
      CHECK(sum == got.window_total);
      CHECK(as_strings == want.counts);
      std::uint64_t expected_total = 0;
      for (const auto& s : strings) expected_total += s.size() >= k ? s.size() - k + 1 : 0;
      CHECK(got.window_total == expected_total);
      if (k == 2) CHECK(got.counts.size() <= 36);
      if (k == 3) CHECK(got.counts.size() <= 216);
    }
    // Window totals across consecutive k.
    for (std::size_t k = 2; k < 6; ++k) {
      std::uint64_t long_enough = 0;
      for (const auto& s : strings) long_enough += s.size() >= k ? 1 : 0;
      CHECK(count_motifs(seqs, k + 1).window_total ==
            count_motifs(seqs, k).window_total - long_enough);
    }
  }
}

TEST_CASE("property: artifact order does not matter") {
  oracle::Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto seqs = oracle::to_sequences(oracle::random_label_strings(rng, 10, 20));
    const auto before = count_motifs(seqs, 3);
    std::shuffle(seqs.begin(), seqs.end(), rng);
    const auto after = count_motifs(seqs, 3);
    CHECK(before.counts == after.counts);
    CHECK(before.window_total == after.window_total);
  }
}

TEST_CASE("motifs json round trip") {
  oracle::Rng rng(3);
  const auto seqs = oracle::to_sequences(oracle::random_label_strings(rng, 8, 25));
  std::vector<MotifCounts> levels{count_motifs(seqs, 2), count_motifs(seqs, 3), count_motifs(seqs, 4)};
  std::stringstream buf;
  write_motifs_json(buf, levels);
  const auto back = read_motifs_json(buf);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].k == levels[i].k);
    CHECK(back[i].counts == levels[i].counts);
    CHECK(back[i].window_total == levels[i].window_total);
    CHECK(back[i].label_total == levels[i].label_total);
    CHECK(back[i].sequence_count == levels[i].sequence_count);
  }
}
