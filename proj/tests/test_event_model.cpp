#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <doctest.h>

#include "seqmotif/errors.hpp"
#include "seqmotif/event_model.hpp"
#include "testdata_path.hpp"

using namespace seqmotif;

namespace {

ParseResult parse_csv(const std::string& text, bool strict = false) {
  std::istringstream in(text);
  ParseOptions opts;
  opts.strict = strict;
  return parse_event_log(in, LogFormat::csv, opts);
}

}  // namespace

TEST_CASE("six-row example log parses in both formats") {
  for (const char* name : {"table1.csv", "table1.jsonl"}) {
    const auto r = read_event_log(testdata_path(name));
    CHECK(r.skipped.empty());
    CHECK(r.log.size() == 6);
    CHECK(r.log.artifact_ids() == std::vector<std::string>{"X"});
    CHECK(r.log.performer_count() == 4);
    CHECK(r.log.events()[0].activity == "RT");
    CHECK(r.log.events()[5].activity == "DV");
    CHECK(is_normalized(r.log));
  }
  CHECK(read_event_log(testdata_path("table1.csv")).log ==
        read_event_log(testdata_path("table1.jsonl")).log);
}

TEST_CASE("header only gives an empty log") {
  const auto r = parse_csv("artifact_id,performer_id,activity,timestamp,size_delta\n");
  CHECK(r.log.empty());
  CHECK(r.skipped.empty());
}

TEST_CASE("bad timestamp is skipped and reported") {
  const std::string text =
      "artifact_id,performer_id,activity,timestamp,size_delta\n"
      "X,U1,edit,2012-01-01T00:00:00Z,5\n"
      "X,U2,edit,not-a-date,3\n"
      "X,U3,edit,2012-01-02T00:00:00Z,\n";
  const auto r = parse_csv(text);
  CHECK(r.log.size() == 2);
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0].line == 3);
  CHECK_FALSE(r.log.events()[1].size_delta.has_value());
  CHECK_THROWS_AS(parse_csv(text, true), ParseError);
}

TEST_CASE("other malformed rows are collected") {
  const std::string text =
      "artifact_id,performer_id,activity,timestamp,size_delta\n"
      "X,U1,edit,2012-01-01T00:00:00Z,5\n"
      "X,U1,edit\n"
      ",U1,edit,2012-01-01T00:00:00Z,5\n"
      "X,U1,edit,2012-01-01T00:00:00Z,1.5\n"
      "X,\xff\xfe,edit,2012-01-01T00:00:00Z,5\n";
  const auto r = parse_csv(text);
  CHECK(r.log.size() == 1);
  CHECK(r.skipped.size() == 4);
}

TEST_CASE("missing required column is a schema error naming it") {
  try {
    parse_csv("artifact_id,activity,timestamp\nX,edit,2012-01-01T00:00:00Z\n");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.column() == "performer_id");
  }
}

TEST_CASE("optional columns may be absent and order is free") {
  const auto r = parse_csv("timestamp,performer_id,artifact_id\n2012-01-01T00:00:00+01:00,U1,X\n");
  REQUIRE(r.log.size() == 1);
  CHECK(r.log.events()[0].timestamp.epoch_seconds == 1325372400);
  CHECK(r.log.events()[0].activity.empty());
}

TEST_CASE("jsonl rows with missing keys or wrong types are skipped") {
  std::istringstream in(
      "{\"artifact_id\":\"X\",\"performer_id\":\"U1\",\"timestamp\":\"2012-01-01T00:00:00Z\",\"size_delta\":-4}\n"
      "{\"artifact_id\":\"X\",\"timestamp\":\"2012-01-01T00:00:00Z\"}\n"
      "[1,2]\n"
      "{broken\n"
      "{\"artifact_id\":\"X\",\"performer_id\":\"U1\",\"timestamp\":\"2012-01-01T00:00:00Z\",\"size_delta\":\"4\"}\n");
  const auto r = parse_event_log(in, LogFormat::jsonl);
  REQUIRE(r.log.size() == 1);
  CHECK(*r.log.events()[0].size_delta == -4);
  CHECK(r.skipped.size() == 4);
}

TEST_CASE("unreadable file is an io error") {
  CHECK_THROWS_AS(read_event_log("/nonexistent/events.csv"), IoError);
  CHECK_THROWS_AS(read_event_log("/nonexistent/events.txt"), ArgumentError);
}

TEST_CASE("normalize restores order from a shuffled log") {
  const auto original = read_event_log(testdata_path("table1.csv")).log;
  auto events = original.events();
  std::mt19937_64 rng(7);
  std::shuffle(events.begin(), events.end(), rng);
  const auto restored = normalize(EventLog(events));
  CHECK(restored == original);
  CHECK(normalize(original) == original);
}

TEST_CASE("normalize drops duplicates and breaks ties by performer") {
  EventRecord a{"X", "U2", "edit", Instant{100}, 1};
  EventRecord b{"X", "U1", "edit", Instant{100}, 2};
  EventRecord dup{"X", "U2", "revert", Instant{100}, 9};
  EventRecord other{"W", "U9", "edit", Instant{500}, std::nullopt};
  const auto n = normalize(EventLog({a, b, dup, other}));
  REQUIRE(n.size() == 3);
  CHECK(n.events()[0].artifact_id == "W");
  CHECK(n.events()[1].performer_id == "U1");
  CHECK(n.events()[2].performer_id == "U2");
  // The first occurrence survives.
  CHECK(*n.events()[2].size_delta == 1);
}

TEST_CASE("property: normalize is idempotent, never grows, and round trips") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> art(0, 3), perf(0, 5), ts(0, 40), sz(-50, 50), coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EventRecord> events;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      EventRecord e;
      e.artifact_id = "art \"" + std::to_string(art(rng)) + "\", x";
      e.performer_id = "P" + std::to_string(perf(rng));
      e.activity = coin(rng) ? "edit" : "";
      e.timestamp = Instant{1300000000 + ts(rng) * 60};
      if (coin(rng)) e.size_delta = sz(rng);
      events.push_back(e);
    }
    const EventLog log(events);
    const auto once = normalize(log);
    CHECK(normalize(once) == once);
    CHECK(once.size() <= log.size());
    CHECK(is_normalized(once));
    std::set<std::tuple<std::string, std::string, std::int64_t>> keys;
    for (const auto& e : events) keys.insert({e.artifact_id, e.performer_id, e.timestamp.epoch_seconds});
    CHECK(once.size() == keys.size());

    for (auto fmt : {LogFormat::csv, LogFormat::jsonl}) {
      std::ostringstream out;
      write_event_log(out, once, fmt);
      std::istringstream in(out.str());
      const auto back = parse_event_log(in, fmt);
      CHECK(back.skipped.empty());
      CHECK(back.log == once);
    }
  }
}
