#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <doctest.h>
#include <json.hpp>

#include "seqmotif/errors.hpp"
#include "seqmotif/wiki_ingest.hpp"
#include "testdata_path.hpp"

using namespace seqmotif;
using namespace seqmotif::wiki;
namespace fs = std::filesystem;

namespace {

const Instant kCutoff = *parse_iso8601("2012-12-31T23:59:59Z");

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("seqmotif-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

FetchSpec spec_for(const fs::path& cache, std::vector<std::string> titles = {}) {
  FetchSpec s;
  s.titles = std::move(titles);
  s.cutoff = kCutoff;
  s.cache_dir = cache;
  s.rate_limit = 5.0;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fails a fixed number of times before answering.
class FlakyTransport final : public HttpTransport {
 public:
  FlakyTransport(int failures, int status) : failures_(failures), status_(status) {}
  HttpResponse get(const ApiQuery&) override {
    ++calls;
    if (failures_-- > 0) {
      if (status_ == 0) throw FetchError("connection reset");
      return {status_, "busy"};
    }
    return {200, R"({"batchcomplete":true,"query":{"pages":[{"pageid":1,"ns":0,"title":"T","revisions":[{"revid":1,"user":"A","timestamp":"2010-01-01T00:00:00Z","size":10}]}]}})"};
  }
  int calls = 0;

 private:
  int failures_;
  int status_;
};

}  // namespace

TEST_CASE("pagination stitches pages in order and skips hidden revisions") {
  TempDir tmp;
  FixtureTransport transport(testdata_path("api/fixtures.json"));
  FakeClock clock;
  WikiClient client(spec_for(tmp.path), transport, clock);
  const auto art = client.fetch_revisions("Paged Article");
  CHECK(client.requests_made() == 3);
  REQUIRE(art.revisions.size() == 6);
  CHECK(art.skipped == 2);
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < art.revisions.size(); ++i) {
    ids.insert(art.revisions[i].revision_id);
    if (i > 0) CHECK(art.revisions[i - 1].timestamp < art.revisions[i].timestamp);
    CHECK(art.revisions[i].timestamp <= kCutoff);
  }
  CHECK(ids.size() == art.revisions.size());
  CHECK(art.revisions[2].anonymous);
  CHECK(art.revisions[2].performer_id == "192.0.2.10");
  CHECK_FALSE(art.revisions[0].anonymous);
}

TEST_CASE("cache hit makes no requests and matches the original") {
  TempDir tmp;
  FakeClock clock;
  ArticleRevisions first;
  {
    FixtureTransport transport(testdata_path("api/fixtures.json"));
    WikiClient client(spec_for(tmp.path), transport, clock);
    first = client.fetch_revisions("Paged Article");
    CHECK_FALSE(first.from_cache);
  }
  OfflineTransport offline;
  WikiClient again(spec_for(tmp.path), offline, clock);
  const auto second = again.fetch_revisions("Paged Article");
  CHECK(second.from_cache);
  CHECK(second == first);
  CHECK(again.requests_made() == 0);
  RevisionCache cache(tmp.path);
  CHECK(*cache.load("Paged Article", kCutoff) == first);
  CHECK_FALSE(cache.load("Paged Article", kCutoff + std::chrono::seconds{1}).has_value());
  CHECK(fs::exists(cache.revisions_path("Paged Article")));
  CHECK(cache.revisions_path("Paged Article").filename() == "Paged%20Article.jsonl");
}

TEST_CASE("missing article raises not-found and is remembered") {
  TempDir tmp;
  FakeClock clock;
  FixtureTransport transport(testdata_path("api/fixtures.json"));
  WikiClient client(spec_for(tmp.path), transport, clock);
  CHECK_THROWS_AS(client.fetch_revisions("Gone_Article"), NotFoundError);
  OfflineTransport offline;
  WikiClient again(spec_for(tmp.path), offline, clock);
  CHECK_THROWS_AS(again.fetch_revisions("Gone_Article"), NotFoundError);
}

TEST_CASE("fetch_all collects failures and keeps going") {
  TempDir tmp;
  FakeClock clock;
  FixtureTransport transport(testdata_path("api/fixtures.json"));
  auto spec = spec_for(tmp.path, read_titles(testdata_path("api/titles.txt")));
  CHECK(spec.titles == std::vector<std::string>{"Paged Article", "Short_Article", "Gone_Article"});
  WikiClient client(spec, transport, clock);
  const auto out = client.fetch_all();
  REQUIRE(out.articles.size() == 2);
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].title == "Gone_Article");
  CHECK(out.failures[0].not_found);
  CHECK(out.articles[0].title == "Paged Article");
}

TEST_CASE("first edits: registered, empty history, IP") {
  TempDir tmp;
  FakeClock clock;
  FixtureTransport transport(testdata_path("api/fixtures.json"));
  WikiClient client(spec_for(tmp.path), transport, clock);
  CHECK(*client.fetch_first_edit("Alice") == *parse_iso8601("2005-04-01T10:00:00Z"));
  CHECK_FALSE(client.fetch_first_edit("Bob").has_value());
  const auto before = client.requests_made();
  CHECK_FALSE(client.fetch_first_edit("192.0.2.10").has_value());
  CHECK_FALSE(client.fetch_first_edit("2001:db8::1").has_value());
  CHECK(client.requests_made() == before);
  // Cached, including the unknown answer, across client instances.
  OfflineTransport offline;
  WikiClient again(spec_for(tmp.path), offline, clock);
  CHECK(*again.fetch_first_edit("Alice") == *parse_iso8601("2005-04-01T10:00:00Z"));
  CHECK_FALSE(again.fetch_first_edit("Bob").has_value());
  CHECK(again.requests_made() == 0);
}

TEST_CASE("ip detection") {
  CHECK(is_ip_address("192.0.2.10"));
  CHECK(is_ip_address("2001:db8::1"));
  CHECK_FALSE(is_ip_address("Alice"));
  CHECK_FALSE(is_ip_address("1.2.3"));
  CHECK_FALSE(is_ip_address("256.1.1.1"));
  CHECK_FALSE(is_ip_address("Dead:Beef"));
}

TEST_CASE("export derives deltas and is deterministic") {
  ArticleRevisions a;
  a.title = "B";
  for (auto [id, size] : {std::pair{1, 100}, {2, 250}, {3, 200}}) {
    RevisionMeta r;
    r.title = "B";
    r.revision_id = id;
    r.performer_id = "U" + std::to_string(id);
    r.timestamp = Instant{1000 * id};
    r.size_bytes = size;
    a.revisions.push_back(r);
  }
  ArticleRevisions b = a;
  b.title = "A";
  b.revisions.resize(2);
  const std::vector<ArticleRevisions> arts{a, b};
  const auto log = export_event_log(arts);
  REQUIRE(log.size() == 5);
  CHECK(log.events()[0].artifact_id == "A");
  CHECK(*log.events()[2].size_delta == 100);
  CHECK(*log.events()[3].size_delta == 150);
  CHECK(*log.events()[4].size_delta == -50);
  std::ostringstream x, y;
  write_event_log(x, log, LogFormat::csv);
  write_event_log(y, export_event_log(arts), LogFormat::csv);
  CHECK(x.str() == y.str());
}

TEST_CASE("fixture fetch reproduces the recorded export byte for byte") {
  TempDir tmp;
  FakeClock clock;
  FixtureTransport transport(testdata_path("api/fixtures.json"));
  WikiClient client(spec_for(tmp.path, read_titles(testdata_path("api/titles.txt"))), transport, clock);
  const auto out = client.fetch_all();
  std::ostringstream events;
  write_event_log(events, export_event_log(out.articles), LogFormat::csv);
  CHECK(events.str() == slurp(testdata_path("api/expected_events.csv")));
  std::ostringstream firsts;
  write_first_edits_csv(firsts, client.fetch_first_edits(out.articles));
  CHECK(firsts.str() == slurp(testdata_path("api/expected_first_edits.csv")));
}

TEST_CASE("interrupted fetch resumes from the stored continuation") {
  TempDir tmp;
  FakeClock clock;
  // Only the first page is available the first time round.
  {
    std::ifstream in(testdata_path("api/fixtures.json"));
    auto doc = nlohmann::json::parse(in);
    nlohmann::json first_page = nlohmann::json::array({doc[0]});
    std::ofstream(tmp.path / "partial.json") << first_page.dump();
  }
  {
    FixtureTransport partial(tmp.path / "partial.json");
    auto spec = spec_for(tmp.path / "cache");
    spec.max_retries = 0;
    WikiClient client(spec, partial, clock);
    CHECK_THROWS_AS(client.fetch_revisions("Paged Article"), FetchError);
    const auto m = client.cache().manifest("Paged Article");
    REQUIRE(m.has_value());
    CHECK_FALSE(m->complete);
    CHECK(m->continuation.count("rvcontinue") == 1);
  }
  FixtureTransport full(testdata_path("api/fixtures.json"));
  WikiClient resumed(spec_for(tmp.path / "cache"), full, clock);
  const auto art = resumed.fetch_revisions("Paged Article");
  CHECK(resumed.requests_made() == 2);
  CHECK(art.revisions.size() == 6);
  CHECK(art.skipped == 2);
}

TEST_CASE("torn trailing line in the cache is ignored") {
  TempDir tmp;
  RevisionCache cache(tmp.path);
  RevisionMeta r{"T", 1, "A", Instant{10}, 5, false};
  cache.append_revisions("T", std::vector<RevisionMeta>{r});
  std::ofstream(cache.revisions_path("T"), std::ios::app) << "{\"revision_id\":2,\"perf";
  CHECK(cache.load_revisions("T") == std::vector<RevisionMeta>{r});
}

TEST_CASE("retries with backoff, then gives up") {
  TempDir tmp;
  FakeClock clock;
  FlakyTransport flaky(2, 503);
  auto spec = spec_for(tmp.path);
  spec.max_retries = 3;
  WikiClient client(spec, flaky, clock);
  CHECK(client.fetch_revisions("T").revisions.size() == 1);
  CHECK(flaky.calls == 3);
  CHECK(clock.monotonic_seconds() >= 1.0 + 2.0);

  TempDir tmp2;
  FlakyTransport down(10, 0);
  auto spec2 = spec_for(tmp2.path);
  spec2.max_retries = 2;
  WikiClient failing(spec2, down, clock);
  CHECK_THROWS_AS(failing.fetch_revisions("T"), FetchError);
  CHECK(down.calls == 3);

  TempDir tmp3;
  FlakyTransport forbidden(10, 403);
  WikiClient no_retry(spec_for(tmp3.path), forbidden, clock);
  CHECK_THROWS_AS(no_retry.fetch_revisions("T"), FetchError);
  CHECK(forbidden.calls == 1);
}

TEST_CASE("fetch spec validation") {
  TempDir tmp;
  FakeClock clock;  // wall time 2023-11-14
  OfflineTransport offline;
  auto future = spec_for(tmp.path);
  future.cutoff = *parse_iso8601("2030-01-01T00:00:00Z");
  CHECK_THROWS_AS(WikiClient(future, offline, clock), ArgumentError);
  auto zero_rate = spec_for(tmp.path);
  zero_rate.rate_limit = 0.0;
  CHECK_THROWS_AS(WikiClient(zero_rate, offline, clock), ArgumentError);
}

TEST_CASE("rate limiter honors its bound under a fake clock") {
  FakeClock clock;
  RateLimiter limiter(4.0, clock);
  std::vector<double> times;
  for (int i = 0; i < 20; ++i) {
    limiter.acquire();
    times.push_back(clock.monotonic_seconds());
  }
  for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] - times[i - 1] >= 0.25 - 1e-12);
  // 20 requests at 4/s need at least 19 intervals.
  CHECK(times.back() - times.front() >= 19 * 0.25 - 1e-9);
}

TEST_CASE("rate limiter is shared safely across threads") {
  FakeClock clock;
  RateLimiter limiter(10.0, clock);
  std::mutex mu;
  std::vector<double> times;
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      for (int i = 0; i < 25; ++i) {
        limiter.acquire();
        std::lock_guard lock(mu);
        times.push_back(clock.monotonic_seconds());
      }
    });
  }
  for (auto& t : pool) t.join();
  REQUIRE(times.size() == 100);
  // Threads may observe the clock after someone else advanced it, so check
  // the aggregate rate: 100 grants at 10/s span at least 9.9 s.
  CHECK(clock.monotonic_seconds() >= 9.9 - 1e-9);
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(times[i] >= 0.1 * static_cast<double>(i) - 1e-9);
}

TEST_CASE("recording transport saves fixtures the fixture transport can replay") {
  TempDir tmp;
  FakeClock clock;
  FixtureTransport source(testdata_path("api/fixtures.json"));
  RecordingTransport recorder(source);
  {
    WikiClient client(spec_for(tmp.path / "a"), recorder, clock);
    client.fetch_revisions("Short_Article");
    client.fetch_first_edit("Carol");
  }
  recorder.save(tmp.path / "recorded.json");
  FixtureTransport replay(tmp.path / "recorded.json");
  WikiClient client(spec_for(tmp.path / "b"), replay, clock);
  CHECK(client.fetch_revisions("Short_Article").revisions.size() == 2);
  CHECK(client.fetch_first_edit("Carol").has_value());
  CHECK(replay.calls() == 2);
}
