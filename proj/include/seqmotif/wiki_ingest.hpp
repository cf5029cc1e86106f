#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqmotif/event_model.hpp"
#include "seqmotif/schematizer.hpp"
#include "seqmotif/time.hpp"

namespace seqmotif::wiki {

// Time source for rate limiting, retries and "is the cutoff in the past".
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double monotonic_seconds() = 0;
  virtual void sleep_until(double monotonic) = 0;
  virtual Instant wall_now() = 0;
};

class SystemClock final : public Clock {
 public:
  double monotonic_seconds() override;
  void sleep_until(double monotonic) override;
  Instant wall_now() override;
};

// Time only moves when someone sleeps past it or calls advance().
class FakeClock final : public Clock {
 public:
  explicit FakeClock(Instant wall_epoch = Instant{1700000000}) : wall_epoch_(wall_epoch) {}
  double monotonic_seconds() override;
  void sleep_until(double monotonic) override;
  Instant wall_now() override;
  void advance(double seconds);

 private:
  std::mutex mu_;
  double now_ = 0.0;
  Instant wall_epoch_;
};

// Spaces requests at least 1/rate seconds apart, shared across threads.
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, Clock& clock);
  void acquire();
  double rate() const { return rate_; }

 private:
  double rate_;
  double interval_;
  Clock& clock_;
  std::mutex mu_;
  double next_slot_ = -1.0;
};

// Query parameters, kept sorted so the canonical form is stable.
using ApiQuery = std::map<std::string, std::string>;

std::string url_encode(const std::string& s);
std::string canonical_query(const ApiQuery& query);

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws FetchError on transport failures (connection refused, timeouts).
  virtual HttpResponse get(const ApiQuery& query) = 0;
};

// Live MediaWiki endpoint over cpp-httplib (https needs OpenSSL).
std::unique_ptr<HttpTransport> make_http_transport(const std::string& api_endpoint,
                                                   const std::string& user_agent);

// Serves recorded responses from a JSON file:
// [{"query": {...}, "status": 200, "body": {...} or "..."}]
class FixtureTransport final : public HttpTransport {
 public:
  explicit FixtureTransport(const std::filesystem::path& fixture_file);
  HttpResponse get(const ApiQuery& query) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, HttpResponse> responses_;
  std::atomic<std::size_t> calls_{0};
};

// Refuses every request; proves a run was served from cache.
class OfflineTransport final : public HttpTransport {
 public:
  HttpResponse get(const ApiQuery& query) override;
};

// Forwards to another transport and keeps every exchange so it can be saved
// in the FixtureTransport format.
class RecordingTransport final : public HttpTransport {
 public:
  explicit RecordingTransport(HttpTransport& inner) : inner_(inner) {}
  HttpResponse get(const ApiQuery& query) override;
  void save(const std::filesystem::path& fixture_file) const;

 private:
  HttpTransport& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::pair<ApiQuery, HttpResponse>> log_;
};

struct FetchSpec {
  std::vector<std::string> titles;
  Instant cutoff;  // inclusive upper bound on revision timestamps
  std::string api_endpoint = "https://en.wikipedia.org/w/api.php";
  double rate_limit = 1.0;  // requests per second
  std::filesystem::path cache_dir = "cache";
  std::size_t concurrency = 2;
  int max_retries = 3;
  std::size_t page_limit = 500;  // rvlimit

  void validate(Instant now) const;
};

struct RevisionMeta {
  std::string title;
  std::int64_t revision_id = 0;
  std::string performer_id;
  Instant timestamp;
  std::int64_t size_bytes = 0;  // page size after the revision
  bool anonymous = false;

  bool operator==(const RevisionMeta&) const = default;
};

struct ArticleRevisions {
  std::string title;
  std::vector<RevisionMeta> revisions;  // ascending (timestamp, revision_id)
  std::size_t skipped = 0;              // hidden or incomplete revisions
  bool from_cache = false;

  bool operator==(const ArticleRevisions& o) const {
    return title == o.title && revisions == o.revisions && skipped == o.skipped;
  }
};

// Append-only per-article revision files plus a manifest per article.
class RevisionCache {
 public:
  explicit RevisionCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  struct Manifest {
    std::string title;
    Instant cutoff;
    std::string fetched_at;
    bool complete = false;
    bool missing = false;
    std::size_t skipped = 0;
    std::size_t revision_count = 0;
    ApiQuery continuation;  // where an interrupted fetch resumes
  };

  std::optional<Manifest> manifest(const std::string& title) const;
  void write_manifest(const Manifest& m) const;
  std::vector<RevisionMeta> load_revisions(const std::string& title) const;
  void append_revisions(const std::string& title, std::span<const RevisionMeta> revs) const;
  void reset_article(const std::string& title) const;

  // Complete, matching-cutoff entry, if any.
  std::optional<ArticleRevisions> load(const std::string& title, Instant cutoff) const;

  // nullopt: never asked; optional(nullopt): asked, unknown.
  std::optional<std::optional<Instant>> first_edit(const std::string& performer) const;
  void store_first_edit(const std::string& performer, std::optional<Instant> first);

  std::filesystem::path revisions_path(const std::string& title) const;
  std::filesystem::path manifest_path(const std::string& title) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex first_edit_mu_;
  std::map<std::string, std::optional<Instant>> first_edits_;
};

// Percent-encodes a title into a portable file name.
std::string cache_file_stem(const std::string& title);

// Registered accounts can have a platform-wide first edit; IPv4 and IPv6
// addresses cannot.
bool is_ip_address(const std::string& performer);

struct FetchFailure {
  std::string title;
  std::string message;
  bool not_found = false;
};

struct FetchOutcome {
  std::vector<ArticleRevisions> articles;  // in the order of spec.titles
  std::vector<FetchFailure> failures;
};

class WikiClient {
 public:
  WikiClient(FetchSpec spec, HttpTransport& transport, Clock& clock);

  // Full, paginated history up to the cutoff. Served from cache when the
  // cache holds a complete fetch for the same cutoff.
  ArticleRevisions fetch_revisions(const std::string& title);

  // Earliest contribution timestamp; nullopt for IPs and empty histories.
  std::optional<Instant> fetch_first_edit(const std::string& performer);

  // Every title in the spec; failures are collected, not thrown.
  FetchOutcome fetch_all();

  FirstEditIndex fetch_first_edits(std::span<const ArticleRevisions> articles);

  std::size_t requests_made() const { return requests_.load(); }
  RevisionCache& cache() { return cache_; }

 private:
  HttpResponse request(const ApiQuery& query);

  FetchSpec spec_;
  HttpTransport& transport_;
  Clock& clock_;
  RateLimiter limiter_;
  RevisionCache cache_;
  std::atomic<std::size_t> requests_{0};
};

// One event per revision; size_delta is the change from the previous
// revision's page size (the first revision's delta is its size). Articles
// are emitted sorted by title.
EventLog export_event_log(std::span<const ArticleRevisions> articles);

std::vector<std::string> read_titles(const std::filesystem::path& path);

}  // namespace seqmotif::wiki
