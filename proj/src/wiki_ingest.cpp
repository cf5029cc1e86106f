#include "seqmotif/wiki_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "seqmotif/errors.hpp"

namespace seqmotif::wiki {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json revision_to_json(const RevisionMeta& r) {
  json j;
  j["revid"] = r.revision_id;
  j["user"] = r.performer_id;
  j["timestamp"] = format_iso8601(r.timestamp);
  j["size"] = r.size_bytes;
  j["anon"] = r.anonymous;
  return j;
}

RevisionMeta revision_from_json(const std::string& title, const json& j) {
  RevisionMeta r;
  r.title = title;
  r.revision_id = j.at("revid").get<std::int64_t>();
  r.performer_id = j.at("user").get<std::string>();
  const auto ts = parse_iso8601(j.at("timestamp").get<std::string>());
  if (!ts) throw ParseError(0, "bad revision timestamp in cache for '" + title + "'");
  r.timestamp = *ts;
  r.size_bytes = j.at("size").get<std::int64_t>();
  r.anonymous = j.value("anon", false);
  return r;
}

void sort_and_dedupe(std::vector<RevisionMeta>& revs) {
  std::sort(revs.begin(), revs.end(), [](const RevisionMeta& a, const RevisionMeta& b) {
    return std::tie(a.timestamp, a.revision_id) < std::tie(b.timestamp, b.revision_id);
  });
  std::set<std::int64_t> seen;
  std::erase_if(revs, [&](const RevisionMeta& r) { return !seen.insert(r.revision_id).second; });
}

}  // namespace

// ---- clocks and rate limiting ----

double SystemClock::monotonic_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_until(double monotonic) {
  const double wait = monotonic - monotonic_seconds();
  if (wait > 0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
}

Instant SystemClock::wall_now() {
  using namespace std::chrono;
  return Instant{duration_cast<seconds>(system_clock::now().time_since_epoch()).count()};
}

double FakeClock::monotonic_seconds() {
  std::lock_guard lock(mu_);
  return now_;
}

void FakeClock::sleep_until(double monotonic) {
  std::lock_guard lock(mu_);
  now_ = std::max(now_, monotonic);
}

Instant FakeClock::wall_now() {
  std::lock_guard lock(mu_);
  return wall_epoch_ + std::chrono::seconds{static_cast<std::int64_t>(std::floor(now_))};
}

void FakeClock::advance(double seconds) {
  std::lock_guard lock(mu_);
  now_ += seconds;
}

RateLimiter::RateLimiter(double requests_per_second, Clock& clock)
    : rate_(requests_per_second), interval_(0.0), clock_(clock) {
  if (!(requests_per_second > 0.0)) throw ArgumentError("rate limit must be positive");
  interval_ = 1.0 / requests_per_second;
}

void RateLimiter::acquire() {
  double slot;
  {
    std::lock_guard lock(mu_);
    const double now = clock_.monotonic_seconds();
    slot = next_slot_ < 0 ? now : std::max(now, next_slot_);
    next_slot_ = slot + interval_;
  }
  clock_.sleep_until(slot);
}

// ---- transports ----

std::string url_encode(const std::string& s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::string canonical_query(const ApiQuery& query) {
  std::string out;
  for (const auto& [k, v] : query) {
    if (!out.empty()) out.push_back('&');
    out += url_encode(k) + "=" + url_encode(v);
  }
  return out;
}

FixtureTransport::FixtureTransport(const fs::path& fixture_file) {
  std::ifstream in(fixture_file);
  if (!in) throw IoError("cannot open fixture file '" + fixture_file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, "fixture file '" + fixture_file.string() + "': " + e.what());
  }
  for (const auto& entry : doc) {
    ApiQuery q;
    for (const auto& [k, v] : entry.at("query").items()) q[k] = v.get<std::string>();
    HttpResponse r;
    r.status = entry.value("status", 200);
    const auto& body = entry.at("body");
    r.body = body.is_string() ? body.get<std::string>() : body.dump();
    responses_[canonical_query(q)] = std::move(r);
  }
}

HttpResponse FixtureTransport::get(const ApiQuery& query) {
  ++calls_;
  const auto it = responses_.find(canonical_query(query));
  if (it == responses_.end()) {
    throw FetchError("no recorded response for " + canonical_query(query));
  }
  return it->second;
}

HttpResponse OfflineTransport::get(const ApiQuery& query) {
  throw FetchError("offline: refusing request " + canonical_query(query));
}

HttpResponse RecordingTransport::get(const ApiQuery& query) {
  HttpResponse r = inner_.get(query);
  std::lock_guard lock(mu_);
  log_[canonical_query(query)] = {query, r};
  return r;
}

void RecordingTransport::save(const fs::path& fixture_file) const {
  json doc = json::array();
  std::lock_guard lock(mu_);
  for (const auto& [key, exchange] : log_) {
    json entry;
    entry["query"] = exchange.first;
    entry["status"] = exchange.second.status;
    const auto parsed = json::parse(exchange.second.body, nullptr, false);
    entry["body"] = parsed.is_discarded() ? json(exchange.second.body) : parsed;
    doc.push_back(std::move(entry));
  }
  std::ofstream out(fixture_file);
  if (!out) throw IoError("cannot write fixture file '" + fixture_file.string() + "'");
  out << doc.dump(2) << '\n';
}

// ---- fetch spec ----

void FetchSpec::validate(Instant now) const {
  if (cutoff > now) {
    throw ArgumentError("cutoff " + format_iso8601(cutoff) + " lies in the future");
  }
  if (!(rate_limit > 0.0)) throw ArgumentError("rate limit must be positive");
  if (concurrency == 0) throw ArgumentError("concurrency must be at least 1");
  if (max_retries < 0) throw ArgumentError("max_retries must be non-negative");
  if (page_limit == 0) throw ArgumentError("page limit must be positive");
}

// ---- cache ----

std::string cache_file_stem(const std::string& title) {
  std::string out;
  for (unsigned char c : title) {
    if (std::isalnum(c) || c == '-' || c == '_') {
      out.push_back(static_cast<char>(c));
    } else {
      static constexpr char kHex[] = "0123456789ABCDEF";
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

RevisionCache::RevisionCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "revisions", ec);
  if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
  std::ifstream in(dir_ / "first_edits.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("performer_id")) continue;
    std::optional<Instant> first;
    if (j.contains("first_edit") && j["first_edit"].is_string()) {
      first = parse_iso8601(j["first_edit"].get<std::string>());
    }
    first_edits_[j["performer_id"].get<std::string>()] = first;
  }
}

fs::path RevisionCache::revisions_path(const std::string& title) const {
  return dir_ / "revisions" / (cache_file_stem(title) + ".jsonl");
}

fs::path RevisionCache::manifest_path(const std::string& title) const {
  return dir_ / "revisions" / (cache_file_stem(title) + ".manifest.json");
}

std::optional<RevisionCache::Manifest> RevisionCache::manifest(const std::string& title) const {
  std::ifstream in(manifest_path(title));
  if (!in) return std::nullopt;
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  Manifest m;
  m.title = j.value("title", title);
  const auto cutoff = parse_iso8601(j.value("cutoff", std::string{}));
  if (!cutoff) return std::nullopt;
  m.cutoff = *cutoff;
  m.fetched_at = j.value("fetched_at", std::string{});
  m.complete = j.value("complete", false);
  m.missing = j.value("missing", false);
  m.skipped = j.value("skipped", std::size_t{0});
  m.revision_count = j.value("revision_count", std::size_t{0});
  if (j.contains("continue")) {
    for (const auto& [k, v] : j["continue"].items()) m.continuation[k] = v.get<std::string>();
  }
  return m;
}

void RevisionCache::write_manifest(const Manifest& m) const {
  json j;
  j["title"] = m.title;
  j["cutoff"] = format_iso8601(m.cutoff);
  j["fetched_at"] = m.fetched_at;
  j["complete"] = m.complete;
  j["missing"] = m.missing;
  j["skipped"] = m.skipped;
  j["revision_count"] = m.revision_count;
  j["continue"] = m.continuation;
  const fs::path path = manifest_path(m.title);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

std::vector<RevisionMeta> RevisionCache::load_revisions(const std::string& title) const {
  std::vector<RevisionMeta> out;
  std::ifstream in(revisions_path(title));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(revision_from_json(title, json::parse(line)));
    } catch (const json::exception&) {
      // A torn final line from an interrupted append; the manifest's
      // continuation token re-fetches that page.
    }
  }
  return out;
}

void RevisionCache::append_revisions(const std::string& title,
                                     std::span<const RevisionMeta> revs) const {
  std::ofstream out(revisions_path(title), std::ios::app);
  if (!out) throw IoError("cannot append to cache for '" + title + "'");
  for (const auto& r : revs) out << revision_to_json(r).dump() << '\n';
}

void RevisionCache::reset_article(const std::string& title) const {
  std::error_code ec;
  fs::remove(revisions_path(title), ec);
  fs::remove(manifest_path(title), ec);
}

std::optional<ArticleRevisions> RevisionCache::load(const std::string& title,
                                                    Instant cutoff) const {
  const auto m = manifest(title);
  if (!m || !m->complete || m->cutoff != cutoff) return std::nullopt;
  if (m->missing) throw NotFoundError("article '" + title + "' does not exist (cached)");
  ArticleRevisions a;
  a.title = title;
  a.revisions = load_revisions(title);
  sort_and_dedupe(a.revisions);
  a.skipped = m->skipped;
  a.from_cache = true;
  return a;
}

std::optional<std::optional<Instant>> RevisionCache::first_edit(
    const std::string& performer) const {
  std::lock_guard lock(first_edit_mu_);
  const auto it = first_edits_.find(performer);
  if (it == first_edits_.end()) return std::nullopt;
  return it->second;
}

void RevisionCache::store_first_edit(const std::string& performer,
                                     std::optional<Instant> first) {
  std::lock_guard lock(first_edit_mu_);
  first_edits_[performer] = first;
  json j;
  j["performer_id"] = performer;
  j["first_edit"] = first ? json(format_iso8601(*first)) : json(nullptr);
  std::ofstream out(dir_ / "first_edits.jsonl", std::ios::app);
  if (!out) throw IoError("cannot append to first-edit cache");
  out << j.dump() << '\n';
}

// ---- client ----

bool is_ip_address(const std::string& s) {
  // IPv4 dotted quad.
  int parts = 0;
  std::size_t i = 0;
  bool v4 = !s.empty();
  while (v4 && i <= s.size()) {
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i || j - i > 3 || std::stoi(s.substr(i, j - i)) > 255) {
      v4 = false;
      break;
    }
    ++parts;
    if (j == s.size()) break;
    if (s[j] != '.') {
      v4 = false;
      break;
    }
    i = j + 1;
  }
  if (v4 && parts == 4) return true;
  // IPv6: hex groups and colons, at least two colons.
  if (std::count(s.begin(), s.end(), ':') < 2) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.';
  });
}

WikiClient::WikiClient(FetchSpec spec, HttpTransport& transport, Clock& clock)
    : spec_(std::move(spec)),
      transport_(transport),
      clock_(clock),
      limiter_(spec_.rate_limit, clock),
      cache_(spec_.cache_dir) {
  spec_.validate(clock_.wall_now());
}

HttpResponse WikiClient::request(const ApiQuery& query) {
  std::string last_error;
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    if (attempt > 0) {
      clock_.sleep_until(clock_.monotonic_seconds() + std::ldexp(1.0, attempt - 1));
    }
    limiter_.acquire();
    ++requests_;
    try {
      HttpResponse r = transport_.get(query);
      if (r.status == 200) return r;
      last_error = "HTTP " + std::to_string(r.status);
      if (r.status >= 400 && r.status < 500 && r.status != 429) break;
    } catch (const FetchError& e) {
      last_error = e.what();
    }
  }
  throw FetchError("request failed after retries (" + last_error + "): " +
                   canonical_query(query));
}

ArticleRevisions WikiClient::fetch_revisions(const std::string& title) {
  if (auto cached = cache_.load(title, spec_.cutoff)) return *cached;

  RevisionCache::Manifest m;
  m.title = title;
  m.cutoff = spec_.cutoff;
  ApiQuery continuation;
  std::size_t skipped = 0;
  // Resume an interrupted fetch for the same cutoff.
  if (auto prev = cache_.manifest(title);
      prev && !prev->complete && prev->cutoff == spec_.cutoff && !prev->continuation.empty()) {
    continuation = prev->continuation;
    skipped = prev->skipped;
  } else {
    cache_.reset_article(title);
  }

  for (;;) {
    ApiQuery q{{"action", "query"},
               {"prop", "revisions"},
               {"titles", title},
               {"rvprop", "ids|timestamp|user|size"},
               {"rvdir", "newer"},
               {"rvend", format_iso8601(spec_.cutoff)},
               {"rvlimit", std::to_string(spec_.page_limit)},
               {"format", "json"},
               {"formatversion", "2"}};
    for (const auto& [k, v] : continuation) q[k] = v;

    const HttpResponse resp = request(q);
    json doc;
    try {
      doc = json::parse(resp.body);
    } catch (const json::exception& e) {
      throw FetchError("malformed API response for '" + title + "': " + e.what());
    }
    if (doc.contains("error")) {
      throw FetchError("API error for '" + title + "': " + doc["error"].dump());
    }
    const json& pages = doc.at("query").at("pages");
    if (pages.empty()) throw FetchError("API returned no page for '" + title + "'");
    const json& page = pages.at(0);
    if (page.value("missing", false) || page.value("invalid", false)) {
      m.complete = true;
      m.missing = true;
      m.fetched_at = format_iso8601(clock_.wall_now());
      cache_.write_manifest(m);
      throw NotFoundError("article '" + title + "' does not exist");
    }
    std::vector<RevisionMeta> batch;
    if (page.contains("revisions")) {
      for (const auto& rv : page["revisions"]) {
        if (rv.value("userhidden", false) || rv.value("suppressed", false) ||
            !rv.contains("user") || !rv.contains("timestamp") || !rv.contains("size") ||
            !rv.contains("revid")) {
          ++skipped;
          continue;
        }
        RevisionMeta r;
        r.title = title;
        r.revision_id = rv["revid"].get<std::int64_t>();
        r.performer_id = rv["user"].get<std::string>();
        const auto ts = parse_iso8601(rv["timestamp"].get<std::string>());
        if (!ts || r.performer_id.empty()) {
          ++skipped;
          continue;
        }
        r.timestamp = *ts;
        if (r.timestamp > spec_.cutoff) continue;
        r.size_bytes = rv["size"].get<std::int64_t>();
        r.anonymous = rv.value("anon", false) || is_ip_address(r.performer_id);
        batch.push_back(std::move(r));
      }
    }
    cache_.append_revisions(title, batch);

    continuation.clear();
    if (doc.contains("continue")) {
      for (const auto& [k, v] : doc["continue"].items()) {
        continuation[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    m.skipped = skipped;
    m.continuation = continuation;
    m.complete = continuation.empty();
    m.fetched_at = format_iso8601(clock_.wall_now());
    if (m.complete) {
      auto all = cache_.load_revisions(title);
      sort_and_dedupe(all);
      m.revision_count = all.size();
      cache_.write_manifest(m);
      ArticleRevisions out;
      out.title = title;
      out.revisions = std::move(all);
      out.skipped = skipped;
      return out;
    }
    cache_.write_manifest(m);
  }
}

std::optional<Instant> WikiClient::fetch_first_edit(const std::string& performer) {
  if (performer.empty() || is_ip_address(performer)) return std::nullopt;
  if (auto cached = cache_.first_edit(performer)) return *cached;

  ApiQuery q{{"action", "query"}, {"list", "usercontribs"}, {"ucuser", performer},
             {"ucdir", "newer"},  {"uclimit", "1"},         {"ucprop", "timestamp"},
             {"format", "json"},  {"formatversion", "2"}};
  const HttpResponse resp = request(q);
  json doc;
  try {
    doc = json::parse(resp.body);
  } catch (const json::exception& e) {
    throw FetchError("malformed API response for user '" + performer + "': " + e.what());
  }
  std::optional<Instant> first;
  if (doc.contains("error")) {
    const std::string code = doc["error"].value("code", std::string{});
    if (code != "baduser" && code != "baduser_ucuser" && code != "invaliduser") {
      throw FetchError("API error for user '" + performer + "': " + doc["error"].dump());
    }
  } else {
    const json& contribs = doc.at("query").at("usercontribs");
    if (!contribs.empty()) first = parse_iso8601(contribs.at(0).at("timestamp").get<std::string>());
  }
  cache_.store_first_edit(performer, first);
  return first;
}

FetchOutcome WikiClient::fetch_all() {
  const auto& titles = spec_.titles;
  std::vector<std::optional<ArticleRevisions>> results(titles.size());
  std::vector<std::optional<FetchFailure>> failures(titles.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < titles.size(); i = next++) {
      try {
        results[i] = fetch_revisions(titles[i]);
      } catch (const NotFoundError& e) {
        failures[i] = FetchFailure{titles[i], e.what(), true};
      } catch (const Error& e) {
        failures[i] = FetchFailure{titles[i], e.what(), false};
      }
    }
  };
  const std::size_t n_workers = std::min(spec_.concurrency, std::max<std::size_t>(1, titles.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  FetchOutcome out;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    if (results[i]) out.articles.push_back(std::move(*results[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  return out;
}

FirstEditIndex WikiClient::fetch_first_edits(std::span<const ArticleRevisions> articles) {
  std::set<std::string> performers;
  for (const auto& a : articles) {
    for (const auto& r : a.revisions) {
      if (!r.anonymous) performers.insert(r.performer_id);
    }
  }
  FirstEditIndex index;
  for (const auto& p : performers) {
    if (const auto first = fetch_first_edit(p)) index.set(p, *first);
  }
  return index;
}

EventLog export_event_log(std::span<const ArticleRevisions> articles) {
  std::vector<const ArticleRevisions*> sorted;
  for (const auto& a : articles) sorted.push_back(&a);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return a->title < b->title; });
  std::vector<EventRecord> events;
  for (const auto* a : sorted) {
    std::optional<std::int64_t> prev_size;
    for (const auto& r : a->revisions) {
      EventRecord e;
      e.artifact_id = a->title;
      e.performer_id = r.performer_id;
      e.activity = "edit";
      e.timestamp = r.timestamp;
      e.size_delta = r.size_bytes - prev_size.value_or(0);
      prev_size = r.size_bytes;
      events.push_back(std::move(e));
    }
  }
  return EventLog(std::move(events));
}

std::vector<std::string> read_titles(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open titles file '" + path.string() + "'");
  std::vector<std::string> titles;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t");
    titles.push_back(line.substr(b, e - b + 1));
  }
  return titles;
}

}  // namespace seqmotif::wiki
