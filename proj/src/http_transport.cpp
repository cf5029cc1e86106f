#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <mutex>

#include "seqmotif/errors.hpp"
#include "seqmotif/wiki_ingest.hpp"

namespace seqmotif::wiki {
namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(const std::string& endpoint, std::string user_agent)
      : user_agent_(std::move(user_agent)) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw ArgumentError("API endpoint must include a scheme: '" + endpoint + "'");
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    base_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
    client_ = std::make_unique<httplib::Client>(base_);
    client_->set_url_encode(false);
    client_->set_follow_location(true);
    client_->set_connection_timeout(10);
    client_->set_read_timeout(30);
  }

  HttpResponse get(const ApiQuery& query) override {
    const std::string target = path_ + "?" + canonical_query(query);
    const httplib::Headers headers{{"User-Agent", user_agent_}};
    std::lock_guard lock(mu_);
    auto res = client_->Get(target, headers);
    if (!res) {
      throw FetchError("HTTP request to " + base_ + " failed: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
  }

 private:
  std::string user_agent_;
  std::string base_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
  std::mutex mu_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& api_endpoint,
                                                   const std::string& user_agent) {
  return std::make_unique<HttplibTransport>(api_endpoint, user_agent);
}

}  // namespace seqmotif::wiki
