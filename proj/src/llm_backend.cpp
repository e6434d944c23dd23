#include "cotg/llm_backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include "cotg/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cotg {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "endpoint_url needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable(int status) { return status == 429 || (status >= 500 && status <= 599); }

class GateGuard {
 public:
  explicit GateGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~GateGuard() { s_.release(); }
  GateGuard(const GateGuard&) = delete;
  GateGuard& operator=(const GateGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

void BackendConfig::check() const {
  if (max_concurrent_requests < 1) {
    throw Error(ErrorCode::ConfigError, "max_concurrent_requests must be >= 1");
  }
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::ConfigError, "timeout must be > 0");
  if (backoff_initial_seconds < 0.0 || backoff_max_seconds < 0.0) {
    throw Error(ErrorCode::ConfigError, "backoff must be >= 0");
  }
  split_url(endpoint_url);
}

UsageDelta& UsageDelta::operator+=(const UsageDelta& o) {
  requests += o.requests;
  input_tokens += o.input_tokens;
  output_tokens += o.output_tokens;
  cost += o.cost;
  estimated = estimated || o.estimated;
  return *this;
}

void UsageLedger::record(const UsageDelta& delta) {
  std::lock_guard lock(mutex_);
  totals_ += delta;
}

UsageDelta UsageLedger::totals() const {
  std::lock_guard lock(mutex_);
  return totals_;
}

std::string request_hash(std::string_view model, std::string_view prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, model.data(), model.size());
  EVP_DigestUpdate(ctx, "\n", 1);
  EVP_DigestUpdate(ctx, prompt.data(), prompt.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

struct LlmClient::Impl {
  explicit Impl(BackendConfig c)
      : config(std::move(c)),
        endpoint(split_url(config.endpoint_url)),
        gate(static_cast<std::ptrdiff_t>(config.max_concurrent_requests)) {
    if (config.cache_path) load_cache();
  }

  void load_cache() {
    std::ifstream in(*config.cache_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("request_hash") || !j.contains("response")) continue;
      cache[j["request_hash"].get<std::string>()] = j["response"].get<std::string>();
    }
  }

  std::optional<std::string> cached(const std::string& key) {
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(key);
    if (it == cache.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& key, const std::string& response) {
    std::lock_guard lock(cache_mutex);
    if (!cache.emplace(key, response).second) return;
    std::ofstream out(*config.cache_path, std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot append to " + config.cache_path->string());
    out << json{{"request_hash", key}, {"response", response}}.dump() << '\n';
  }

  std::chrono::duration<double> backoff(std::size_t attempt, const httplib::Result* res) const {
    double wait = config.backoff_initial_seconds * std::pow(2.0, double(attempt));
    if (res && *res && (*res)->has_header("Retry-After")) {
      try {
        wait = std::stod((*res)->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    return std::chrono::duration<double>(std::min(wait, config.backoff_max_seconds));
  }

  Completion round_trip(std::string_view prompt, const std::string& api_key) {
    json body = {{"model", config.model_name},
                 {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
                 {"temperature", config.temperature}};
    const std::string payload = body.dump();
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};

    const auto secs = static_cast<time_t>(config.timeout_seconds);
    const auto usecs = static_cast<time_t>((config.timeout_seconds - double(secs)) * 1e6);

    for (std::size_t attempt = 0;; ++attempt) {
      httplib::Client client(endpoint.scheme_host_port);
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      httplib::Result res;
      {
        GateGuard guard(gate);
        res = client.Post(endpoint.path, headers, payload, "application/json");
      }
      const bool last = attempt >= config.max_retries;
      if (!res) {
        auto err = res.error();
        if (!last) {
          std::this_thread::sleep_for(backoff(attempt, nullptr));
          continue;
        }
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
          throw Error(ErrorCode::Timeout, httplib::to_string(err));
        }
        throw ProviderError(0, httplib::to_string(err));
      }
      const int status = res->status;
      if (status == 401 || status == 403) throw Error(ErrorCode::AuthError, excerpt(res->body));
      if (retryable(status)) {
        if (last) throw ProviderError(status, excerpt(res->body));
        std::this_thread::sleep_for(backoff(attempt, &res));
        continue;
      }
      if (status < 200 || status >= 300) throw ProviderError(status, excerpt(res->body));
      return decode(prompt, res->body, status);
    }
  }

  Completion decode(std::string_view prompt, const std::string& raw, int status) const {
    auto j = json::parse(raw, nullptr, false);
    std::optional<std::string> content;
    if (!j.is_discarded() && j.contains("choices") && j["choices"].is_array() &&
        !j["choices"].empty()) {
      const auto msg = j["choices"][0].value("message", json::object());
      if (msg.contains("content") && msg["content"].is_string()) content = msg["content"].get<std::string>();
    }
    if (!content) throw ProviderError(status, "malformed completion: " + excerpt(raw));

    Completion c;
    c.text = std::move(*content);
    c.usage.requests = 1;
    const auto usage = j.value("usage", json::object());
    if (usage.contains("prompt_tokens") && usage.contains("completion_tokens")) {
      c.usage.input_tokens = usage["prompt_tokens"].get<std::size_t>();
      c.usage.output_tokens = usage["completion_tokens"].get<std::size_t>();
    } else {
      c.usage.input_tokens = token_count(prompt);
      c.usage.output_tokens = token_count(c.text);
      c.usage.estimated = true;
    }
    c.usage.cost = double(c.usage.input_tokens) / 1000.0 * config.price_per_1k_input_tokens +
                   double(c.usage.output_tokens) / 1000.0 * config.price_per_1k_output_tokens;
    return c;
  }

  BackendConfig config;
  Endpoint endpoint;
  std::counting_semaphore<> gate;
  UsageLedger ledger;
  std::mutex cache_mutex;
  std::unordered_map<std::string, std::string> cache;
};

LlmClient::LlmClient(BackendConfig config) {
  config.check();
  impl_ = std::make_unique<Impl>(std::move(config));
}

LlmClient::~LlmClient() = default;

Completion LlmClient::complete(std::string_view prompt) {
  std::string key;
  if (impl_->config.cache_path) {
    key = request_hash(impl_->config.model_name, prompt);
    if (auto hit = impl_->cached(key)) return Completion{*hit, {}, true};
  }
  const char* api_key = std::getenv(impl_->config.api_key_env_var.c_str());
  if (api_key == nullptr || *api_key == '\0') {
    throw Error(ErrorCode::AuthError, "environment variable " + impl_->config.api_key_env_var +
                                          " is not set");
  }
  Completion c = impl_->round_trip(prompt, api_key);
  impl_->ledger.record(c.usage);
  if (impl_->config.cache_path) impl_->store(key, c.text);
  return c;
}

UsageDelta LlmClient::usage() const { return impl_->ledger.totals(); }

const BackendConfig& LlmClient::config() const { return impl_->config; }

Oracle make_llm_oracle(LlmClient& client) {
  return [&client](const OracleRequest& req) { return client.complete(req.prompt).text; };
}

}  // namespace cotg
