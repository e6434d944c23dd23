#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "cotg/constructor.hpp"

namespace cotg {

/// Chat-completion endpoint settings. Defaults target a local
/// OpenAI-compatible server.
struct BackendConfig {
  std::string endpoint_url = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model_name = "qwen-turbo";
  std::string api_key_env_var = "LLM_API_KEY";
  double timeout_seconds = 60.0;
  std::size_t max_concurrent_requests = 4;
  double price_per_1k_input_tokens = 0.0;
  double price_per_1k_output_tokens = 0.0;
  std::size_t max_retries = 4;  ///< extra attempts on 429/5xx/transport errors
  double backoff_initial_seconds = 0.5;
  double backoff_max_seconds = 16.0;
  double temperature = 0.0;
  /// JSONL of {request_hash, response}; responses found here skip the network.
  std::optional<std::filesystem::path> cache_path;

  /// Throws Error(ConfigError).
  void check() const;
};

struct UsageDelta {
  std::size_t requests = 0;
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  double cost = 0.0;
  bool estimated = false;  ///< token counts derived locally, not from the provider

  UsageDelta& operator+=(const UsageDelta& o);
};

/// Thread-safe running totals.
class UsageLedger {
 public:
  void record(const UsageDelta& delta);
  UsageDelta totals() const;

 private:
  mutable std::mutex mutex_;
  UsageDelta totals_;
};

struct Completion {
  std::string text;
  UsageDelta usage;
  bool from_cache = false;
};

/// Blocking chat-completion client. Safe to share between threads; at most
/// `max_concurrent_requests` calls are on the wire at once.
class LlmClient {
 public:
  explicit LlmClient(BackendConfig config);
  ~LlmClient();
  LlmClient(const LlmClient&) = delete;
  LlmClient& operator=(const LlmClient&) = delete;

  /// One round trip. Throws Error(AuthError), Error(Timeout), ProviderError.
  Completion complete(std::string_view prompt);

  UsageDelta usage() const;
  const BackendConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Oracle that sends the rendered prompt through `client`, which must
/// outlive the returned callable.
Oracle make_llm_oracle(LlmClient& client);

/// Hex SHA-256 of model name and prompt; the response cache key.
std::string request_hash(std::string_view model, std::string_view prompt);

}  // namespace cotg
