#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

namespace patvar::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 256;

  bool operator==(const CompletionRequest&) const = default;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view name);

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  bool from_cache = false;
};

/// Throws PreconditionViolation on an empty message, max_tokens <= 0, or a
/// negative temperature.
void validate(const CompletionRequest& req);

/// Canonical JSON for a request: fixed key order, shortest round-trip
/// number formatting. The cache key hashes exactly these bytes.
std::string canonical_json(const CompletionRequest& req);
nlohmann::ordered_json to_json(const CompletionRequest& req);
CompletionRequest request_from_json(const nlohmann::json& j);

/// SHA-256 over canonical_json(req).
std::string cache_key(const CompletionRequest& req);

/// A chat-completion endpoint. `send` performs exactly one attempt and
/// signals failure with BackendError (HTTP status) or TransportError.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse send(const CompletionRequest& req) = 0;
};

/// Deterministic in-process backend. Lookups go to the canned table first
/// (keyed by cache_key), then to the responder. Every send increments the
/// call counter, including failed ones.
class MockBackend final : public Backend {
 public:
  using Responder = std::function<CompletionResponse(const CompletionRequest&)>;

  MockBackend() = default;
  explicit MockBackend(Responder responder) : responder_(std::move(responder)) {}

  void add(const CompletionRequest& req, std::string text,
           FinishReason reason = FinishReason::Stop);
  void add_digest(std::string digest, std::string text, FinishReason reason = FinishReason::Stop);
  void set_responder(Responder responder) { responder_ = std::move(responder); }

  /// Loads {digest: text} or {digest: {text, finish_reason}} pairs.
  void load_table(const std::filesystem::path& path);

  CompletionResponse send(const CompletionRequest& req) override;

  std::size_t calls() const { return calls_.load(); }
  void reset_calls() { calls_ = 0; }

 private:
  std::mutex mutex_;
  std::map<std::string, CompletionResponse> table_;
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
};

struct HttpOptions {
  std::string api_base;  // e.g. http://localhost:8000/v1
  std::string api_key;
  std::string endpoint = "/chat/completions";
  std::string text_path = "/choices/0/message/content";
  std::string finish_path = "/choices/0/finish_reason";
  std::chrono::seconds timeout{60};
};

/// OpenAI-compatible chat-completions over HTTP(S).
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpOptions options);
  CompletionResponse send(const CompletionRequest& req) override;

 private:
  HttpOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

/// One attempt plus up to max_retries retries with doubling backoff on
/// transport failures, 5xx, and 429. Other HTTP errors fail immediately.
/// Exhausted transport failures surface as Timeout.
CompletionResponse complete(const CompletionRequest& req, Backend& backend,
                            const RetryPolicy& retry = {});

/// Content-addressed cache: one `<key>.json` file per request holding
/// {request, response, timestamp}. Hits make no backend call. Misses are
/// persisted with write-then-rename, except error responses.
CompletionResponse cached_complete(const CompletionRequest& req, Backend& backend,
                                   const std::filesystem::path& cache_dir,
                                   const RetryPolicy& retry = {});

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  int max_concurrent = 4;
  std::string model = "gpt-4o";
};

/// Shared front door to one backend: optional cache, retry policy, and a
/// cap on in-flight requests.
class Gateway {
 public:
  Gateway(Backend& backend, GatewayOptions options);

  CompletionResponse complete(CompletionRequest req);

  const std::string& model() const { return options_.model; }

 private:
  Backend& backend_;
  GatewayOptions options_;
  std::unique_ptr<std::counting_semaphore<>> limiter_;
};

}  // namespace patvar::llm
