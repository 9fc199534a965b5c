#include <httplib.h>

#include "patvar/llm.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <iterator>
#include <thread>

#include <unistd.h>

#include "patvar/digest.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/strings.hpp"

namespace patvar::llm {
namespace {

Role role_from_string(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw ResponseFormatError("unknown role '" + std::string(name) + "'");
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<CompletionResponse> read_cache_entry(const std::filesystem::path& file,
                                                   const CompletionRequest& req) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    auto j = nlohmann::json::parse(body);
    if (request_from_json(j.at("request")) != req) throw ResponseFormatError("request mismatch");
    const auto& r = j.at("response");
    CompletionResponse resp;
    resp.text = r.at("text").get<std::string>();
    resp.finish_reason = finish_reason_from_string(r.at("finish_reason").get<std::string>());
    resp.from_cache = true;
    return resp;
  } catch (const std::exception& e) {
    log::warn("corrupted cache entry " + file.string() + " (" + e.what() + "); refetching");
    return std::nullopt;
  }
}

void write_cache_entry(const std::filesystem::path& dir, const std::string& key,
                       const CompletionRequest& req, const CompletionResponse& resp) {
  static std::atomic<unsigned> counter{0};
  nlohmann::ordered_json entry;
  entry["request"] = to_json(req);
  entry["response"] = {{"text", resp.text},
                       {"finish_reason", std::string(to_string(resp.finish_reason))}};
  entry["timestamp"] = utc_timestamp();

  const auto final_path = dir / (key + ".json");
  const auto tmp_path = dir / (key + ".json.tmp." + std::to_string(::getpid()) + "." +
                               std::to_string(counter++));
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot write " + tmp_path.string());
    out << entry.dump(2) << '\n';
    if (!out) throw CacheError("short write to " + tmp_path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp_path, ec);
    throw CacheError("cannot publish cache entry " + final_path.string());
  }
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      return "assistant";
  }
  return "user";
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop:
      return "stop";
    case FinishReason::Length:
      return "length";
    case FinishReason::Error:
      return "error";
  }
  return "stop";
}

FinishReason finish_reason_from_string(std::string_view name) {
  if (name == "length") return FinishReason::Length;
  if (name == "error") return FinishReason::Error;
  return FinishReason::Stop;
}

void validate(const CompletionRequest& req) {
  if (req.messages.empty()) throw PreconditionViolation("request has no messages");
  for (const auto& m : req.messages)
    if (m.content.empty()) throw PreconditionViolation("message content must be non-empty");
  if (req.max_tokens <= 0) throw PreconditionViolation("max_tokens must be positive");
  if (req.temperature < 0) throw PreconditionViolation("temperature must be non-negative");
}

nlohmann::ordered_json to_json(const CompletionRequest& req) {
  nlohmann::ordered_json j;
  j["model"] = req.model;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) {
    nlohmann::ordered_json mj;
    mj["role"] = std::string(to_string(m.role));
    mj["content"] = m.content;
    msgs.push_back(std::move(mj));
  }
  j["messages"] = std::move(msgs);
  j["temperature"] = req.temperature;
  j["max_tokens"] = req.max_tokens;
  return j;
}

CompletionRequest request_from_json(const nlohmann::json& j) {
  CompletionRequest req;
  req.model = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages"))
    req.messages.push_back({role_from_string(m.at("role").get<std::string>()),
                            m.at("content").get<std::string>()});
  req.temperature = j.at("temperature").get<double>();
  req.max_tokens = j.at("max_tokens").get<int>();
  return req;
}

std::string canonical_json(const CompletionRequest& req) { return to_json(req).dump(); }

std::string cache_key(const CompletionRequest& req) { return sha256_hex(canonical_json(req)); }

// ---------------------------------------------------------------------------
// MockBackend

void MockBackend::add(const CompletionRequest& req, std::string text, FinishReason reason) {
  add_digest(cache_key(req), std::move(text), reason);
}

void MockBackend::add_digest(std::string digest, std::string text, FinishReason reason) {
  std::lock_guard lock(mutex_);
  table_[std::move(digest)] = CompletionResponse{std::move(text), reason, false};
}

void MockBackend::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mock table " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("mock table " + path.string() + ": " + e.what());
  }
  for (const auto& [digest, value] : j.items()) {
    if (value.is_string()) {
      add_digest(digest, value.get<std::string>());
    } else {
      add_digest(digest, value.at("text").get<std::string>(),
                 finish_reason_from_string(value.value("finish_reason", "stop")));
    }
  }
}

CompletionResponse MockBackend::send(const CompletionRequest& req) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    if (auto it = table_.find(cache_key(req)); it != table_.end()) return it->second;
  }
  if (responder_) return responder_(req);
  throw BackendError(404, "mock backend has no response for this request");
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
  auto base = options_.api_base;
  while (!base.empty() && base.back() == '/') base.pop_back();
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = base;
  } else {
    scheme_host_port_ = base.substr(0, path_start);
    path_prefix_ = base.substr(path_start);
  }
}

CompletionResponse HttpBackend::send(const CompletionRequest& req) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto res = client.Post(path_prefix_ + options_.endpoint, headers, canonical_json(req),
                         "application/json");
  if (!res) throw TransportError("request to " + scheme_host_port_ + " failed: " +
                                 httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw BackendError(res->status, res->body);

  try {
    auto j = nlohmann::json::parse(res->body);
    CompletionResponse out;
    out.text = j.at(nlohmann::json::json_pointer(options_.text_path)).get<std::string>();
    nlohmann::json::json_pointer finish(options_.finish_path);
    if (j.contains(finish) && j.at(finish).is_string())
      out.finish_reason = finish_reason_from_string(j.at(finish).get<std::string>());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(res->status, std::string("unexpected response shape: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Gateway

CompletionResponse complete(const CompletionRequest& req, Backend& backend,
                            const RetryPolicy& retry) {
  validate(req);
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= retry.max_retries;
    try {
      auto resp = backend.send(req);
      resp.from_cache = false;
      return resp;
    } catch (const BackendError& e) {
      const bool transient = e.status() >= 500 || e.status() == 429;
      if (!transient || last) throw;
    } catch (const TransportError& e) {
      if (last)
        throw Timeout(std::string(e.what()) + " (after " + std::to_string(attempt + 1) +
                      " attempts)");
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

CompletionResponse cached_complete(const CompletionRequest& req, Backend& backend,
                                   const std::filesystem::path& cache_dir,
                                   const RetryPolicy& retry) {
  validate(req);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) throw CacheError("cannot create cache directory " + cache_dir.string());
  const auto key = cache_key(req);
  if (auto hit = read_cache_entry(cache_dir / (key + ".json"), req)) return *hit;
  auto resp = complete(req, backend, retry);
  if (resp.finish_reason != FinishReason::Error) write_cache_entry(cache_dir, key, req, resp);
  return resp;
}

Gateway::Gateway(Backend& backend, GatewayOptions options)
    : backend_(backend),
      options_(std::move(options)),
      limiter_(std::make_unique<std::counting_semaphore<>>(std::max(options_.max_concurrent, 1))) {}

CompletionResponse Gateway::complete(CompletionRequest req) {
  if (req.model.empty()) req.model = options_.model;
  limiter_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*limiter_};
  if (options_.cache_dir) return cached_complete(req, backend_, *options_.cache_dir, options_.retry);
  return llm::complete(req, backend_, options_.retry);
}

}  // namespace patvar::llm
