#pragma once

#include <functional>
#include <string>

namespace patvar::log {

using Sink = std::function<void(const std::string&)>;

/// Emits a warning. Goes to stderr unless a sink is installed.
void warn(const std::string& message);

/// Replaces the warning sink; returns the previous one. An empty sink
/// restores stderr output.
Sink set_warning_sink(Sink sink);

/// Installs a sink for the lifetime of the guard.
class ScopedSink {
 public:
  explicit ScopedSink(Sink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedSink() { set_warning_sink(std::move(previous_)); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace patvar::log
