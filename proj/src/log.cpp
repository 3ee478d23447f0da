#include "gnnpool/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace gnnpool {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void default_sink(LogLevel level, std::string_view message) {
  static const bool verbose = std::getenv("GNNPOOL_VERBOSE") != nullptr;
  if (level == LogLevel::info && !verbose) return;
  std::clog << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
}

LogSink& sink() {
  static LogSink s = default_sink;
  return s;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(sink());
  sink() = s ? std::move(s) : LogSink(default_sink);
  return previous;
}

void log_info(std::string_view message) { emit(LogLevel::info, message); }
void log_warning(std::string_view message) { emit(LogLevel::warning, message); }

}  // namespace gnnpool
