#pragma once

#include <functional>
#include <string_view>

namespace gnnpool {

enum class LogLevel { info, warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Default sink writes warnings to stderr and drops info messages unless
// GNNPOOL_VERBOSE is set. Returns the previous sink.
LogSink set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

}  // namespace gnnpool
