#pragma once

#include <string>

namespace mile {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Threshold read once from MILE_LOG (error|warn|info|debug); default warn.
LogLevel log_threshold();

// Writes "[level] message" to standard error when `level` passes the
// threshold.
void log(LogLevel level, const std::string& message);

}  // namespace mile
