#include "mile/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mile {

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("MILE_LOG");
    if (env == nullptr) return LogLevel::kWarn;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
    if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    std::fprintf(stderr, "[warn] MILE_LOG='%s' not recognized; using warn\n", env);
    return LogLevel::kWarn;
  }();
  return level;
}

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  const char* tag = "warn";
  switch (level) {
    case LogLevel::kError:
      tag = "error";
      break;
    case LogLevel::kWarn:
      tag = "warn";
      break;
    case LogLevel::kInfo:
      tag = "info";
      break;
    case LogLevel::kDebug:
      tag = "debug";
      break;
  }
  std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

}  // namespace mile
