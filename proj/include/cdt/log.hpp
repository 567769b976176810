#pragma once

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

namespace cdt {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

namespace detail {

inline LogLevel level_from_env() {
  const char* v = std::getenv("CDT_LOG");
  if (v == nullptr) return LogLevel::warn;
  std::string s(v);
  if (s == "debug") return LogLevel::debug;
  if (s == "info") return LogLevel::info;
  if (s == "warn") return LogLevel::warn;
  if (s == "error") return LogLevel::error;
  if (s == "off") return LogLevel::off;
  return LogLevel::warn;
}

inline std::atomic<LogLevel>& level_slot() {
  static std::atomic<LogLevel> level{level_from_env()};
  return level;
}

inline const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    default: return "?";
  }
}

}  // namespace detail

inline LogLevel log_level() { return detail::level_slot().load(); }
inline void set_log_level(LogLevel level) { detail::level_slot().store(level); }

// Messages go to stderr so CLI stdout stays machine-readable.
inline void log_line(LogLevel level, const std::string& message) {
  if (level < log_level() || level == LogLevel::off) return;
  std::cerr << "[cdt." << detail::tag(level) << "] " << message << "\n";
}

inline void log_debug(const std::string& m) { log_line(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log_line(LogLevel::warn, m); }
inline void log_error(const std::string& m) { log_line(LogLevel::error, m); }

}  // namespace cdt
