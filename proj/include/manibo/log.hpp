#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace manibo::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Off = 3 };

inline std::atomic<Level>& threshold() {
  static std::atomic<Level> level{Level::Warn};
  return level;
}

inline void set_level(Level level) { threshold().store(level); }

inline void write(Level level, std::string_view msg) {
  if (level < threshold().load()) return;
  static constexpr const char* tags[] = {"debug", "info", "warn"};
  std::clog << "[manibo:" << tags[static_cast<int>(level)] << "] " << msg
            << '\n';
}

inline void debug(std::string_view msg) { write(Level::Debug, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void warn(std::string_view msg) { write(Level::Warn, msg); }

}  // namespace manibo::log
