#pragma once

#include <string_view>

namespace swarmkdn::log {

enum class Level { Off = 0, Error, Warn, Info, Debug };

/// Read once from SWARMKDN_LOG (off|error|warn|info|debug, default warn).
Level threshold();
void set_threshold(Level level);
bool enabled(Level level);

/// Writes "[level] msg" to stderr when enabled.
void write(Level level, std::string_view msg);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace swarmkdn::log
