#include "swarmkdn/log.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace swarmkdn::log {
namespace {

Level from_env() {
  const char* v = std::getenv("SWARMKDN_LOG");
  if (v == nullptr) return Level::Warn;
  const std::string s(v);
  if (s == "off" || s == "0") return Level::Off;
  if (s == "error") return Level::Error;
  if (s == "info") return Level::Info;
  if (s == "debug" || s == "trace") return Level::Debug;
  return Level::Warn;
}

std::optional<Level>& current() {
  static std::optional<Level> level;
  return level;
}

constexpr std::string_view name(Level l) {
  switch (l) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
    case Level::Off: break;
  }
  return "off";
}

}  // namespace

Level threshold() {
  if (!current()) current() = from_env();
  return *current();
}

void set_threshold(Level level) { current() = level; }

bool enabled(Level level) { return level != Level::Off && level <= threshold(); }

void write(Level level, std::string_view msg) {
  if (!enabled(level)) return;
  std::cerr << '[' << name(level) << "] " << msg << '\n';
}

}  // namespace swarmkdn::log
