#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gaze9/filter/gaze_filter.hpp"

namespace gaze9::service {

enum class InputMode { kStates, kFrames };
enum class FeedbackMode { kScreen, kOffScreen };

inline const char* to_string(InputMode m) { return m == InputMode::kStates ? "states" : "frames"; }
inline const char* to_string(FeedbackMode m) { return m == FeedbackMode::kScreen ? "screen" : "off_screen"; }

inline InputMode parse_input_mode(const std::string& s) {
  if (s == "states") return InputMode::kStates;
  if (s == "frames") return InputMode::kFrames;
  throw std::invalid_argument("input mode must be states or frames, got '" + s + "'");
}

inline FeedbackMode parse_feedback_mode(const std::string& s) {
  if (s == "screen") return FeedbackMode::kScreen;
  if (s == "off_screen" || s == "off-screen") return FeedbackMode::kOffScreen;
  throw std::invalid_argument("feedback mode must be screen or off_screen, got '" + s + "'");
}

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SessionConfig {
  std::filesystem::path weights;  // empty: frames cannot be classified
  InputMode input = InputMode::kStates;
  std::size_t capacity = filter::kDefaultCapacity;
  double fps = 29.0;
  FeedbackMode feedback = FeedbackMode::kScreen;
  std::filesystem::path log_dir;  // empty: no session logs
  std::string listen = "127.0.0.1:8765";

  void validate() const {
    if (capacity < 2) throw ConfigError("capacity must be >= 2");
    if (!(fps > 0)) throw ConfigError("fps must be positive");
  }
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys are errors.
inline SessionConfig parse_config(std::istream& is, SessionConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "weights") {
        base.weights = value;
      } else if (key == "input") {
        base.input = parse_input_mode(value);
      } else if (key == "capacity") {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size() || v < 0) throw std::invalid_argument("not a count");
        base.capacity = static_cast<std::size_t>(v);
      } else if (key == "fps") {
        std::size_t pos = 0;
        base.fps = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("not a number");
      } else if (key == "feedback") {
        base.feedback = parse_feedback_mode(value);
      } else if (key == "log_dir") {
        base.log_dir = value;
      } else if (key == "listen") {
        base.listen = value;
      } else {
        throw ConfigError(where + "unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(where + "bad value for " + key + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

inline SessionConfig load_config(const std::filesystem::path& path, SessionConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is, std::move(base));
}

struct Endpoint {
  std::string host;
  std::uint16_t port;
};

/// "host:port" or ":port" (all interfaces).
inline Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw ConfigError("listen address must be host:port, got '" + s + "'");
  Endpoint e;
  e.host = colon == 0 ? "0.0.0.0" : s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  std::size_t pos = 0;
  long p = -1;
  try {
    p = std::stol(port, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (port.empty() || pos != port.size() || p < 0 || p > 65535) throw ConfigError("bad port in '" + s + "'");
  e.port = static_cast<std::uint16_t>(p);
  return e;
}

}  // namespace gaze9::service
