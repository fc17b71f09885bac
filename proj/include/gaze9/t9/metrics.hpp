#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace gaze9::t9 {

struct SessionMetrics {
  std::size_t letters = 0;  // typed characters other than spaces
  double elapsed_seconds = 0;
  double letters_per_minute = 0;
  double error_rate = 0;  // wrong letters / typed letters

  nlohmann::json to_json() const {
    return {{"letters", letters},
            {"elapsed_seconds", elapsed_seconds},
            {"letters_per_minute", letters_per_minute},
            {"error_rate", error_rate}};
  }
};

inline std::string strip_spaces(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  return s;
}

/// Spaces are removed from both texts, then letters are compared by
/// position; a typed letter beyond the end of the reference is wrong.
inline SessionMetrics compute_metrics(const std::string& typed, const std::string& reference, double elapsed_seconds) {
  if (!(elapsed_seconds > 0)) throw std::invalid_argument("elapsed time must be positive");
  const std::string t = strip_spaces(typed);
  const std::string r = strip_spaces(reference);
  SessionMetrics m;
  m.letters = t.size();
  m.elapsed_seconds = elapsed_seconds;
  if (t.empty()) return m;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i >= r.size() || t[i] != r[i]) ++wrong;
  }
  m.letters_per_minute = 60.0 * static_cast<double>(t.size()) / elapsed_seconds;
  m.error_rate = static_cast<double>(wrong) / static_cast<double>(t.size());
  return m;
}

}  // namespace gaze9::t9
