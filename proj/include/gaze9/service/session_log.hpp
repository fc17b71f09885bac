#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/t9/engine.hpp"

namespace gaze9::service {

inline constexpr int kLogVersion = 1;

/// Append-only JSON-lines log. The first line is a header; each later line
/// records one observation: {"t", "frame", "raw", "filtered", "events"}.
/// "t" (seconds since the session started) and the header's "started" are
/// the only wall-clock fields.
class SessionLog {
 public:
  SessionLog(const std::filesystem::path& path, nlohmann::json header) : path_(path), start_(Clock::now()) {
    os_.open(path, std::ios::out | std::ios::trunc);
    if (!os_) throw std::runtime_error("cannot open session log " + path.string());
    header["type"] = "header";
    header["version"] = kLogVersion;
    header["started"] = utc_timestamp();
    write(header);
  }

  const std::filesystem::path& path() const noexcept { return path_; }

  void record(std::size_t frame, EyeState raw, std::optional<EyeState> filtered, const std::vector<t9::FeedbackEvent>& events) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : events) ev.push_back(t9::event_to_json(e));
    write({{"t", std::chrono::duration<double>(Clock::now() - start_).count()},
           {"frame", frame},
           {"raw", raw.code()},
           {"filtered", filtered ? nlohmann::json(filtered->code()) : nlohmann::json(nullptr)},
           {"events", ev}});
  }

 private:
  using Clock = std::chrono::steady_clock;

  static std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  void write(const nlohmann::json& j) {
    os_ << j.dump() << '\n';
    os_.flush();
    if (!os_) throw std::runtime_error("write to session log " + path_.string() + " failed");
  }

  std::filesystem::path path_;
  Clock::time_point start_;
  std::ofstream os_;
};

struct LogRecord {
  double t = 0;
  std::size_t frame = 0;
  EyeState raw;
  std::optional<EyeState> filtered;
  nlohmann::json events;
};

struct SessionReplay {
  nlohmann::json header;
  std::vector<LogRecord> records;
  bool truncated_tail = false;

  std::vector<std::optional<EyeState>> filtered_stream() const {
    std::vector<std::optional<EyeState>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.filtered);
    return out;
  }
  std::vector<std::optional<EyeState>> raw_stream() const {
    std::vector<std::optional<EyeState>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.raw);
    return out;
  }
  /// Seconds between the first and last record, or 0.
  double elapsed_seconds() const { return records.size() < 2 ? 0.0 : records.back().t - records.front().t; }
};

/// Reads a session log. A malformed last line is a torn write and is
/// dropped; a malformed earlier line is an error.
inline SessionReplay read_session_log(std::istream& is) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  SessionReplay r;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      if (i == 0) {
        if (j.value("type", "") != "header") throw std::invalid_argument("first line is not a header");
        r.header = j;
        continue;
      }
      LogRecord rec;
      rec.t = j.at("t").get<double>();
      rec.frame = j.at("frame").get<std::size_t>();
      rec.raw = EyeState(j.at("raw").get<int>());
      if (!j.at("filtered").is_null()) rec.filtered = EyeState(j.at("filtered").get<int>());
      rec.events = j.value("events", nlohmann::json::array());
      r.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      if (last && i > 0) {
        r.truncated_tail = true;
        break;
      }
      throw std::invalid_argument("session log line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (lines.empty()) throw std::invalid_argument("session log is empty");
  return r;
}

inline SessionReplay read_session_log(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open session log " + path.string());
  return read_session_log(is);
}

}  // namespace gaze9::service
