#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/estimator/model.hpp"
#include "gaze9/filter/gaze_filter.hpp"
#include "gaze9/image/png_io.hpp"
#include "gaze9/service/base64.hpp"
#include "gaze9/service/config.hpp"
#include "gaze9/service/session_log.hpp"
#include "gaze9/t9/engine.hpp"

namespace gaze9::service {

using Json = nlohmann::json;
using Model = estimator::ModelParams<float>;

inline Json error_message(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

/// One client's pipeline: (frame -> estimator) -> filter -> keyboard.
/// Messages are applied strictly in order; the session never looks at a
/// clock except to timestamp log records.
class Session {
 public:
  Session(SessionConfig config, std::shared_ptr<const Model> model, std::string id = "0")
      : config_(std::move(config)), model_(std::move(model)), id_(std::move(id)), window_(config_.capacity) {
    config_.validate();
    open_log();
  }

  /// Handles one raw line of JSON text.
  std::vector<Json> handle_text(const std::string& text) {
    Json msg;
    try {
      msg = Json::parse(text);
    } catch (const Json::parse_error& e) {
      return {error_message("bad_json", e.what())};
    }
    return handle_message(msg);
  }

  std::vector<Json> handle_message(const Json& msg) {
    std::lock_guard lock(mu_);
    std::vector<Json> out;
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
      out.push_back(error_message("bad_json", "message must be an object with a string \"type\""));
      return out;
    }
    const std::string type = msg.at("type").get<std::string>();
    if (type == "gaze_state") {
      handle_gaze_state(msg, out);
    } else if (type == "frame") {
      handle_frame(msg, out);
    } else if (type == "reset") {
      window_.reset();
      engine_.reset();
      frame_ = 0;
      open_log();
      flush_log_error(out);
      out.push_back(ui_state());
    } else if (type == "configure") {
      handle_configure(msg, out);
    } else {
      out.push_back(error_message("unknown_type", "unknown message type '" + type + "'"));
    }
    return out;
  }

  Json ui_state() const {
    const auto& s = engine_.state();
    return {{"type", "ui_state"},
            {"mode", t9::mode_to_json(s.mode)},
            {"highlight", s.highlight ? Json(*s.highlight) : Json(nullptr)},
            {"text", s.text},
            {"feedback_mode", to_string(config_.feedback)}};
  }

  /// Consistent copy of the keyboard state; safe from any thread.
  t9::KeyboardState snapshot() const {
    std::lock_guard lock(mu_);
    return engine_.state();
  }

  std::optional<std::filesystem::path> log_path() const {
    std::lock_guard lock(mu_);
    if (!log_) return std::nullopt;
    return log_->path();
  }

  const SessionConfig& config() const noexcept { return config_; }

 private:
  void handle_gaze_state(const Json& msg, std::vector<Json>& out) {
    if (!msg.contains("state") || msg.at("state").is_null()) {
      observe(std::nullopt, out);
      return;
    }
    const Json& s = msg.at("state");
    std::optional<EyeState> state;
    if (s.is_number_integer()) state = EyeState::from_code(s.get<int>());
    if (!state) {
      out.push_back(error_message("bad_state", "state must be an integer 0-9 or null, got " + s.dump()));
      return;
    }
    observe(state, out);
  }

  void handle_frame(const Json& msg, std::vector<Json>& out) {
    if (config_.input != InputMode::kFrames) {
      out.push_back(error_message("bad_input_mode", "session takes gaze_state messages; configure input=frames first"));
      return;
    }
    if (!model_) {
      out.push_back(error_message("no_model", "no model weights loaded; frames cannot be classified"));
      return;
    }
    if (!msg.contains("png_base64") || !msg.at("png_base64").is_string()) {
      out.push_back(error_message("bad_frame", "frame needs a png_base64 string"));
      return;
    }
    EyeStrip strip;
    try {
      strip = decode_png(base64_decode(msg.at("png_base64").get<std::string>()));
    } catch (const std::exception& e) {
      out.push_back(error_message("bad_frame", e.what()));
      return;
    }
    if (strip.height() != model_->config.height || strip.width() != model_->config.width) {
      out.push_back(error_message("bad_dimensions", "frame is " + std::to_string(strip.height()) + "x" +
                                                        std::to_string(strip.width()) + ", model expects " +
                                                        std::to_string(model_->config.height) + "x" +
                                                        std::to_string(model_->config.width)));
      return;
    }
    observe(estimator::argmax_state(estimator::predict(*model_, strip)), out);
  }

  void handle_configure(const Json& msg, std::vector<Json>& out) {
    SessionConfig next = config_;
    try {
      if (msg.contains("capacity")) next.capacity = msg.at("capacity").get<std::size_t>();
      if (msg.contains("fps")) next.fps = msg.at("fps").get<double>();
      if (msg.contains("feedback")) next.feedback = parse_feedback_mode(msg.at("feedback").get<std::string>());
      if (msg.contains("input")) next.input = parse_input_mode(msg.at("input").get<std::string>());
      next.validate();
    } catch (const std::exception& e) {
      out.push_back(error_message("bad_config", e.what()));
      return;
    }
    if (next.capacity != config_.capacity) window_ = filter::FilterWindow(next.capacity);
    config_ = next;
    out.push_back(ui_state());
  }

  void observe(std::optional<EyeState> raw, std::vector<Json>& out) {
    const std::size_t frame = frame_++;
    if (!raw) return;
    const auto before = engine_.state();
    const auto filtered = window_.push(raw);
    const auto events = engine_.on_state(filtered);
    for (const auto& e : events) out.push_back(feedback_message(e));
    const auto& after = engine_.state();
    if (after.mode != before.mode || after.highlight != before.highlight || after.text != before.text) {
      out.push_back(ui_state());
    }
    if (log_) {
      try {
        log_->record(frame, *raw, filtered, events);
      } catch (const std::exception& e) {
        log_.reset();
        log_error_ = e.what();
      }
    }
    flush_log_error(out);
  }

  Json feedback_message(const t9::FeedbackEvent& e) const {
    Json payload = t9::event_payload(e);
    if (const auto* d = std::get_if<t9::DirectionChanged>(&e); d && config_.feedback == FeedbackMode::kScreen) {
      payload["highlight"] = d->direction;
    }
    return {{"type", "feedback"}, {"kind", t9::event_kind(e)}, {"payload", payload}};
  }

  void open_log() {
    log_.reset();
    if (config_.log_dir.empty()) return;
    try {
      std::filesystem::create_directories(config_.log_dir);
      const auto path = config_.log_dir / ("session-" + id_ + "-" + std::to_string(log_count_++) + ".jsonl");
      log_ = std::make_unique<SessionLog>(
          path, Json{{"session", id_},
                     {"fps", config_.fps},
                     {"capacity", config_.capacity},
                     {"input", to_string(config_.input)},
                     {"feedback", to_string(config_.feedback)}});
    } catch (const std::exception& e) {
      log_.reset();
      log_error_ = e.what();
    }
  }

  void flush_log_error(std::vector<Json>& out) {
    if (log_error_.empty()) return;
    out.push_back(error_message("log_io", "session logging disabled: " + log_error_));
    log_error_.clear();
  }

  mutable std::mutex mu_;
  SessionConfig config_;
  std::shared_ptr<const Model> model_;
  std::string id_;
  filter::FilterWindow window_;
  t9::Engine engine_;
  std::size_t frame_ = 0;
  std::unique_ptr<SessionLog> log_;
  std::size_t log_count_ = 0;
  std::string log_error_;
};

}  // namespace gaze9::service
