#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/t9/layout.hpp"

namespace gaze9::t9 {

/// Main interface (button == 0) or the secondary interface of a button.
struct Mode {
  int button = 0;

  static Mode main() { return {}; }
  static Mode secondary(int b) { return {b}; }
  bool is_main() const { return button == 0; }

  std::string to_string() const { return is_main() ? "main" : "secondary(" + std::to_string(button) + ")"; }
  friend bool operator==(const Mode&, const Mode&) = default;
};

struct DirectionChanged {
  int direction;
  std::string label;
  friend bool operator==(const DirectionChanged&, const DirectionChanged&) = default;
};
struct SelectionClick {
  friend bool operator==(const SelectionClick&, const SelectionClick&) = default;
};
struct CharCommitted {
  char c;
  friend bool operator==(const CharCommitted&, const CharCommitted&) = default;
};
struct CharDeleted {
  char c;
  friend bool operator==(const CharDeleted&, const CharDeleted&) = default;
};
struct ModeChanged {
  Mode mode;
  friend bool operator==(const ModeChanged&, const ModeChanged&) = default;
};

using FeedbackEvent = std::variant<DirectionChanged, SelectionClick, CharCommitted, CharDeleted, ModeChanged>;

inline std::string event_kind(const FeedbackEvent& e) {
  static constexpr const char* kNames[] = {"DirectionChanged", "SelectionClick", "CharCommitted", "CharDeleted",
                                           "ModeChanged"};
  return kNames[e.index()];
}

inline nlohmann::json mode_to_json(const Mode& m) {
  if (m.is_main()) return {{"kind", "main"}};
  return {{"kind", "secondary"}, {"button", m.button}};
}

/// Event payload without the kind tag.
inline nlohmann::json event_payload(const FeedbackEvent& e) {
  struct V {
    nlohmann::json operator()(const DirectionChanged& d) const { return {{"direction", d.direction}, {"label", d.label}}; }
    nlohmann::json operator()(const SelectionClick&) const { return nlohmann::json::object(); }
    nlohmann::json operator()(const CharCommitted& c) const { return {{"char", std::string(1, c.c)}}; }
    nlohmann::json operator()(const CharDeleted& c) const { return {{"char", std::string(1, c.c)}}; }
    nlohmann::json operator()(const ModeChanged& m) const { return {{"mode", mode_to_json(m.mode)}}; }
  };
  return std::visit(V{}, e);
}

inline nlohmann::json event_to_json(const FeedbackEvent& e) {
  return {{"kind", event_kind(e)}, {"payload", event_payload(e)}};
}

struct KeyboardState {
  Mode mode;
  std::optional<int> highlight;
  std::optional<int> last_stable_direction;
  std::string text;
  bool closed_latch = false;

  friend bool operator==(const KeyboardState&, const KeyboardState&) = default;
};

/// Two-level keyboard driven by the filtered eye state of each frame.
///
/// Looking at a direction highlights it. The first filtered closed frame
/// after the eyes were open is a selection: on the main interface it opens
/// the highlighted button, on a secondary interface it runs the action at
/// the highlighted direction. Further closed frames of the same closure do
/// nothing.
class Engine {
 public:
  explicit Engine(Layout layout = default_layout()) : layout_(std::move(layout)) {}

  const KeyboardState& state() const noexcept { return state_; }
  const Layout& layout() const noexcept { return layout_; }
  void reset() { state_ = {}; }

  std::vector<FeedbackEvent> on_state(std::optional<EyeState> filtered) {
    std::vector<FeedbackEvent> events;
    if (!filtered) return events;
    if (!filtered->is_closed()) {
      state_.closed_latch = false;
      const int dir = filtered->code();
      state_.last_stable_direction = dir;
      if (state_.highlight != dir) {
        state_.highlight = dir;
        events.push_back(DirectionChanged{dir, spoken_label(dir)});
      }
      return events;
    }
    if (state_.closed_latch) return events;
    state_.closed_latch = true;
    if (!state_.last_stable_direction) return events;

    events.push_back(SelectionClick{});
    const int dir = *state_.last_stable_direction;
    if (state_.mode.is_main()) {
      state_.mode = Mode::secondary(dir);
      events.push_back(ModeChanged{state_.mode});
      return events;
    }
    const Action& a = layout_.action(state_.mode.button, dir);
    bool leave = true;
    if (const auto* c = std::get_if<CommitChar>(&a)) {
      commit(c->c, events);
    } else if (const auto* d = std::get_if<Digit>(&a)) {
      commit(static_cast<char>('0' + d->d), events);
    } else if (std::holds_alternative<Space>(a)) {
      commit(' ', events);
    } else if (std::holds_alternative<Backspace>(a)) {
      if (!state_.text.empty()) {
        const char removed = state_.text.back();
        state_.text.pop_back();
        events.push_back(CharDeleted{removed});
      }
    } else if (std::holds_alternative<Noop>(a)) {
      leave = false;
    }
    if (leave) {
      state_.mode = Mode::main();
      events.push_back(ModeChanged{state_.mode});
    }
    return events;
  }

  /// Label read out for a direction in the current mode.
  std::string spoken_label(int direction) const {
    if (state_.mode.is_main()) return std::to_string(direction) + " " + layout_.main_label(direction);
    return action_label(layout_.action(state_.mode.button, direction));
  }

 private:
  void commit(char c, std::vector<FeedbackEvent>& events) {
    state_.text.push_back(c);
    events.push_back(CharCommitted{c});
  }

  Layout layout_;
  KeyboardState state_;
};

struct TypingResult {
  std::string text;
  std::vector<FeedbackEvent> events;
};

inline TypingResult type_script_detailed(const std::vector<std::optional<EyeState>>& filtered,
                                         const Layout& layout = default_layout()) {
  Engine engine(layout);
  TypingResult r;
  for (const auto& f : filtered) {
    auto ev = engine.on_state(f);
    r.events.insert(r.events.end(), ev.begin(), ev.end());
  }
  r.text = engine.state().text;
  return r;
}

inline std::string type_script(const std::vector<std::optional<EyeState>>& filtered,
                               const Layout& layout = default_layout()) {
  return type_script_detailed(filtered, layout).text;
}

/// Per-frame gaze stream that types `text`: for each character, look at
/// its button, close, look at its direction, close; every step lasts
/// `hold` frames.
inline std::vector<EyeState> gaze_stream_for(const std::string& text, int hold, const Layout& layout = default_layout()) {
  if (hold < 1) throw std::invalid_argument("hold must be >= 1 frame");
  std::vector<EyeState> out;
  auto add = [&](int code) { out.insert(out.end(), static_cast<std::size_t>(hold), EyeState(code)); };
  for (char c : text) {
    const KeyPath p = path_for(layout, c);
    add(p.button);
    add(0);
    add(p.direction);
    add(0);
  }
  return out;
}

/// Filtered-stream replay CSV: header "frame,state", one row per frame; an
/// empty state is an absent observation.
inline void write_replay_csv(std::ostream& os, const std::vector<std::optional<EyeState>>& stream) {
  os << "frame,state\n";
  for (std::size_t i = 0; i < stream.size(); ++i) {
    os << i << ',';
    if (stream[i]) os << stream[i]->code();
    os << '\n';
  }
}

/// Reads a replay CSV. A malformed final line without a newline is taken
/// as a truncated write and dropped.
inline std::vector<std::optional<EyeState>> read_replay_csv(std::istream& is) {
  std::vector<std::optional<EyeState>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const bool complete = !is.eof();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("frame", 0) == 0)) continue;
    const auto comma = line.find(',');
    std::optional<EyeState> state;
    bool ok = comma != std::string::npos;
    if (ok) {
      const std::string field = line.substr(comma + 1);
      if (!field.empty()) {
        ok = field.size() == 1 && field[0] >= '0' && field[0] <= '9';
        if (ok) state = EyeState(field[0] - '0');
      }
    }
    if (!ok) {
      if (!complete) break;
      throw std::invalid_argument("replay line " + std::to_string(lineno) + " is malformed: " + line);
    }
    out.push_back(state);
  }
  return out;
}

}  // namespace gaze9::t9
