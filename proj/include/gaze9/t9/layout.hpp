#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace gaze9::t9 {

struct CommitChar {
  char c;
  friend bool operator==(const CommitChar&, const CommitChar&) = default;
};
struct Digit {
  int d;
  friend bool operator==(const Digit&, const Digit&) = default;
};
struct Back {
  friend bool operator==(const Back&, const Back&) = default;
};
struct Space {
  friend bool operator==(const Space&, const Space&) = default;
};
struct Backspace {
  friend bool operator==(const Backspace&, const Backspace&) = default;
};
struct Noop {
  friend bool operator==(const Noop&, const Noop&) = default;
};

using Action = std::variant<Noop, CommitChar, Digit, Back, Space, Backspace>;

/// Text shown or spoken for an action.
inline std::string action_label(const Action& a) {
  struct V {
    std::string operator()(Noop) const { return ""; }
    std::string operator()(CommitChar c) const { return std::string(1, c.c); }
    std::string operator()(Digit d) const { return std::to_string(d.d); }
    std::string operator()(Back) const { return "back"; }
    std::string operator()(Space) const { return "space"; }
    std::string operator()(Backspace) const { return "backspace"; }
  };
  return std::visit(V{}, a);
}

/// Button labels of the main interface and, per button, the action placed
/// at each of the nine directions of its secondary interface. Buttons and
/// directions are numbered 1..9 like a phone keypad.
struct Layout {
  std::array<std::string, 10> main;                 // index 0 unused
  std::array<std::array<Action, 10>, 10> secondary{};  // [button][direction], index 0 unused

  const std::string& main_label(int button) const {
    check(button, "button");
    return main[static_cast<std::size_t>(button)];
  }
  const Action& action(int button, int direction) const {
    check(button, "button");
    check(direction, "direction");
    return secondary[static_cast<std::size_t>(button)][static_cast<std::size_t>(direction)];
  }

 private:
  static void check(int v, const char* what) {
    if (v < 1 || v > 9) throw std::out_of_range(std::string(what) + " must be 1-9, got " + std::to_string(v));
  }
};

/// Letters abc..wxyz on buttons 2-9. A letter button's secondary interface
/// has its letters at directions 4, 5, 6 (and 7), its digit at 8 and Back
/// at 2. Button 1 carries Space at 4, Backspace at 6, digit 1 at 8 and
/// Back at 2.
inline Layout default_layout() {
  static constexpr const char* kGroups[10] = {"", "", "abc", "def", "ghi", "jkl", "mno", "pqrs", "tuv", "wxyz"};
  static constexpr int kLetterDirections[4] = {4, 5, 6, 7};
  Layout l;
  l.main[1] = "space del";
  l.secondary[1][4] = Space{};
  l.secondary[1][6] = Backspace{};
  l.secondary[1][8] = Digit{1};
  l.secondary[1][2] = Back{};
  for (int b = 2; b <= 9; ++b) {
    const std::string group = kGroups[b];
    l.main[static_cast<std::size_t>(b)] = group;
    for (std::size_t i = 0; i < group.size(); ++i) l.secondary[static_cast<std::size_t>(b)][kLetterDirections[i]] = CommitChar{group[i]};
    l.secondary[static_cast<std::size_t>(b)][8] = Digit{b};
    l.secondary[static_cast<std::size_t>(b)][2] = Back{};
  }
  return l;
}

/// Button and direction that commit `c` in the default layout.
struct KeyPath {
  int button;
  int direction;
};

inline KeyPath path_for(const Layout& layout, char c) {
  for (int b = 1; b <= 9; ++b)
    for (int d = 1; d <= 9; ++d) {
      const Action& a = layout.action(b, d);
      if ((c == ' ' && std::holds_alternative<Space>(a)) ||
          (std::holds_alternative<CommitChar>(a) && std::get<CommitChar>(a).c == c) ||
          (c >= '0' && c <= '9' && std::holds_alternative<Digit>(a) && std::get<Digit>(a).d == c - '0')) {
        return {b, d};
      }
    }
  throw std::invalid_argument(std::string("character '") + c + "' is not on the keyboard");
}

}  // namespace gaze9::t9
