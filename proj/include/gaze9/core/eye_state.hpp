#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gaze9 {

/// One of the ten eye states: 0 = closed, 1..9 = gaze directions laid out
/// like a phone keypad (1 left-up ... 9 right-down).
class EyeState {
 public:
  static constexpr int kCount = 10;

  constexpr EyeState() = default;

  constexpr explicit EyeState(int code) : code_(static_cast<std::uint8_t>(code)) {
    if (code < 0 || code >= kCount) throw std::out_of_range("eye state code out of range: " + std::to_string(code));
  }

  static constexpr EyeState closed() { return EyeState(0); }
  static constexpr std::optional<EyeState> from_code(int code) {
    if (code < 0 || code >= kCount) return std::nullopt;
    return EyeState(code);
  }

  constexpr int code() const noexcept { return code_; }
  constexpr bool is_closed() const noexcept { return code_ == 0; }

  /// Horizontal unit component: -1 left, 0 centre, +1 right. Zero for closed.
  constexpr int dx() const noexcept { return is_closed() ? 0 : (code_ - 1) % 3 - 1; }
  /// Vertical unit component in image coordinates: -1 up, +1 down.
  constexpr int dy() const noexcept { return is_closed() ? 0 : (code_ - 1) / 3 - 1; }

  /// Horizontal mirror: swaps 1<->3, 4<->6, 7<->9; fixes 0, 2, 5, 8.
  constexpr EyeState mirrored() const noexcept {
    if (is_closed()) return *this;
    const int row = (code_ - 1) / 3;
    const int col = (code_ - 1) % 3;
    EyeState m;
    m.code_ = static_cast<std::uint8_t>(row * 3 + (2 - col) + 1);
    return m;
  }

  std::string_view name() const noexcept {
    static constexpr std::array<std::string_view, kCount> kNames = {
        "closed", "left-up", "up", "right-up", "left", "middle", "right", "left-down", "down", "right-down"};
    return kNames[code_];
  }

  friend constexpr auto operator<=>(EyeState, EyeState) = default;

 private:
  std::uint8_t code_ = 5;
};

namespace states {
inline constexpr EyeState kClosed{0};
inline constexpr EyeState kLeftUp{1};
inline constexpr EyeState kUp{2};
inline constexpr EyeState kRightUp{3};
inline constexpr EyeState kLeft{4};
inline constexpr EyeState kMiddle{5};
inline constexpr EyeState kRight{6};
inline constexpr EyeState kLeftDown{7};
inline constexpr EyeState kDown{8};
inline constexpr EyeState kRightDown{9};
}  // namespace states

}  // namespace gaze9
