#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaze9 {

/// RGB eye crop, row-major H x W x 3, channel values in [0, 1].
/// 32 x 128 holds both eyes, 32 x 64 a single eye.
class EyeStrip {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kHeight = 32;
  static constexpr int kDoubleEyeWidth = 128;
  static constexpr int kSingleEyeWidth = 64;

  EyeStrip() = default;
  EyeStrip(int height, int width, float fill = 0.0f)
      : height_(height), width_(width), pixels_(static_cast<std::size_t>(height) * width * kChannels, fill) {
    if (height <= 0 || width <= 0) throw std::invalid_argument("eye strip dimensions must be positive");
  }
  EyeStrip(int height, int width, std::vector<float> pixels) : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(height) * width * kChannels) {
      throw std::invalid_argument("eye strip pixel buffer does not match " + std::to_string(height) + "x" +
                                  std::to_string(width));
    }
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  float& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

  /// Coordinates clamped to the image, i.e. replicated border.
  float clamped(int y, int x, int c) const {
    return at(std::clamp(y, 0, height_ - 1), std::clamp(x, 0, width_ - 1), c);
  }

  std::span<float> pixels() noexcept { return pixels_; }
  std::span<const float> pixels() const noexcept { return pixels_; }

  void clamp_values() {
    for (auto& v : pixels_) v = std::clamp(v, 0.0f, 1.0f);
  }

  friend bool operator==(const EyeStrip&, const EyeStrip&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> pixels_;
};

}  // namespace gaze9
