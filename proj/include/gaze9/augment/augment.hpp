#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gaze9/augment/color.hpp"
#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/image/eye_strip.hpp"
#include "gaze9/synth/dataset.hpp"

namespace gaze9::augment {

struct HsvAmplitudes {
  double hue_degrees = 10.0;
  double saturation = 0.1;
  double value = 0.1;
};

struct HsvShift {
  double hue_degrees = 0;
  double saturation = 0;
  double value = 0;
};

struct AugmentConfig {
  double flip_probability = 0.5;
  HsvAmplitudes hsv{};
  std::vector<double> rotation_degrees{2.5, -2.5};
  std::vector<double> scale_factors{1.2, 1.5};
  int shift_pixels = 5;
  /// Offline rotation/scale/shift expansion of the training set.
  bool geometric = true;

  /// No flip, no colour jitter, no geometric expansion.
  static AugmentConfig none() {
    AugmentConfig c;
    c.flip_probability = 0.0;
    c.hsv = {0, 0, 0};
    c.geometric = false;
    return c;
  }

  void validate() const {
    if (flip_probability < 0 || flip_probability > 1) throw std::invalid_argument("flip_probability must be in [0, 1]");
    for (double s : scale_factors)
      if (s < 1.0) throw std::invalid_argument("scale factors must be >= 1");
    if (shift_pixels < 1) throw std::invalid_argument("shift magnitude must be >= 1 pixel");
    if (hsv.hue_degrees < 0 || hsv.saturation < 0 || hsv.value < 0) {
      throw std::invalid_argument("hsv amplitudes must be non-negative");
    }
  }

  std::size_t expansion_count() const { return rotation_degrees.size() + scale_factors.size() + 8; }
};

/// Mirrors about the vertical axis and swaps the horizontal component of
/// the label (1<->3, 4<->6, 7<->9).
inline std::pair<EyeStrip, EyeState> hflip_with_label_swap(const EyeStrip& strip, EyeState label) {
  EyeStrip out(strip.height(), strip.width());
  const int w = strip.width();
  for (int y = 0; y < strip.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < EyeStrip::kChannels; ++c) out.at(y, w - 1 - x, c) = strip.at(y, x, c);
  return {std::move(out), label.mirrored()};
}

/// Applies one HSV offset to every pixel: hue wraps, s and v clamp.
inline EyeStrip apply_hsv_shift(const EyeStrip& strip, const HsvShift& shift) {
  EyeStrip out = strip;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    HsvPixel hsv = rgb_to_hsv({px[i], px[i + 1], px[i + 2]});
    hsv.h = std::fmod(hsv.h + shift.hue_degrees, 360.0);
    if (hsv.h < 0) hsv.h += 360.0;
    hsv.s = std::clamp(hsv.s + shift.saturation, 0.0, 1.0);
    hsv.v = std::clamp(hsv.v + shift.value, 0.0, 1.0);
    const RgbPixel rgb = hsv_to_rgb(hsv);
    px[i] = static_cast<float>(rgb.r);
    px[i + 1] = static_cast<float>(rgb.g);
    px[i + 2] = static_cast<float>(rgb.b);
  }
  out.clamp_values();
  return out;
}

/// Samples one (dh, ds, dv) uniformly within the amplitudes and applies it.
inline EyeStrip hsv_jitter(const EyeStrip& strip, const HsvAmplitudes& amp, std::uint64_t seed) {
  if (amp.hue_degrees == 0 && amp.saturation == 0 && amp.value == 0) return strip;
  Rng rng(seed);
  const HsvShift shift{rng.uniform(-amp.hue_degrees, amp.hue_degrees), rng.uniform(-amp.saturation, amp.saturation),
                       rng.uniform(-amp.value, amp.value)};
  return apply_hsv_shift(strip, shift);
}

namespace detail {

// Bilinear sample with replicated border; (sx, sy) in pixel-index coordinates.
inline float bilinear(const EyeStrip& s, double sx, double sy, int c) {
  const double fx = std::floor(sx), fy = std::floor(sy);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double ax = sx - fx, ay = sy - fy;
  const double top = s.clamped(y0, x0, c) * (1 - ax) + s.clamped(y0, x0 + 1, c) * ax;
  const double bot = s.clamped(y0 + 1, x0, c) * (1 - ax) + s.clamped(y0 + 1, x0 + 1, c) * ax;
  return static_cast<float>(top * (1 - ay) + bot * ay);
}

// out(x, y) = in(map(x, y)), with map returning source pixel-index coordinates.
template <class Map>
EyeStrip resample(const EyeStrip& in, Map&& map) {
  EyeStrip out(in.height(), in.width());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      const auto [sx, sy] = map(x, y);
      for (int c = 0; c < EyeStrip::kChannels; ++c) out.at(y, x, c) = bilinear(in, sx, sy, c);
    }
  return out;
}

}  // namespace detail

/// Rotation about the strip centre; positive angles turn content clockwise
/// on screen (y grows downwards).
inline EyeStrip rotate(const EyeStrip& in, double degrees) {
  const double th = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(th), sn = std::sin(th);
  const double cx = in.width() / 2.0, cy = in.height() / 2.0;
  return detail::resample(in, [&](int x, int y) {
    const double px = x + 0.5 - cx, py = y + 0.5 - cy;
    return std::pair{cs * px + sn * py + cx - 0.5, -sn * px + cs * py + cy - 0.5};
  });
}

/// Upscales about the centre by `factor` and crops back to the same size.
inline EyeStrip scale_center_crop(const EyeStrip& in, double factor) {
  const double cx = in.width() / 2.0, cy = in.height() / 2.0;
  return detail::resample(in, [&](int x, int y) {
    return std::pair{(x + 0.5 - cx) / factor + cx - 0.5, (y + 0.5 - cy) / factor + cy - 0.5};
  });
}

/// Moves content by (dx, dy) pixels; uncovered pixels replicate the border.
inline EyeStrip shift(const EyeStrip& in, int dx, int dy) {
  EyeStrip out(in.height(), in.width());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      for (int c = 0; c < EyeStrip::kChannels; ++c) out.at(y, x, c) = in.clamped(y - dy, x - dx, c);
  return out;
}

/// The eight compass directions, clockwise from north, in image coordinates.
inline constexpr std::array<std::pair<int, int>, 8> kCompass = {
    std::pair{0, -1}, std::pair{1, -1}, std::pair{1, 0}, std::pair{1, 1},
    std::pair{0, 1},  std::pair{-1, 1}, std::pair{-1, 0}, std::pair{-1, -1}};

/// Variant `index` of the offline expansion: rotations first, then scales,
/// then the eight shifts. Index must be < expansion_count().
inline EyeStrip geometric_variant(const EyeStrip& strip, const AugmentConfig& config, std::size_t index) {
  if (index < config.rotation_degrees.size()) return rotate(strip, config.rotation_degrees[index]);
  index -= config.rotation_degrees.size();
  if (index < config.scale_factors.size()) return scale_center_crop(strip, config.scale_factors[index]);
  index -= config.scale_factors.size();
  if (index < kCompass.size()) {
    const auto [ux, uy] = kCompass[index];
    return shift(strip, ux * config.shift_pixels, uy * config.shift_pixels);
  }
  throw std::out_of_range("geometric variant index out of range");
}

/// All |rotations| + |scales| + 8 variants, each keeping the input label.
inline std::vector<std::pair<EyeStrip, EyeState>> geometric_expand(const EyeStrip& strip, EyeState label,
                                                                   const AugmentConfig& config) {
  std::vector<std::pair<EyeStrip, EyeState>> out;
  out.reserve(config.expansion_count());
  for (std::size_t i = 0; i < config.expansion_count(); ++i) out.emplace_back(geometric_variant(strip, config, i), label);
  return out;
}

/// Epoch-wise training stream. The geometric expansion is enumerated as an
/// index set (sample, variant) and materialized lazily; flip and HSV jitter
/// are applied on the fly. Identical seeds give identical sequences.
class TrainingStream {
 public:
  TrainingStream(const std::vector<synth::LabeledStrip>& samples, AugmentConfig config, std::uint64_t seed,
                 std::size_t samples_per_epoch = 0)
      : samples_(&samples), config_(std::move(config)), seed_(seed), per_epoch_(samples_per_epoch) {
    config_.validate();
  }

  /// Reshuffles for `epoch` and rewinds. Returns the number of samples the
  /// epoch will emit.
  std::size_t begin_epoch(std::size_t epoch) {
    epoch_ = epoch;
    cursor_ = 0;
    const std::size_t variants = config_.geometric ? 1 + config_.expansion_count() : 1;
    order_.clear();
    order_.reserve(samples_->size() * variants);
    for (std::size_t s = 0; s < samples_->size(); ++s)
      for (std::size_t v = 0; v < variants; ++v) order_.emplace_back(s, v);
    Rng rng(derive_seed(seed_, {0x5E0, epoch}));
    rng.shuffle(order_.begin(), order_.end());
    if (per_epoch_ > 0 && per_epoch_ < order_.size()) order_.resize(per_epoch_);
    return order_.size();
  }

  std::optional<synth::LabeledStrip> next() {
    if (cursor_ >= order_.size()) return std::nullopt;
    const auto [s, v] = order_[cursor_];
    const std::uint64_t item_seed = derive_seed(seed_, {epoch_, cursor_});
    ++cursor_;
    const auto& src = (*samples_)[s];
    synth::LabeledStrip item{v == 0 ? src.strip : geometric_variant(src.strip, config_, v - 1), src.label};
    Rng rng(item_seed);
    if (config_.flip_probability > 0 && rng.bernoulli(config_.flip_probability)) {
      auto [img, lab] = hflip_with_label_swap(item.strip, item.label);
      item.strip = std::move(img);
      item.label = lab;
    }
    item.strip = hsv_jitter(item.strip, config_.hsv, rng.next());
    return item;
  }

  const AugmentConfig& config() const noexcept { return config_; }

 private:
  const std::vector<synth::LabeledStrip>* samples_;
  AugmentConfig config_;
  std::uint64_t seed_;
  std::size_t per_epoch_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> order_;
};

}  // namespace gaze9::augment
