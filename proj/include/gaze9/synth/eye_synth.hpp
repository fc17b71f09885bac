#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/image/eye_strip.hpp"

namespace gaze9::synth {

struct Rgb {
  float r = 0, g = 0, b = 0;
  float max_channel() const { return std::max({r, g, b}); }
};

inline Rgb lerp(const Rgb& a, const Rgb& b, float t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

struct Range {
  double lo = 0;
  double hi = 0;
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

/// A pixel whose brightest channel is below this is pupil-coloured. The
/// renderer guarantees no other element can fall below it.
inline constexpr float kPupilThreshold = 0.16f;

/// Appearance and geometry ranges for the procedural eye renderer. All
/// lengths are in pixels of a 32 x 64 single-eye cell.
struct SynthParams {
  Rgb skin_light{0.93f, 0.78f, 0.67f};
  Rgb skin_dark{0.50f, 0.34f, 0.25f};
  Range skin_tone{0.0, 0.5};  // lerp fraction light -> dark
  Rgb sclera{0.94f, 0.93f, 0.90f};
  std::vector<Rgb> iris_palette{{0.46f, 0.29f, 0.16f}, {0.52f, 0.42f, 0.22f}, {0.32f, 0.46f, 0.66f},
                                {0.33f, 0.50f, 0.33f}, {0.40f, 0.25f, 0.14f}};
  Rgb pupil{0.05f, 0.04f, 0.04f};
  Range iris_radius{5.0, 6.2};
  double pupil_ratio = 0.45;
  Range eye_half_width{18.0, 21.0};
  Range eye_half_height{9.0, 11.0};
  Range offset_x{7.0, 9.0};
  Range offset_y{2.0, 3.0};
  double center_jitter = 1.0;    // crop misalignment, px
  Range roll_degrees{-1.0, 1.0}; // head roll moving the two eyes vertically
  Range illumination{0.85, 1.15};
  double color_jitter = 0.03;    // per-image per-channel additive
  double pixel_noise = 0.02;     // per-pixel uniform amplitude
  double lid_thickness = 1.6;
  double asynchrony_probability = 0.1;
  double asynchrony_step = 1.0;  // px change of one eye's horizontal offset

  /// Throws std::invalid_argument when a range is degenerate or the pupil
  /// could leave the eye ellipse or be confused with other elements.
  void validate() const {
    auto check_range = [](const Range& r, const char* name) {
      if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
        throw std::invalid_argument(std::string("synth range ") + name + " is degenerate");
      }
    };
    check_range(skin_tone, "skin_tone");
    check_range(iris_radius, "iris_radius");
    check_range(eye_half_width, "eye_half_width");
    check_range(eye_half_height, "eye_half_height");
    check_range(offset_x, "offset_x");
    check_range(offset_y, "offset_y");
    check_range(roll_degrees, "roll_degrees");
    check_range(illumination, "illumination");
    if (skin_tone.lo < 0 || skin_tone.hi > 1) throw std::invalid_argument("skin_tone must lie in [0, 1]");
    if (iris_palette.empty()) throw std::invalid_argument("iris palette is empty");
    if (iris_radius.lo <= 0 || eye_half_height.lo <= 0 || illumination.lo <= 0) {
      throw std::invalid_argument("radii and illumination must be positive");
    }
    if (pupil_ratio <= 0 || pupil_ratio >= 1) throw std::invalid_argument("pupil_ratio must be in (0, 1)");
    if (asynchrony_probability < 0 || asynchrony_probability > 1) {
      throw std::invalid_argument("asynchrony_probability must be in [0, 1]");
    }

    // Worst case: largest offset and pupil in the smallest ellipse.
    const double pr = iris_radius.hi * pupil_ratio;
    const double ox = offset_x.hi + asynchrony_step + pr;
    const double oy = offset_y.hi + pr;
    const double q = (ox / eye_half_width.lo) * (ox / eye_half_width.lo) + (oy / eye_half_height.lo) * (oy / eye_half_height.lo);
    if (q > 1.0) throw std::invalid_argument("pupil offsets can leave the eye ellipse (q = " + std::to_string(q) + ")");
    if (offset_x.lo - asynchrony_step < 1.0 || offset_y.lo < 1.0) {
      throw std::invalid_argument("pupil offsets must be at least one pixel");
    }
    const double max_roll = std::max(std::abs(roll_degrees.lo), std::abs(roll_degrees.hi));
    const double roll_shift = std::sin(max_roll * std::numbers::pi / 180.0) * 32.0;
    if (eye_half_width.hi + center_jitter > 32.0 ||
        offset_y.hi + pr + center_jitter + roll_shift > 15.0) {
      throw std::invalid_argument("eye does not fit its 32 x 64 cell");
    }

    const double dim = illumination.lo;
    const double spread = color_jitter + pixel_noise;
    double darkest = std::min(lerp(skin_light, skin_dark, static_cast<float>(skin_tone.hi)).max_channel(),
                              sclera.max_channel());
    for (const auto& c : iris_palette) darkest = std::min<double>(darkest, c.max_channel());
    darkest = std::min(darkest, lid_color(lerp(skin_light, skin_dark, static_cast<float>(skin_tone.hi))).max_channel() * 1.0);
    if (darkest * dim - spread <= kPupilThreshold) {
      throw std::invalid_argument("non-pupil colours can fall below the pupil threshold");
    }
    if (pupil.max_channel() * illumination.hi + pixel_noise >= kPupilThreshold) {
      throw std::invalid_argument("pupil colour can rise above the pupil threshold");
    }
  }

  static Rgb lid_color(const Rgb& skin) { return {skin.r * 0.72f, skin.g * 0.62f, skin.b * 0.60f}; }
};

/// Parameters for emulating users absent from training: darker skin,
/// larger irises and eyes, dimmer light, and looser crops.
inline SynthParams unknown_user_params() {
  SynthParams p;
  p.skin_tone = {0.55, 1.0};
  p.iris_radius = {6.3, 7.0};
  p.eye_half_width = {20.0, 23.0};
  p.eye_half_height = {10.0, 11.5};
  p.offset_x = {8.0, 10.0};
  p.offset_y = {2.2, 3.2};
  p.center_jitter = 2.5;
  p.roll_degrees = {-2.5, 2.5};
  p.illumination = {0.72, 0.95};
  p.iris_palette = {{0.42f, 0.27f, 0.15f}, {0.36f, 0.40f, 0.55f}, {0.44f, 0.36f, 0.20f}};
  return p;
}

struct EyeGeometry {
  double center_x = 0, center_y = 0;  // ellipse centre in strip pixel coordinates
  double half_width = 0, half_height = 0;
  double pupil_x = 0, pupil_y = 0;
  double iris_radius = 0, pupil_radius = 0;
};

struct RenderedStrip {
  EyeStrip strip;
  std::vector<EyeGeometry> eyes;  // left to right
};

namespace detail {

inline RenderedStrip render(EyeState state, const SynthParams& params, std::uint64_t seed, int width) {
  if (width != EyeStrip::kDoubleEyeWidth && width != EyeStrip::kSingleEyeWidth) {
    throw std::invalid_argument("eye strip width must be 64 or 128");
  }
  constexpr int kCell = EyeStrip::kSingleEyeWidth;
  const int height = EyeStrip::kHeight;
  const int n_eyes = width / kCell;
  Rng rng(seed);

  const double illum = params.illumination.sample(rng);
  auto jitter = [&](Rgb c) {
    const double j = params.color_jitter;
    c.r = static_cast<float>((c.r + rng.uniform(-j, j)) * illum);
    c.g = static_cast<float>((c.g + rng.uniform(-j, j)) * illum);
    c.b = static_cast<float>((c.b + rng.uniform(-j, j)) * illum);
    return c;
  };
  const Rgb skin_base = lerp(params.skin_light, params.skin_dark, static_cast<float>(params.skin_tone.sample(rng)));
  const Rgb skin = jitter(skin_base);
  const Rgb lid = jitter(SynthParams::lid_color(skin_base));
  const Rgb sclera = jitter(params.sclera);
  const Rgb iris = jitter(params.iris_palette[static_cast<std::size_t>(rng.next() % params.iris_palette.size())]);
  const Rgb pupil{params.pupil.r * static_cast<float>(illum), params.pupil.g * static_cast<float>(illum),
                  params.pupil.b * static_cast<float>(illum)};

  const double a = params.eye_half_width.sample(rng);
  const double b = params.eye_half_height.sample(rng);
  const double r_iris = params.iris_radius.sample(rng);
  const double r_pupil = r_iris * params.pupil_ratio;
  const double mx = params.offset_x.sample(rng);
  const double my = params.offset_y.sample(rng);
  const double jx = rng.uniform(-params.center_jitter, params.center_jitter);
  const double jy = rng.uniform(-params.center_jitter, params.center_jitter);
  const double roll = params.roll_degrees.sample(rng) * std::numbers::pi / 180.0;
  const bool async = rng.bernoulli(params.asynchrony_probability);
  const int async_eye = static_cast<int>(rng.next() % 2);
  const double async_delta = rng.bernoulli(0.5) ? params.asynchrony_step : -params.asynchrony_step;

  RenderedStrip out{EyeStrip(height, width), {}};
  for (int e = 0; e < n_eyes; ++e) {
    EyeGeometry g;
    const double cell_cx = e * kCell + kCell / 2.0;
    // Roll moves each eye vertically in proportion to its distance from the strip centre.
    g.center_x = cell_cx + jx;
    g.center_y = height / 2.0 + jy + std::sin(roll) * (cell_cx - width / 2.0);
    g.half_width = a;
    g.half_height = b;
    g.iris_radius = r_iris;
    g.pupil_radius = r_pupil;
    double ex = mx;
    if (async && n_eyes == 2 && e == async_eye) ex += async_delta;
    g.pupil_x = g.center_x + state.dx() * ex;
    g.pupil_y = g.center_y + state.dy() * my;
    out.eyes.push_back(g);
  }

  const double lid_t = params.lid_thickness;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const EyeGeometry& g = out.eyes[static_cast<std::size_t>(std::min(x / kCell, n_eyes - 1))];
      const double ux = (px - g.center_x) / g.half_width;
      const double uy = (py - g.center_y) / g.half_height;
      Rgb c = skin;
      if (state.is_closed()) {
        // Closed lid: a shallow downward arc across the eye width.
        if (std::abs(ux) <= 1.0) {
          const double arc_y = g.center_y + 0.25 * g.half_height * (1.0 - ux * ux);
          if (std::abs(py - arc_y) <= lid_t) c = lid;
        }
      } else {
        const double q = ux * ux + uy * uy;
        if (q <= 1.0) {
          const double d2 = (px - g.pupil_x) * (px - g.pupil_x) + (py - g.pupil_y) * (py - g.pupil_y);
          if (d2 <= r_pupil * r_pupil) {
            c = pupil;
          } else if (d2 <= r_iris * r_iris) {
            c = iris;
          } else {
            c = sclera;
          }
        } else if (uy < 0 && std::abs(ux) <= 1.05) {
          // Upper lid margin just outside the ellipse.
          const double outer = (g.half_height + lid_t) / g.half_height;
          const double uy_l = (py - g.center_y) / (g.half_height * outer);
          if (ux * ux / (outer * outer) + uy_l * uy_l <= 1.0) c = lid;
        }
      }
      out.strip.at(y, x, 0) = c.r;
      out.strip.at(y, x, 1) = c.g;
      out.strip.at(y, x, 2) = c.b;
    }
  }

  if (params.pixel_noise > 0) {
    for (auto& v : out.strip.pixels()) v += static_cast<float>(rng.uniform(-params.pixel_noise, params.pixel_noise));
  }
  out.strip.clamp_values();
  return out;
}

}  // namespace detail

/// Procedural eye-strip renderer. Parameters are validated once, here.
class EyeRenderer {
 public:
  explicit EyeRenderer(SynthParams params) : params_(std::move(params)) { params_.validate(); }

  const SynthParams& params() const noexcept { return params_; }

  /// Width 128 draws two eyes, 64 draws one. Every random draw happens
  /// regardless of state, so states rendered with the same seed share
  /// appearance and geometry.
  RenderedStrip render_with_geometry(EyeState state, std::uint64_t seed, int width = EyeStrip::kDoubleEyeWidth) const {
    return detail::render(state, params_, seed, width);
  }

  EyeStrip render(EyeState state, std::uint64_t seed, int width = EyeStrip::kDoubleEyeWidth) const {
    return detail::render(state, params_, seed, width).strip;
  }

 private:
  SynthParams params_;
};

inline EyeStrip render_eye_strip(EyeState state, const SynthParams& params, std::uint64_t seed,
                                 int width = EyeStrip::kDoubleEyeWidth) {
  return EyeRenderer(params).render(state, seed, width);
}

inline bool is_pupil_pixel(const EyeStrip& s, int y, int x) {
  return std::max({s.at(y, x, 0), s.at(y, x, 1), s.at(y, x, 2)}) < kPupilThreshold;
}

}  // namespace gaze9::synth
