#pragma once

#include <algorithm>
#include <cmath>

namespace gaze9::augment {

struct RgbPixel {
  double r = 0, g = 0, b = 0;
};

/// h in degrees [0, 360), s and v in [0, 1]. Grey pixels take h = 0.
struct HsvPixel {
  double h = 0, s = 0, v = 0;
};

inline HsvPixel rgb_to_hsv(const RgbPixel& p) {
  const double mx = std::max({p.r, p.g, p.b});
  const double mn = std::min({p.r, p.g, p.b});
  const double chroma = mx - mn;
  HsvPixel out{0.0, mx > 0 ? chroma / mx : 0.0, mx};
  if (chroma > 0) {
    double h;
    if (mx == p.r) {
      h = std::fmod((p.g - p.b) / chroma, 6.0);
    } else if (mx == p.g) {
      h = (p.b - p.r) / chroma + 2.0;
    } else {
      h = (p.r - p.g) / chroma + 4.0;
    }
    h *= 60.0;
    if (h < 0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
  }
  return out;
}

inline RgbPixel hsv_to_rgb(const HsvPixel& p) {
  const double chroma = p.v * p.s;
  double hp = std::fmod(p.h, 360.0);
  if (hp < 0) hp += 360.0;
  hp /= 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = p.v - chroma;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  return {r + m, g + m, b + m};
}

}  // namespace gaze9::augment
