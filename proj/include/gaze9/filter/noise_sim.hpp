#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/filter/gaze_filter.hpp"

namespace gaze9::filter {

struct Segment {
  EyeState state;
  int frames = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct FrameRange {
  int lo = 1;
  int hi = 1;
};

/// Noise model of a scripted gaze stream.
///
/// Blinks overwrite frames inside non-closed segments with the closed
/// state. Saccade bursts are inserted between segments. Misestimations
/// overwrite single frames with a different random state. Blinks and
/// misestimations keep `margin` clean frames from segment edges and from
/// each other.
struct NoiseModel {
  double blink_rate = 0.0;           // blinks per second of fixation
  FrameRange blink_frames{3, 5};
  double saccade_probability = 0.0;  // chance of a burst at each segment change
  FrameRange saccade_frames{1, 4};
  double misestimation_rate = 0.0;   // per frame
  int margin = 9;

  void validate() const {
    if (blink_rate < 0 || saccade_probability < 0 || saccade_probability > 1 || misestimation_rate < 0 ||
        misestimation_rate > 1) {
      throw std::invalid_argument("noise rates out of range");
    }
    if (blink_frames.lo < 1 || blink_frames.lo > blink_frames.hi || saccade_frames.lo < 1 ||
        saccade_frames.lo > saccade_frames.hi) {
      throw std::invalid_argument("noise duration ranges must satisfy 1 <= lo <= hi");
    }
    if (margin < 0) throw std::invalid_argument("noise margin must be >= 0");
  }
};

struct NoiseScript {
  double fps = 29.0;
  std::vector<Segment> segments;
  NoiseModel noise;

  void validate() const {
    if (!(fps > 0)) throw std::invalid_argument("fps must be positive");
    for (const auto& s : segments) {
      if (s.frames <= 0) throw std::invalid_argument("segment durations must be positive");
    }
    noise.validate();
  }
};

enum class NoiseKind { kNone, kBlink, kSaccade, kMisestimation };

/// Raw stream plus, per frame, which noise (if any) produced it.
struct SimulatedStream {
  std::vector<EyeState> raw;
  std::vector<NoiseKind> noise;
  std::vector<std::size_t> segment_index;  // owning segment; saccade frames take the next one
};

inline SimulatedStream simulate_detailed(const NoiseScript& script, std::uint64_t seed) {
  script.validate();
  const NoiseModel& nm = script.noise;
  Rng rng(derive_seed(seed, {0x5C21}));
  SimulatedStream out;
  const double blink_p = nm.blink_rate / script.fps;

  for (std::size_t si = 0; si < script.segments.size(); ++si) {
    const Segment& seg = script.segments[si];
    if (si > 0 && nm.saccade_probability > 0 && rng.bernoulli(nm.saccade_probability)) {
      const int len = rng.uniform_int(nm.saccade_frames.lo, nm.saccade_frames.hi);
      for (int k = 0; k < len; ++k) {
        out.raw.emplace_back(rng.uniform_int(0, EyeState::kCount - 1));
        out.noise.push_back(NoiseKind::kSaccade);
        out.segment_index.push_back(si);
      }
    }

    std::vector<EyeState> frames(static_cast<std::size_t>(seg.frames), seg.state);
    std::vector<NoiseKind> kinds(frames.size(), NoiseKind::kNone);
    const int n = seg.frames;
    // Next frame where noise may start; the segment end keeps its margin too.
    int t = nm.margin;
    while (t < n - nm.margin) {
      if (!seg.state.is_closed() && blink_p > 0 && rng.bernoulli(blink_p)) {
        const int len = rng.uniform_int(nm.blink_frames.lo, nm.blink_frames.hi);
        if (t + len <= n - nm.margin) {
          for (int k = 0; k < len; ++k) {
            frames[static_cast<std::size_t>(t + k)] = EyeState::closed();
            kinds[static_cast<std::size_t>(t + k)] = NoiseKind::kBlink;
          }
          t += len + nm.margin;
          continue;
        }
      }
      if (nm.misestimation_rate > 0 && rng.bernoulli(nm.misestimation_rate)) {
        const int other = (seg.state.code() + rng.uniform_int(1, EyeState::kCount - 1)) % EyeState::kCount;
        frames[static_cast<std::size_t>(t)] = EyeState(other);
        kinds[static_cast<std::size_t>(t)] = NoiseKind::kMisestimation;
        t += 1 + nm.margin;
        continue;
      }
      ++t;
    }
    out.raw.insert(out.raw.end(), frames.begin(), frames.end());
    out.noise.insert(out.noise.end(), kinds.begin(), kinds.end());
    out.segment_index.insert(out.segment_index.end(), frames.size(), si);
  }
  return out;
}

/// Raw per-frame states for a script; deterministic in (script, seed).
inline std::vector<EyeState> simulate_sequence(const NoiseScript& script, std::uint64_t seed) {
  return simulate_detailed(script, seed).raw;
}

/// Fixations 1..9 then closed, `seconds` each, with natural blinks and
/// saccades at every transition.
inline NoiseScript fixation_sweep_script(double seconds = 1.5, double fps = 29.0) {
  NoiseScript s;
  s.fps = fps;
  const int frames = static_cast<int>(std::lround(seconds * fps));
  for (int c = 1; c <= 9; ++c) s.segments.push_back({EyeState(c), frames});
  s.segments.push_back({EyeState::closed(), frames});
  s.noise.blink_rate = 0.5;
  s.noise.saccade_probability = 1.0;
  s.noise.misestimation_rate = 0.02;
  return s;
}

// JSON form:
// {"fps": 29, "segments": [{"state": 1, "frames": 44} | {"state": 1, "seconds": 1.5}, ...],
//  "noise": {"blink_rate": 0.5, "blink_frames": [3, 5], "saccade_probability": 1,
//            "saccade_frames": [1, 4], "misestimation_rate": 0.02, "margin": 9}}
inline NoiseScript script_from_json(const nlohmann::json& j) {
  NoiseScript s;
  s.fps = j.value("fps", 29.0);
  if (!j.contains("segments") || !j.at("segments").is_array()) {
    throw std::invalid_argument("script needs a \"segments\" array");
  }
  for (const auto& seg : j.at("segments")) {
    const auto state = EyeState::from_code(seg.at("state").get<int>());
    if (!state) throw std::invalid_argument("segment state must be 0-9");
    int frames = 0;
    if (seg.contains("frames")) {
      frames = seg.at("frames").get<int>();
    } else if (seg.contains("seconds")) {
      frames = static_cast<int>(std::lround(seg.at("seconds").get<double>() * s.fps));
    } else {
      throw std::invalid_argument("segment needs \"frames\" or \"seconds\"");
    }
    s.segments.push_back({*state, frames});
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    auto range = [&](const char* key, FrameRange def) {
      if (!n.contains(key)) return def;
      const auto& r = n.at(key);
      if (!r.is_array() || r.size() != 2) throw std::invalid_argument(std::string(key) + " must be [lo, hi]");
      return FrameRange{r[0].get<int>(), r[1].get<int>()};
    };
    s.noise.blink_rate = n.value("blink_rate", 0.0);
    s.noise.blink_frames = range("blink_frames", s.noise.blink_frames);
    s.noise.saccade_probability = n.value("saccade_probability", 0.0);
    s.noise.saccade_frames = range("saccade_frames", s.noise.saccade_frames);
    s.noise.misestimation_rate = n.value("misestimation_rate", 0.0);
    s.noise.margin = n.value("margin", s.noise.margin);
  }
  s.validate();
  return s;
}

inline nlohmann::json script_to_json(const NoiseScript& s) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : s.segments) segs.push_back({{"state", seg.state.code()}, {"frames", seg.frames}});
  const auto& n = s.noise;
  return {{"fps", s.fps},
          {"segments", segs},
          {"noise",
           {{"blink_rate", n.blink_rate},
            {"blink_frames", {n.blink_frames.lo, n.blink_frames.hi}},
            {"saccade_probability", n.saccade_probability},
            {"saccade_frames", {n.saccade_frames.lo, n.saccade_frames.hi}},
            {"misestimation_rate", n.misestimation_rate},
            {"margin", n.margin}}}};
}

inline NoiseScript load_script(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open script " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("script " + path.string() + ": " + e.what());
  }
  return script_from_json(j);
}

/// CSV with header frame,raw,filtered; an absent filtered value is empty.
inline void write_trace_csv(std::ostream& os, const std::vector<EyeState>& raw,
                            const std::vector<std::optional<EyeState>>& filtered) {
  if (raw.size() != filtered.size()) throw std::invalid_argument("raw and filtered traces differ in length");
  os << "frame,raw,filtered\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    os << i << ',' << raw[i].code() << ',';
    if (filtered[i]) os << filtered[i]->code();
    os << '\n';
  }
}

/// Consecutive distinct values of a filtered stream, skipping empties.
inline std::vector<EyeState> distinct_runs(const std::vector<std::optional<EyeState>>& filtered) {
  std::vector<EyeState> out;
  for (const auto& f : filtered) {
    if (f && (out.empty() || out.back() != *f)) out.push_back(*f);
  }
  return out;
}

}  // namespace gaze9::filter
