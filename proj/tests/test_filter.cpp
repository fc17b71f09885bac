#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "filter_suite.hpp"

using namespace gaze9;
using namespace gaze9::filter;
using gaze9::testing::BruteForceMode;

namespace {

FilterWindow saturated(EyeState s, std::size_t capacity = kDefaultCapacity) {
  FilterWindow w(capacity);
  for (std::size_t i = 0; i < capacity; ++i) w.push(s);
  return w;
}

}  // namespace

TEST(FilterWindow, FreshWindowHasNoOutput) {
  FilterWindow w;
  EXPECT_FALSE(w.current().has_value());
  EXPECT_EQ(w.capacity(), 16u);
  EXPECT_FALSE(w.push(std::nullopt).has_value());
  EXPECT_EQ(w.size(), 0u);
}

TEST(FilterWindow, SingletonAndPureReads) {
  FilterWindow w;
  EXPECT_EQ(w.push(states::kLeftDown), states::kLeftDown);
  EXPECT_EQ(w.current(), states::kLeftDown);
  EXPECT_EQ(w.current(), states::kLeftDown);
  EXPECT_EQ(w.size(), 1u);
}

TEST(FilterWindow, SingleClosedFrameIgnored) {
  auto w = saturated(states::kMiddle);
  EXPECT_EQ(w.push(states::kClosed), states::kMiddle);
}

TEST(FilterWindow, NinthFrameFlipsEighthDoesNot) {
  auto w = saturated(states::kMiddle);
  for (int i = 1; i <= 8; ++i) EXPECT_EQ(w.push(states::kUp), states::kMiddle) << "push " << i;
  EXPECT_EQ(w.count(states::kUp), 8);
  EXPECT_EQ(w.count(states::kMiddle), 8);
  EXPECT_EQ(w.push(states::kUp), states::kUp);
  EXPECT_EQ(w.count(states::kUp), 9);
  EXPECT_EQ(w.count(states::kMiddle), 7);
}

TEST(FilterWindow, TieKeepsPreviousOutputAndResetClears) {
  FilterWindow w;
  EXPECT_EQ(w.push(states::kRight), states::kRight);
  EXPECT_EQ(w.push(states::kLeft), states::kRight);  // 1 vs 1
  EXPECT_EQ(w.push(states::kLeft), states::kLeft);
  w.reset();
  EXPECT_FALSE(w.current().has_value());
  EXPECT_EQ(w.size(), 0u);
  EXPECT_EQ(w.push(states::kDown), states::kDown);
}

TEST(FilterWindow, AbsentObservationChangesNothing) {
  auto w = saturated(states::kLeft);
  w.push(states::kUp);
  const auto before = w.contents();
  EXPECT_EQ(w.push(std::nullopt), states::kLeft);
  EXPECT_EQ(w.contents(), before);
}

TEST(FilterWindow, ContentsOldestFirst) {
  FilterWindow w(4);
  for (int c : {1, 2, 3, 4, 5, 6}) w.push(EyeState(c));
  EXPECT_EQ(w.contents(), (std::vector<EyeState>{EyeState(3), EyeState(4), EyeState(5), EyeState(6)}));
}

TEST(FilterWindow, RejectsTinyCapacity) {
  EXPECT_THROW(FilterWindow(1), std::invalid_argument);
  EXPECT_THROW(FilterWindow(0), std::invalid_argument);
}

TEST(Capacity, SizingRule) {
  EXPECT_GE(recommend_capacity(5), 11u);
  EXPECT_LE(recommend_capacity(5), kDefaultCapacity);
  EXPECT_EQ(recommend_capacity(1), 4u);
  for (std::size_t d = 1; d < 50; ++d) {
    const auto c = recommend_capacity(d);
    EXPECT_EQ(c % 2, 0u);
    EXPECT_GT(c, 2 * d);
    EXPECT_LE(c, 2 * d + 2);
    EXPECT_GE(recommend_capacity(d + 1), c);
  }
  EXPECT_THROW(recommend_capacity(0), std::invalid_argument);
}

TEST(Properties, NoiseImmunityForShortBursts) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const EyeState s(rng.uniform_int(0, 9));
    auto w = saturated(s);
    const int len = rng.uniform_int(1, 8);
    for (int k = 0; k < len; ++k) {
      const auto out = w.push(EyeState(rng.uniform_int(0, 9)));
      ASSERT_EQ(out, s) << "trial " << trial;
    }
  }
}

TEST(Properties, ResponsivenessAfterNineFrames) {
  for (std::size_t capacity : {4u, 8u, 16u, 20u}) {
    const std::size_t need = (capacity + 1) / 2 + 1;
    for (int s = 0; s < 10; ++s)
      for (int t = 0; t < 10; ++t) {
        if (s == t) continue;
        auto w = saturated(EyeState(s), capacity);
        std::optional<EyeState> out;
        for (std::size_t k = 0; k < need; ++k) out = w.push(EyeState(t));
        ASSERT_EQ(out, EyeState(t)) << capacity;
      }
  }
  EXPECT_EQ((16u + 1) / 2 + 1, 9u);
}

TEST(Properties, ModeMatchesBruteForceOracle) {
  Rng rng(2);
  for (std::size_t capacity : {2u, 5u, 16u}) {
    FilterWindow w(capacity);
    BruteForceMode oracle(capacity);
    for (int i = 0; i < 20000; ++i) {
      std::optional<EyeState> obs;
      // skewed states so long runs and ties both occur
      if (rng.uniform() > 0.05) obs = EyeState(rng.bernoulli(0.6) ? rng.uniform_int(0, 2) : rng.uniform_int(0, 9));
      ASSERT_EQ(w.push(obs), oracle.push(obs)) << "push " << i;
    }
  }
}

TEST(Properties, OutputIsInWindowAndNeverOlderThanCapacity) {
  Rng rng(3);
  FilterWindow w;
  for (int i = 0; i < 5000; ++i) {
    const auto out = w.push(EyeState(rng.uniform_int(0, 9)));
    const auto c = w.contents();
    ASSERT_NE(std::find(c.begin(), c.end(), *out), c.end());
  }
  for (int s = 0; s < 10; ++s) {
    for (std::size_t k = 0; k < w.capacity(); ++k) w.push(EyeState(s));
    ASSERT_EQ(w.current(), EyeState(s));
  }
}

TEST(Simulator, ZeroNoiseExpandsVerbatim) {
  NoiseScript s;
  s.segments = {{EyeState(3), 4}, {EyeState(0), 2}, {EyeState(7), 3}};
  const auto raw = simulate_sequence(s, 1);
  const std::vector<EyeState> want = {EyeState(3), EyeState(3), EyeState(3), EyeState(3), EyeState(0),
                                      EyeState(0), EyeState(7), EyeState(7), EyeState(7)};
  EXPECT_EQ(raw, want);
}

TEST(Simulator, DeterministicBySeed) {
  const auto s = fixation_sweep_script();
  EXPECT_EQ(simulate_sequence(s, 4), simulate_sequence(s, 4));
  EXPECT_NE(simulate_sequence(s, 4), simulate_sequence(s, 5));
}

TEST(Simulator, BurstLengthsWithinModel) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto script = gaze9::testing::random_noisy_script(rng);
    const auto sim = simulate_detailed(script, rng.next());
    ASSERT_EQ(sim.raw.size(), sim.noise.size());
    for (std::size_t i = 0; i < sim.raw.size();) {
      const auto kind = sim.noise[i];
      std::size_t j = i;
      while (j < sim.raw.size() && sim.noise[j] == kind && sim.segment_index[j] == sim.segment_index[i]) ++j;
      const auto len = j - i;
      if (kind == NoiseKind::kBlink) {
        ASSERT_GE(len, 3u);
        ASSERT_LE(len, 5u);
        for (std::size_t k = i; k < j; ++k) ASSERT_TRUE(sim.raw[k].is_closed());
      } else if (kind == NoiseKind::kSaccade) {
        ASSERT_GE(len, 1u);
        ASSERT_LE(len, 4u);
      } else if (kind == NoiseKind::kMisestimation) {
        ASSERT_EQ(len, 1u);
        ASSERT_NE(sim.raw[i], script.segments[sim.segment_index[i]].state);
      } else {
        for (std::size_t k = i; k < j; ++k) ASSERT_EQ(sim.raw[k], script.segments[sim.segment_index[k]].state);
      }
      i = j;
    }
  }
}

TEST(Simulator, SegmentFramesPreserved) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto script = gaze9::testing::random_noisy_script(rng);
    const auto sim = simulate_detailed(script, rng.next());
    std::vector<int> frames(script.segments.size());
    for (std::size_t i = 0; i < sim.raw.size(); ++i)
      if (sim.noise[i] != NoiseKind::kSaccade) ++frames[sim.segment_index[i]];
    for (std::size_t k = 0; k < frames.size(); ++k) EXPECT_EQ(frames[k], script.segments[k].frames);
  }
}

TEST(Simulator, FixationSweepYieldsTenStatesInOrder) {
  const auto script = fixation_sweep_script();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto raw = simulate_sequence(script, seed);
    std::vector<std::optional<EyeState>> obs(raw.begin(), raw.end());
    EXPECT_EQ(distinct_runs(filter_stream(obs)), gaze9::testing::scripted_states(script)) << "seed " << seed;
  }
}

TEST(Simulator, RandomScriptsHaveNoSpuriousStates) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto script = gaze9::testing::random_noisy_script(rng);
    const auto raw = simulate_sequence(script, rng.next());
    std::vector<std::optional<EyeState>> obs(raw.begin(), raw.end());
    ASSERT_EQ(distinct_runs(filter_stream(obs)), gaze9::testing::scripted_states(script)) << "trial " << trial;
  }
}

TEST(Script, JsonRoundTripAndSeconds) {
  const auto s = fixation_sweep_script();
  const auto back = script_from_json(script_to_json(s));
  EXPECT_EQ(back.segments, s.segments);
  EXPECT_EQ(back.fps, s.fps);
  EXPECT_EQ(back.noise.blink_rate, s.noise.blink_rate);
  EXPECT_EQ(back.noise.margin, s.noise.margin);

  const auto j = nlohmann::json::parse(R"({"fps": 20, "segments": [{"state": 4, "seconds": 1.5}, {"state": 0, "frames": 7}]})");
  const auto t = script_from_json(j);
  ASSERT_EQ(t.segments.size(), 2u);
  EXPECT_EQ(t.segments[0].frames, 30);
  EXPECT_EQ(t.segments[1].frames, 7);
  EXPECT_EQ(t.noise.blink_rate, 0.0);
}

TEST(Script, RejectsInvalid) {
  using nlohmann::json;
  EXPECT_THROW(script_from_json(json::parse(R"({"segments": [{"state": 12, "frames": 3}]})")), std::invalid_argument);
  EXPECT_THROW(script_from_json(json::parse(R"({"segments": [{"state": 1}]})")), std::invalid_argument);
  EXPECT_THROW(script_from_json(json::parse(R"({"segments": [{"state": 1, "frames": 0}]})")), std::invalid_argument);
  EXPECT_THROW(script_from_json(json::parse(R"({"fps": 29})")), std::invalid_argument);
  EXPECT_THROW(script_from_json(json::parse(R"({"segments": [], "noise": {"blink_frames": [5, 3]}})")),
               std::invalid_argument);
}

TEST(Script, BundledSweepFileLoads) {
  const auto s = load_script(std::filesystem::path(GAZE9_DATA_DIR) / "fixation_sweep.json");
  EXPECT_EQ(s.segments, fixation_sweep_script().segments);
}

TEST(Trace, CsvFormat) {
  const std::vector<EyeState> raw = {EyeState(5), EyeState(0)};
  const std::vector<std::optional<EyeState>> filtered = {EyeState(5), std::nullopt};
  std::ostringstream os;
  write_trace_csv(os, raw, filtered);
  EXPECT_EQ(os.str(), "frame,raw,filtered\n0,5,5\n1,0,\n");
  EXPECT_THROW(write_trace_csv(os, raw, {}), std::invalid_argument);
}
