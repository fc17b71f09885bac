#include <gtest/gtest.h>

#include <map>

#include "gaze9/augment/augment.hpp"
#include "gaze9/synth/eye_synth.hpp"

using namespace gaze9;
using namespace gaze9::augment;

namespace {

EyeStrip sample_strip(EyeState s = states::kLeftUp, std::uint64_t seed = 1) {
  return synth::render_eye_strip(s, synth::SynthParams{}, seed);
}

std::vector<synth::LabeledStrip> small_set() {
  std::vector<synth::LabeledStrip> out;
  for (int c = 0; c < EyeState::kCount; ++c)
    for (std::uint64_t k = 0; k < 3; ++k) out.push_back({sample_strip(EyeState(c), 100 + k), EyeState(c)});
  return out;
}

void expect_in_unit_range(const EyeStrip& s) {
  for (float v : s.pixels()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
}

}  // namespace

TEST(Flip, LabelMapFromTheWriteUp) {
  const auto strip = sample_strip();
  EXPECT_EQ(hflip_with_label_swap(strip, states::kLeft).second, states::kRight);
  EXPECT_EQ(hflip_with_label_swap(strip, states::kMiddle).second, states::kMiddle);
  EXPECT_EQ(hflip_with_label_swap(strip, states::kLeftUp).second, states::kRightUp);
  EXPECT_EQ(hflip_with_label_swap(strip, states::kRightDown).second, states::kLeftDown);
  EXPECT_EQ(hflip_with_label_swap(strip, states::kClosed).second, states::kClosed);
}

TEST(Flip, InvolutionOnPixelsAndLabels) {
  for (int c = 0; c < EyeState::kCount; ++c) {
    const auto strip = sample_strip(EyeState(c), 7);
    const auto once = hflip_with_label_swap(strip, EyeState(c));
    const auto twice = hflip_with_label_swap(once.first, once.second);
    EXPECT_EQ(twice.first, strip);
    EXPECT_EQ(twice.second, EyeState(c));
  }
}

TEST(Flip, MirrorsColumns) {
  const auto strip = sample_strip();
  const auto f = hflip_with_label_swap(strip, states::kUp).first;
  EXPECT_EQ(f.at(3, 0, 1), strip.at(3, 127, 1));
  EXPECT_EQ(f.at(10, 40, 2), strip.at(10, 87, 2));
}

TEST(Hsv, PureRedAndGray) {
  const auto red = rgb_to_hsv({1, 0, 0});
  EXPECT_DOUBLE_EQ(red.h, 0);
  EXPECT_DOUBLE_EQ(red.s, 1);
  EXPECT_DOUBLE_EQ(red.v, 1);
  const auto gray = rgb_to_hsv({0.5, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(gray.h, 0);
  EXPECT_DOUBLE_EQ(gray.s, 0);
  EXPECT_DOUBLE_EQ(gray.v, 0.5);
  EXPECT_NEAR(rgb_to_hsv({0, 1, 0}).h, 120, 1e-12);
  EXPECT_NEAR(rgb_to_hsv({0, 0, 1}).h, 240, 1e-12);
  EXPECT_NEAR(rgb_to_hsv({1, 0, 1}).h, 300, 1e-12);
}

TEST(Hsv, RoundTripOnRandomPixels) {
  Rng rng(17);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const RgbPixel p{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto h = rgb_to_hsv(p);
    ASSERT_GE(h.h, 0);
    ASSERT_LT(h.h, 360);
    const auto q = hsv_to_rgb(h);
    worst = std::max({worst, std::abs(p.r - q.r), std::abs(p.g - q.g), std::abs(p.b - q.b)});
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Hsv, ZeroAmplitudesLeaveImage) {
  const auto strip = sample_strip();
  EXPECT_EQ(hsv_jitter(strip, {0, 0, 0}, 3), strip);
}

TEST(Hsv, ValueShiftOnMidGray) {
  const EyeStrip gray(32, 128, 0.5f);
  const auto out = apply_hsv_shift(gray, {0, 0, 0.1});
  for (float v : out.pixels()) EXPECT_NEAR(v, 0.6f, 1e-6);
}

TEST(Hsv, JitterKeepsShapeRangeAndIsSeeded) {
  const auto strip = sample_strip();
  const HsvAmplitudes amp{30, 0.4, 0.4};
  const auto a = hsv_jitter(strip, amp, 5);
  EXPECT_EQ(a.height(), strip.height());
  EXPECT_EQ(a.width(), strip.width());
  expect_in_unit_range(a);
  EXPECT_EQ(a, hsv_jitter(strip, amp, 5));
  EXPECT_NE(a, hsv_jitter(strip, amp, 6));
}

TEST(Geometric, DefaultExpansionIsTwelve) {
  const AugmentConfig config;
  const auto out = geometric_expand(sample_strip(), states::kDown, config);
  ASSERT_EQ(out.size(), 12u);
  EXPECT_EQ(config.expansion_count(), 12u);
  for (const auto& [img, label] : out) {
    EXPECT_EQ(label, states::kDown);
    EXPECT_EQ(img.height(), 32);
    EXPECT_EQ(img.width(), 128);
    expect_in_unit_range(img);
  }
  AugmentConfig more;
  more.rotation_degrees = {1, 2, 3};
  EXPECT_EQ(geometric_expand(sample_strip(), states::kDown, more).size(), 13u);
}

TEST(Geometric, ZeroRotationAndUnitScaleAreIdentity) {
  const auto strip = sample_strip();
  EXPECT_EQ(rotate(strip, 0.0), strip);
  EXPECT_EQ(scale_center_crop(strip, 1.0), strip);
}

TEST(Geometric, ShiftThereAndBackRestoresInterior) {
  const auto strip = sample_strip();
  const auto back = shift(shift(strip, 5, 0), -5, 0);
  for (int y = 0; y < strip.height(); ++y)
    for (int x = 5; x < strip.width() - 5; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(back.at(y, x, c), strip.at(y, x, c));
  const auto moved = shift(strip, 5, 0);
  EXPECT_EQ(moved.at(4, 20, 0), strip.at(4, 15, 0));
  EXPECT_EQ(moved.at(4, 2, 0), strip.at(4, 0, 0));  // replicated border
}

TEST(Geometric, ShiftsFollowCompassOrder) {
  AugmentConfig config;
  const auto strip = sample_strip();
  // index 4 is the first shift: north, content moves up by 5 rows
  const auto north = geometric_variant(strip, config, 4);
  EXPECT_EQ(north, shift(strip, 0, -5));
  EXPECT_EQ(geometric_variant(strip, config, 6), shift(strip, 5, 0));
  EXPECT_THROW(geometric_variant(strip, config, 12), std::out_of_range);
}

TEST(Config, Validation) {
  AugmentConfig c;
  c.flip_probability = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.scale_factors = {0.9};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.shift_pixels = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Stream, NoFlipKeepsLabels) {
  const auto set = small_set();
  AugmentConfig c;
  c.flip_probability = 0;
  TrainingStream stream(set, c, 1);
  std::map<int, int> hist;
  ASSERT_EQ(stream.begin_epoch(1), set.size() * 13);
  while (auto item = stream.next()) ++hist[item->label.code()];
  for (int k = 0; k < 10; ++k) EXPECT_EQ(hist[k], 3 * 13);
}

TEST(Stream, AlwaysFlipGivesMirroredHistogram) {
  std::vector<synth::LabeledStrip> set;
  for (int k = 0; k < 10; ++k)
    for (int n = 0; n <= k; ++n) set.push_back({sample_strip(EyeState(k), 200 + n), EyeState(k)});
  AugmentConfig c = AugmentConfig::none();
  c.flip_probability = 1;
  TrainingStream stream(set, c, 2);
  std::map<int, int> got, want;
  for (const auto& s : set) ++want[s.label.mirrored().code()];
  stream.begin_epoch(1);
  while (auto item = stream.next()) ++got[item->label.code()];
  EXPECT_EQ(got, want);
}

TEST(Stream, FlippedItemsCarrySwappedLabelWithFlippedPixels) {
  const auto set = small_set();
  AugmentConfig c = AugmentConfig::none();
  c.flip_probability = 0.5;
  TrainingStream stream(set, c, 4);
  stream.begin_epoch(1);
  int flipped = 0, kept = 0;
  while (auto item = stream.next()) {
    bool matched = false;
    for (const auto& s : set) {
      if (item->strip == s.strip) {
        EXPECT_EQ(item->label, s.label);
        matched = true;
        ++kept;
        break;
      }
      const auto f = hflip_with_label_swap(s.strip, s.label);
      if (item->strip == f.first) {
        EXPECT_EQ(item->label, f.second);
        matched = true;
        ++flipped;
        break;
      }
    }
    EXPECT_TRUE(matched);
  }
  EXPECT_GT(flipped, 0);
  EXPECT_GT(kept, 0);
}

TEST(Stream, SameSeedSameSequenceAndEpochsReshuffle) {
  const auto set = small_set();
  const AugmentConfig c;
  TrainingStream a(set, c, 9, 50), b(set, c, 9, 50);
  EXPECT_EQ(a.begin_epoch(1), 50u);
  b.begin_epoch(1);
  std::vector<EyeStrip> first;
  for (int i = 0; i < 50; ++i) {
    auto x = a.next();
    auto y = b.next();
    ASSERT_TRUE(x && y);
    EXPECT_EQ(x->strip, y->strip);
    EXPECT_EQ(x->label, y->label);
    first.push_back(x->strip);
  }
  EXPECT_FALSE(a.next().has_value());
  a.begin_epoch(2);
  int same = 0;
  for (int i = 0; i < 50; ++i) same += a.next()->strip == first[i];
  EXPECT_LT(same, 50);
}
