#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gaze9/image/png_io.hpp"
#include "gaze9/synth/dataset.hpp"
#include "gaze9/synth/eye_synth.hpp"

using namespace gaze9;
using namespace gaze9::synth;

namespace {

struct Centroid {
  double x = 0, y = 0;
  std::size_t n = 0;
};

// Centroid of pupil-coloured pixels inside one 64-pixel eye cell, in the
// same pixel-centre coordinates the renderer uses.
Centroid dark_centroid(const EyeStrip& s, int eye) {
  Centroid c;
  for (int y = 0; y < s.height(); ++y)
    for (int x = eye * 64; x < eye * 64 + 64; ++x)
      if (is_pupil_pixel(s, y, x)) {
        c.x += x + 0.5;
        c.y += y + 0.5;
        ++c.n;
      }
  if (c.n) {
    c.x /= static_cast<double>(c.n);
    c.y /= static_cast<double>(c.n);
  }
  return c;
}

int sign(double v, double dead = 0.5) { return v > dead ? 1 : (v < -dead ? -1 : 0); }

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

SplitCounts tiny_counts(int n) { return {n, n, n, n}; }

}  // namespace

TEST(Render, ClosedStateHasNoPupilPixels) {
  const EyeRenderer r{SynthParams{}};
  const EyeRenderer u{unknown_user_params()};
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    for (const auto* renderer : {&r, &u}) {
      const auto s = renderer->render(states::kClosed, seed);
      for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x) ASSERT_FALSE(is_pupil_pixel(s, y, x)) << seed;
    }
}

TEST(Render, MiddleStateCentroidAtEyeCentre) {
  const EyeRenderer r{SynthParams{}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = r.render_with_geometry(states::kMiddle, seed);
    ASSERT_EQ(out.eyes.size(), 2u);
    for (int e = 0; e < 2; ++e) {
      const auto c = dark_centroid(out.strip, e);
      ASSERT_GT(c.n, 0u);
      EXPECT_LT(std::hypot(c.x - out.eyes[e].center_x, c.y - out.eyes[e].center_y), 1.0) << "seed " << seed;
    }
  }
}

TEST(Render, DeterministicAndStripShape) {
  const EyeRenderer r{SynthParams{}};
  EXPECT_EQ(r.render(states::kUp, 5), r.render(states::kUp, 5));
  EXPECT_NE(r.render(states::kUp, 5), r.render(states::kUp, 6));
  const auto single = r.render(states::kUp, 5, EyeStrip::kSingleEyeWidth);
  EXPECT_EQ(single.height(), 32);
  EXPECT_EQ(single.width(), 64);
  for (float v : single.pixels()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
  EXPECT_THROW(r.render(states::kUp, 5, 100), std::invalid_argument);
}

TEST(Render, DirectionSignFidelity) {
  for (const auto& params : {SynthParams{}, unknown_user_params()}) {
    const EyeRenderer r{params};
    for (int code = 1; code <= 9; ++code) {
      const EyeState s(code);
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto out = r.render_with_geometry(s, seed * 31 + code);
        for (int e = 0; e < 2; ++e) {
          const auto c = dark_centroid(out.strip, e);
          ASSERT_GT(c.n, 0u);
          EXPECT_EQ(sign(c.x - out.eyes[e].center_x), s.dx()) << s.name() << " seed " << seed << " eye " << e;
          EXPECT_EQ(sign(c.y - out.eyes[e].center_y), s.dy()) << s.name() << " seed " << seed << " eye " << e;
        }
      }
    }
  }
}

TEST(Render, LeftAndRightAreMirrorImagesUpToJitter) {
  const EyeRenderer r{SynthParams{}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto left = r.render_with_geometry(states::kLeft, seed);
    const auto right = r.render_with_geometry(states::kRight, seed);
    for (int e = 0; e < 2; ++e) {
      const double lx = dark_centroid(left.strip, e).x - left.eyes[e].center_x;
      const double rx = dark_centroid(right.strip, e).x - right.eyes[e].center_x;
      EXPECT_LT(lx, 0);
      EXPECT_GT(rx, 0);
      EXPECT_NEAR(lx, -rx, 1.0);
    }
  }
}

TEST(Render, MirrorPropertyOnCentroidStatistics) {
  // Mean centroid offset of state s equals that of the flipped mirror(s).
  const EyeRenderer r{SynthParams{}};
  constexpr int kSeeds = 200;
  for (int code = 1; code <= 9; ++code) {
    const EyeState s(code);
    double sx = 0, sy = 0, mx = 0, my = 0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      const auto a = r.render_with_geometry(s, 1000 + seed);
      const auto b = r.render_with_geometry(s.mirrored(), 5000 + seed);
      for (int e = 0; e < 2; ++e) {
        const auto ca = dark_centroid(a.strip, e);
        sx += ca.x - a.eyes[e].center_x;
        sy += ca.y - a.eyes[e].center_y;
        const auto cb = dark_centroid(b.strip, e);
        // horizontal flip negates the x offset relative to the eye centre
        mx += -(cb.x - b.eyes[e].center_x);
        my += cb.y - b.eyes[e].center_y;
      }
    }
    EXPECT_NEAR(sx / (2 * kSeeds), mx / (2 * kSeeds), 0.15) << s.name();
    EXPECT_NEAR(sy / (2 * kSeeds), my / (2 * kSeeds), 0.15) << s.name();
  }
}

TEST(SynthParams, RejectsDegenerateAndEscapingRanges) {
  SynthParams p;
  p.iris_radius = {6.0, 5.0};
  EXPECT_THROW(EyeRenderer{p}, std::invalid_argument);
  SynthParams q;
  q.offset_x = {17.0, 19.0};
  EXPECT_THROW(EyeRenderer{q}, std::invalid_argument);
}

TEST(Dataset, CountsSeedsAndLayout) {
  TempDir dir("gaze9_ds_counts");
  const auto m = generate_dataset(dir.path(), tiny_counts(3), SynthParams{}, unknown_user_params(), 77);
  EXPECT_EQ(m.records.size(), 3u * 10 * 4);
  std::set<std::uint64_t> seeds;
  for (const auto& r : m.records) {
    seeds.insert(r.seed);
    EXPECT_EQ(r.path, "images/" + std::string(split_name(r.split)) + "/" + std::to_string(r.label.code()) + "/" +
                          std::to_string(r.seed) + ".png");
    EXPECT_TRUE(std::filesystem::exists(dir.path() / r.path));
  }
  EXPECT_EQ(seeds.size(), m.records.size());
  for (auto split : kAllSplits) {
    std::map<int, int> hist;
    for (const auto& r : m.of_split(split)) ++hist[r.label.code()];
    ASSERT_EQ(hist.size(), 10u);
    for (auto [label, n] : hist) EXPECT_EQ(n, 3) << split_name(split) << " label " << label;
  }
  const auto loaded = load_manifest(dir.path());
  ASSERT_EQ(loaded.records.size(), m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) EXPECT_EQ(loaded.records[i].path, m.records[i].path);
}

TEST(Dataset, SameMasterSeedGivesIdenticalBytes) {
  TempDir a("gaze9_ds_a"), b("gaze9_ds_b");
  const auto ma = generate_dataset(a.path(), tiny_counts(1), SynthParams{}, unknown_user_params(), 5);
  generate_dataset(b.path(), tiny_counts(1), SynthParams{}, unknown_user_params(), 5);
  EXPECT_EQ(slurp(a.path() / "manifest.jsonl"), slurp(b.path() / "manifest.jsonl"));
  for (const auto& r : ma.records) EXPECT_EQ(slurp(a.path() / r.path), slurp(b.path() / r.path)) << r.path;
}

TEST(Dataset, RoundTripWithinQuantization) {
  TempDir dir("gaze9_ds_rt");
  const SynthParams known{};
  const auto unknown = unknown_user_params();
  const auto m = generate_dataset(dir.path(), tiny_counts(1), known, unknown, 12);
  for (auto split : kAllSplits) {
    const auto loaded = load_split(load_manifest(dir.path()), split);
    const auto records = m.of_split(split);
    ASSERT_EQ(loaded.size(), records.size());
    const EyeRenderer r(split == Split::kTestUnknown ? unknown : known);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      EXPECT_EQ(loaded[i].label, records[i].label);
      const auto original = r.render(records[i].label, records[i].seed);
      ASSERT_EQ(original.size(), loaded[i].strip.size());
      for (std::size_t k = 0; k < original.size(); ++k) {
        ASSERT_LE(std::abs(original.pixels()[k] - loaded[i].strip.pixels()[k]), 1.0f / 255.0f);
      }
    }
  }
}

TEST(Dataset, ShuffleSeedGivesDeterministicPermutation) {
  TempDir dir("gaze9_ds_shuffle");
  const auto m = generate_dataset(dir.path(), {2, 1, 1, 1}, SynthParams{}, unknown_user_params(), 3);
  const auto a = load_split(m, Split::kTrain, 9), b = load_split(m, Split::kTrain, 9);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].strip, b[i].strip);
}

namespace {
ManifestError manifest_error(const std::filesystem::path& dir, const std::string& content) {
  std::ofstream(dir / "manifest.jsonl") << content;
  try {
    load_manifest(dir);
  } catch (const ManifestError& e) {
    return e;
  }
  ADD_FAILURE() << "manifest accepted";
  return ManifestError(std::vector<ManifestDiagnostic>{});
}
}  // namespace

TEST(Manifest, EmptyManifestGivesEmptySplits) {
  TempDir dir("gaze9_manifest_empty");
  std::ofstream(dir.path() / "manifest.jsonl").close();
  const auto m = load_manifest(dir.path());
  EXPECT_TRUE(m.records.empty());
  for (auto s : kAllSplits) EXPECT_TRUE(load_split(m, s).empty());
}

TEST(Manifest, PerRecordDiagnostics) {
  TempDir dir("gaze9_manifest_bad");
  const EyeRenderer r{SynthParams{}};
  std::filesystem::create_directories(dir.path() / "images");
  write_png(dir.path() / "images/a.png", r.render(states::kUp, 1));
  const std::string good = R"({"path":"images/a.png","label":2,"split":"train","seed":1})";
  const auto e = manifest_error(dir.path(), good + "\n" +
                                                R"({"path":"images/b.png","label":11,"split":"train","seed":2})" "\n" +
                                                good + "\n" +
                                                R"({"path":"images/c.png","label":3,"split":"val","seed":3})" "\n" +
                                                R"({"path":"images/a2.png","label":3,"split":"holdout","seed":4})" "\n" +
                                                "not json\n");
  ASSERT_EQ(e.diagnostics().size(), 5u);
  EXPECT_EQ(e.diagnostics()[0].record_index, 1u);
  EXPECT_NE(e.diagnostics()[0].message.find("label 11"), std::string::npos);
  EXPECT_EQ(e.diagnostics()[1].record_index, 2u);
  EXPECT_NE(e.diagnostics()[1].message.find("duplicate"), std::string::npos);
  EXPECT_EQ(e.diagnostics()[2].record_index, 3u);
  EXPECT_NE(e.diagnostics()[2].message.find("missing"), std::string::npos);
  EXPECT_EQ(e.diagnostics()[3].record_index, 4u);
  EXPECT_EQ(e.diagnostics()[4].record_index, 5u);
}

TEST(Png, RejectsGarbage) {
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5};
  EXPECT_THROW(decode_png(junk), ImageError);
}
