#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/image/png_io.hpp"
#include "gaze9/synth/eye_synth.hpp"

namespace gaze9::synth {

enum class Split { kTrain, kVal, kTestKnown, kTestUnknown };

inline constexpr std::array<Split, 4> kAllSplits = {Split::kTrain, Split::kVal, Split::kTestKnown, Split::kTestUnknown};

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTestKnown: return "test-known";
    case Split::kTestUnknown: return "test-unknown";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view name) {
  for (auto s : kAllSplits)
    if (split_name(s) == name) return s;
  return std::nullopt;
}

struct ManifestRecord {
  std::string path;  // relative to the dataset root
  EyeState label;
  Split split;
  std::uint64_t seed;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRecord> records;

  std::vector<ManifestRecord> of_split(Split s) const {
    std::vector<ManifestRecord> out;
    for (const auto& r : records)
      if (r.split == s) out.push_back(r);
    return out;
  }
};

struct ManifestDiagnostic {
  std::size_t record_index;  // 0-based line of manifest.jsonl
  std::string message;
};

class ManifestError : public std::runtime_error {
 public:
  explicit ManifestError(std::vector<ManifestDiagnostic> diagnostics)
      : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<ManifestDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<ManifestDiagnostic>& d) {
    std::string s = std::to_string(d.size()) + " bad manifest record(s)";
    for (std::size_t i = 0; i < d.size() && i < 5; ++i) {
      s += "; record " + std::to_string(d[i].record_index) + ": " + d[i].message;
    }
    return s;
  }
  std::vector<ManifestDiagnostic> diagnostics_;
};

/// Images per class for each split.
struct SplitCounts {
  int train = 200;
  int val = 50;
  int test_known = 50;
  int test_unknown = 50;

  int of(Split s) const {
    switch (s) {
      case Split::kTrain: return train;
      case Split::kVal: return val;
      case Split::kTestKnown: return test_known;
      case Split::kTestUnknown: return test_unknown;
    }
    return 0;
  }
};

struct LabeledStrip {
  EyeStrip strip;
  EyeState label;
};

inline constexpr std::string_view kManifestFile = "manifest.jsonl";

inline nlohmann::json to_json(const ManifestRecord& r) {
  return {{"path", r.path}, {"label", r.label.code()}, {"split", std::string(split_name(r.split))}, {"seed", r.seed}};
}

inline void write_manifest(const std::filesystem::path& root, const std::vector<ManifestRecord>& records) {
  const auto path = root / kManifestFile;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) os << to_json(r).dump() << '\n';
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

/// Renders every requested image under `<root>/images/<split>/<label>/<seed>.png`
/// and writes `<root>/manifest.jsonl`. Known splits use `known`; the
/// test-unknown split uses `unknown`. Per-image seeds are distinct.
inline DatasetManifest generate_dataset(const std::filesystem::path& root, const SplitCounts& counts,
                                        const SynthParams& known, const SynthParams& unknown,
                                        std::uint64_t master_seed, int width = EyeStrip::kDoubleEyeWidth,
                                        const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  const EyeRenderer known_renderer(known);
  const EyeRenderer unknown_renderer(unknown);
  namespace fs = std::filesystem;

  std::size_t total = 0;
  for (auto s : kAllSplits) total += static_cast<std::size_t>(counts.of(s)) * EyeState::kCount;

  DatasetManifest manifest{root, {}};
  manifest.records.reserve(total);
  std::uint64_t counter = 0;
  const std::uint64_t base = mix64(master_seed);
  for (auto split : kAllSplits) {
    const auto& renderer = split == Split::kTestUnknown ? unknown_renderer : known_renderer;
    for (int label = 0; label < EyeState::kCount; ++label) {
      const fs::path dir = root / "images" / std::string(split_name(split)) / std::to_string(label);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
      for (int i = 0; i < counts.of(split); ++i) {
        // mix64 is a bijection, so distinct counters give distinct seeds.
        const std::uint64_t seed = mix64(base + counter++);
        const auto rel = fs::path("images") / std::string(split_name(split)) / std::to_string(label) /
                         (std::to_string(seed) + ".png");
        write_png(root / rel, renderer.render(EyeState(label), seed, width));
        manifest.records.push_back({rel.generic_string(), EyeState(label), split, seed});
        if (progress) progress(manifest.records.size(), total);
      }
    }
  }
  write_manifest(root, manifest.records);
  return manifest;
}

/// Parses `<root>/manifest.jsonl` (or a manifest file path). Every bad
/// record is reported with its index.
inline DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files = true) {
  namespace fs = std::filesystem;
  const fs::path file = fs::is_directory(path) ? path / kManifestFile : path;
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open manifest " + file.string());

  DatasetManifest m{file.parent_path(), {}};
  std::vector<ManifestDiagnostic> diags;
  std::set<std::string> seen;
  std::string line;
  std::size_t index = 0;
  for (; std::getline(is, line); ++index) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const int label = j.at("label").get<int>();
      const auto label_state = EyeState::from_code(label);
      if (!label_state) {
        diags.push_back({index, "label " + std::to_string(label) + " out of range 0-9"});
        continue;
      }
      const auto split = parse_split(j.at("split").get<std::string>());
      if (!split) {
        diags.push_back({index, "unknown split " + j.at("split").get<std::string>()});
        continue;
      }
      ManifestRecord r{j.at("path").get<std::string>(), *label_state, *split, j.at("seed").get<std::uint64_t>()};
      if (!seen.insert(r.path).second) {
        diags.push_back({index, "duplicate path " + r.path});
        continue;
      }
      if (check_files && !fs::exists(m.root / r.path)) {
        diags.push_back({index, "missing image file " + r.path});
        continue;
      }
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      diags.push_back({index, std::string("malformed record: ") + e.what()});
    }
  }
  if (!diags.empty()) throw ManifestError(std::move(diags));
  return m;
}

/// Decodes every image of a split. With a shuffle seed the order is a
/// deterministic permutation; without one it is manifest order.
inline std::vector<LabeledStrip> load_split(const DatasetManifest& m, Split split,
                                            std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  auto records = m.of_split(split);
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(records.begin(), records.end());
  }
  std::vector<LabeledStrip> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({read_png(m.root / r.path), r.label});
  return out;
}

}  // namespace gaze9::synth
