#pragma once

#include <array>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaze9/estimator/model.hpp"
#include "gaze9/synth/dataset.hpp"

namespace gaze9::estimator {

struct EvalReport {
  double top1 = 0;  // percent
  double top2 = 0;  // percent
  std::array<std::array<int, EyeState::kCount>, EyeState::kCount> confusion{};  // [truth][predicted]
  std::array<int, EyeState::kCount> counts{};
  std::size_t total = 0;

  nlohmann::json to_json() const {
    nlohmann::json conf = nlohmann::json::array();
    for (const auto& row : confusion) conf.push_back(row);
    return {{"top1", top1}, {"top2", top2}, {"confusion", conf}, {"counts", counts}};
  }
};

/// Rank of the true class: the number of classes scored above it, with
/// equal scores broken towards the lower class code.
inline int truth_rank(const Scores& s, EyeState truth) {
  const int t = truth.code();
  int rank = 0;
  for (int c = 0; c < EyeState::kCount; ++c) {
    if (c == t) continue;
    if (s[c] > s[t] || (s[c] == s[t] && c < t)) ++rank;
  }
  return rank;
}

class EvalAccumulator {
 public:
  void add(const Scores& scores, EyeState truth) {
    const int rank = truth_rank(scores, truth);
    if (rank < 1) ++top1_hits_;
    if (rank < 2) ++top2_hits_;
    ++report_.confusion[truth.code()][argmax_state(scores).code()];
    ++report_.counts[truth.code()];
    ++report_.total;
  }

  EvalReport report() const {
    EvalReport r = report_;
    if (r.total > 0) {
      r.top1 = 100.0 * static_cast<double>(top1_hits_) / static_cast<double>(r.total);
      r.top2 = 100.0 * static_cast<double>(top2_hits_) / static_cast<double>(r.total);
    }
    return r;
  }

 private:
  EvalReport report_;
  std::size_t top1_hits_ = 0;
  std::size_t top2_hits_ = 0;
};

inline EvalReport evaluate(const ModelParams<float>& p, const std::vector<synth::LabeledStrip>& samples) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate an empty split");
  std::vector<const EyeStrip*> strips;
  strips.reserve(samples.size());
  for (const auto& s : samples) strips.push_back(&s.strip);
  const auto scores = predict_batch(p, strips);
  EvalAccumulator acc;
  for (std::size_t i = 0; i < samples.size(); ++i) acc.add(scores[i], samples[i].label);
  return acc.report();
}

inline EvalReport evaluate(const ModelParams<float>& p, const synth::DatasetManifest& m, synth::Split split) {
  return evaluate(p, synth::load_split(m, split));
}

/// Raised when a frame has no candidate eye crops; the caller skips it.
class NoEyesError : public std::runtime_error {
 public:
  NoEyesError() : std::runtime_error("no eyes this frame") {}
};

struct Disambiguation {
  std::size_t index;
  EyeState state;
  float score;
};

/// Picks the candidate whose highest softmax score is largest; ties go to
/// the lowest index.
inline Disambiguation disambiguate_scores(std::span<const Scores> candidates) {
  if (candidates.empty()) throw NoEyesError();
  Disambiguation best{0, EyeState::closed(), -std::numeric_limits<float>::infinity()};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const EyeState s = argmax_state(candidates[i]);
    const float score = candidates[i][s.code()];
    if (score > best.score) best = {i, s, score};
  }
  return best;
}

inline Disambiguation disambiguate(const ModelParams<float>& p, std::span<const EyeStrip> candidates) {
  if (candidates.empty()) throw NoEyesError();
  std::vector<const EyeStrip*> strips;
  for (const auto& c : candidates) strips.push_back(&c);
  const auto scores = predict_batch(p, strips);
  return disambiguate_scores(scores);
}

}  // namespace gaze9::estimator
