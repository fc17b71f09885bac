#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/core/eye_state.hpp"

namespace gaze9::filter {

inline constexpr std::size_t kDefaultCapacity = 16;

/// Sliding majority vote over the last `capacity` observed states.
///
/// The output is the most frequent state in the window. A tie that includes
/// the previous output keeps it; otherwise the smallest state code wins.
/// Absent observations (no eyes found) are skipped entirely.
class FilterWindow {
 public:
  explicit FilterWindow(std::size_t capacity = kDefaultCapacity) : capacity_(capacity), ring_(capacity) {
    if (capacity < 2) throw std::invalid_argument("filter capacity must be >= 2, got " + std::to_string(capacity));
  }

  std::optional<EyeState> push(std::optional<EyeState> observation) {
    if (!observation) return current_;
    if (size_ == capacity_) {
      --counts_[ring_[head_].code()];
    } else {
      ++size_;
    }
    ring_[head_] = *observation;
    ++counts_[observation->code()];
    head_ = (head_ + 1) % capacity_;

    int best = current_ ? current_->code() : -1;
    int best_count = best >= 0 ? counts_[best] : 0;
    for (int c = 0; c < EyeState::kCount; ++c) {
      if (counts_[c] > best_count) {
        best = c;
        best_count = counts_[c];
      }
    }
    current_ = EyeState(best);
    return current_;
  }

  std::optional<EyeState> current() const noexcept { return current_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return size_; }
  int count(EyeState s) const noexcept { return counts_[s.code()]; }

  /// Window contents, oldest first.
  std::vector<EyeState> contents() const {
    std::vector<EyeState> out;
    out.reserve(size_);
    const std::size_t start = (head_ + capacity_ - size_) % capacity_;
    for (std::size_t i = 0; i < size_; ++i) out.push_back(ring_[(start + i) % capacity_]);
    return out;
  }

  void reset() {
    size_ = 0;
    head_ = 0;
    counts_.fill(0);
    current_.reset();
  }

 private:
  std::size_t capacity_;
  std::vector<EyeState> ring_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
  std::array<int, EyeState::kCount> counts_{};
  std::optional<EyeState> current_;
};

/// Smallest even window strictly longer than twice the longest noise burst.
inline std::size_t recommend_capacity(std::size_t longest_noise_frames) {
  if (longest_noise_frames < 1) throw std::invalid_argument("noise duration must be >= 1 frame");
  return 2 * longest_noise_frames + 2;
}

/// Filters a whole raw stream with a fresh window.
inline std::vector<std::optional<EyeState>> filter_stream(const std::vector<std::optional<EyeState>>& raw,
                                                          std::size_t capacity = kDefaultCapacity) {
  FilterWindow w(capacity);
  std::vector<std::optional<EyeState>> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(w.push(r));
  return out;
}

}  // namespace gaze9::filter
