#pragma once

// Weight file layout (all integers and floats little-endian):
//   "G9W1"  u16 version  u16 record count
//   per record: u8 kind tag, u8 rank, rank x u32 dims, prod(dims) x f32

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/core/tensor.hpp"

namespace gaze9::nn {

enum class WeightsErrorCode {
  kIo = 1,
  kBadMagic = 2,
  kUnsupportedVersion = 3,
  kTruncatedPayload = 4,
  kShapeTableMismatch = 5,
};

class WeightsError : public std::runtime_error {
 public:
  WeightsError(WeightsErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  WeightsErrorCode code() const noexcept { return code_; }

 private:
  WeightsErrorCode code_;
};

/// Role of a stored tensor; one record per learnable or statistics tensor.
enum class TensorKind : std::uint8_t {
  kConvWeights = 1,
  kConvBias = 2,
  kBnGamma = 3,
  kBnBeta = 4,
  kBnRunningMean = 5,
  kBnRunningVar = 6,
  kDenseWeights = 7,
  kDenseBias = 8,
};

struct WeightRecord {
  TensorKind kind;
  Tensor<float> tensor;
};

inline constexpr std::array<char, 4> kWeightsMagic = {'G', '9', 'W', '1'};
inline constexpr std::uint16_t kWeightsVersion = 1;
inline constexpr std::size_t kMaxRecordElements = std::size_t{1} << 26;

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class U>
void put_le(std::ostream& os, U value) {
  std::array<unsigned char, sizeof(U)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(U));
}

template <class U>
U get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(U))) {
    throw WeightsError(WeightsErrorCode::kTruncatedPayload, std::string("weight file truncated while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  U value;
  std::memcpy(&value, bytes.data(), sizeof(U));
  return value;
}

}  // namespace detail

inline void write_weight_records(std::ostream& os, std::span<const WeightRecord> records) {
  if (records.size() > 0xFFFF) throw WeightsError(WeightsErrorCode::kShapeTableMismatch, "too many weight records");
  os.write(kWeightsMagic.data(), kWeightsMagic.size());
  detail::put_le<std::uint16_t>(os, kWeightsVersion);
  detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(records.size()));
  for (const auto& r : records) {
    const auto& shape = r.tensor.shape();
    if (shape.size() > 0xFF) throw WeightsError(WeightsErrorCode::kShapeTableMismatch, "tensor rank too large");
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(r.kind));
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (float v : r.tensor.data()) detail::put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
  }
  if (!os) throw WeightsError(WeightsErrorCode::kIo, "failed writing weight records");
}

inline std::vector<WeightRecord> read_weight_records(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kWeightsMagic) {
    throw WeightsError(WeightsErrorCode::kBadMagic, "bad magic: not a G9W1 weight file");
  }
  const auto version = detail::get_le<std::uint16_t>(is, "version");
  if (version != kWeightsVersion) {
    throw WeightsError(WeightsErrorCode::kUnsupportedVersion, "unsupported weight file version " + std::to_string(version));
  }
  const auto count = detail::get_le<std::uint16_t>(is, "record count");
  std::vector<WeightRecord> records;
  records.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    const auto tag = detail::get_le<std::uint8_t>(is, "kind tag");
    if (tag < 1 || tag > 8) {
      throw WeightsError(WeightsErrorCode::kShapeTableMismatch,
                         "record " + std::to_string(i) + " has unknown kind tag " + std::to_string(tag));
    }
    const auto rank = detail::get_le<std::uint8_t>(is, "rank");
    Shape shape(rank);
    for (auto& d : shape) d = detail::get_le<std::uint32_t>(is, "dims");
    const std::size_t n = shape_size(shape);
    if (n > kMaxRecordElements) {
      throw WeightsError(WeightsErrorCode::kShapeTableMismatch,
                         "record " + std::to_string(i) + " declares an implausible shape " + shape_string(shape));
    }
    std::vector<float> data(n);
    for (auto& v : data) v = std::bit_cast<float>(detail::get_le<std::uint32_t>(is, "tensor payload"));
    records.push_back({static_cast<TensorKind>(tag), Tensor<float>(std::move(shape), std::move(data))});
  }
  return records;
}

}  // namespace gaze9::nn
