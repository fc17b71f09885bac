#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaze9/estimator/model.hpp"
#include "gaze9/nn/weights_io.hpp"

namespace gaze9::estimator {

using nn::TensorKind;
using nn::WeightsError;
using nn::WeightsErrorCode;

inline std::vector<nn::WeightRecord> to_records(const ModelParams<float>& p) {
  std::vector<nn::WeightRecord> r;
  for (const auto& b : p.blocks) {
    r.push_back({TensorKind::kConvWeights, b.conv.weights});
    r.push_back({TensorKind::kConvBias, b.conv.bias});
    r.push_back({TensorKind::kBnGamma, b.bn.gamma});
    r.push_back({TensorKind::kBnBeta, b.bn.beta});
    r.push_back({TensorKind::kBnRunningMean, b.bn.running_mean});
    r.push_back({TensorKind::kBnRunningVar, b.bn.running_var});
  }
  r.push_back({TensorKind::kDenseWeights, p.hidden.weights});
  r.push_back({TensorKind::kDenseBias, p.hidden.bias});
  r.push_back({TensorKind::kDenseWeights, p.output.weights});
  r.push_back({TensorKind::kDenseBias, p.output.bias});
  return r;
}

/// Rebuilds parameters from records. Without an expected config the input
/// height is taken as 32 and the width is recovered from the first dense
/// layer's fan-in.
inline ModelParams<float> from_records(std::vector<nn::WeightRecord> records,
                                       const std::optional<ModelConfig>& expected = std::nullopt) {
  constexpr std::size_t kExpected = 6 * ModelConfig::kBlocks + 4;
  auto mismatch = [](const std::string& what) { return WeightsError(WeightsErrorCode::kShapeTableMismatch, what); };
  if (records.size() != kExpected) {
    throw mismatch("expected " + std::to_string(kExpected) + " tensors, file has " + std::to_string(records.size()));
  }
  static constexpr TensorKind kOrder[] = {TensorKind::kConvWeights, TensorKind::kConvBias,    TensorKind::kBnGamma,
                                          TensorKind::kBnBeta,      TensorKind::kBnRunningMean, TensorKind::kBnRunningVar};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TensorKind want = i < 6 * ModelConfig::kBlocks
                                ? kOrder[i % 6]
                                : ((i - 6 * ModelConfig::kBlocks) % 2 == 0 ? TensorKind::kDenseWeights : TensorKind::kDenseBias);
    if (records[i].kind != want) throw mismatch("tensor " + std::to_string(i) + " has an unexpected kind tag");
  }

  const auto& conv0 = records[0].tensor;
  const auto& dense0 = records[6 * ModelConfig::kBlocks].tensor;
  const auto& dense1 = records[6 * ModelConfig::kBlocks + 2].tensor;
  if (conv0.rank() != 4 || dense0.rank() != 2 || dense1.rank() != 2) throw mismatch("unexpected tensor ranks");

  ModelConfig config;
  if (expected) {
    config = *expected;
  } else {
    config.filters = static_cast<int>(conv0.dim(3));
    config.hidden = static_cast<int>(dense0.dim(1));
    config.classes = static_cast<int>(dense1.dim(1));
    const std::size_t per_col = static_cast<std::size_t>(config.height / 8) * static_cast<std::size_t>(config.filters);
    if (per_col == 0 || dense0.dim(0) % per_col != 0) throw mismatch("dense fan-in does not match any input width");
    config.width = static_cast<int>(dense0.dim(0) / per_col) * 8;
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw mismatch(e.what());
  }

  // Compare every tensor against a freshly built model of that config.
  ModelParams<float> p = build_model<float>(config, 0);
  std::size_t i = 0;
  auto take = [&](Tensor<float>& dst) {
    auto& src = records[i].tensor;
    if (src.shape() != dst.shape()) {
      throw mismatch("tensor " + std::to_string(i) + " has shape " + shape_string(src.shape()) + ", expected " +
                     shape_string(dst.shape()));
    }
    dst = std::move(src);
    ++i;
  };
  for (auto& b : p.blocks) {
    take(b.conv.weights);
    take(b.conv.bias);
    take(b.bn.gamma);
    take(b.bn.beta);
    take(b.bn.running_mean);
    take(b.bn.running_var);
  }
  take(p.hidden.weights);
  take(p.hidden.bias);
  take(p.output.weights);
  take(p.output.bias);
  return p;
}

inline void save_weights(const ModelParams<float>& p, std::ostream& os) {
  const auto records = to_records(p);
  nn::write_weight_records(os, records);
}

inline void save_weights(const ModelParams<float>& p, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw WeightsError(WeightsErrorCode::kIo, "cannot write " + path.string());
  save_weights(p, os);
}

inline ModelParams<float> load_weights(std::istream& is, const std::optional<ModelConfig>& expected = std::nullopt) {
  return from_records(nn::read_weight_records(is), expected);
}

inline ModelParams<float> load_weights(const std::filesystem::path& path,
                                       const std::optional<ModelConfig>& expected = std::nullopt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw WeightsError(WeightsErrorCode::kIo, "cannot open " + path.string());
  return load_weights(is, expected);
}

}  // namespace gaze9::estimator
