#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaze9/augment/augment.hpp"
#include "gaze9/estimator/evaluate.hpp"
#include "gaze9/estimator/model.hpp"
#include "gaze9/nn/sgd.hpp"
#include "gaze9/nn/softmax.hpp"

namespace gaze9::estimator {

struct TrainOptions {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int lr_halving_period = 10;        // epochs between learning-rate halvings
  std::size_t samples_per_epoch = 0; // 0: the whole (expanded) training set
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double val_top1 = 0;
};

struct TrainResult {
  ModelParams<float> params;  // best validation top-1
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t batch_id, const std::string& what)
      : std::runtime_error("batch " + std::to_string(batch_id) + ": " + what), batch_id_(batch_id) {}
  std::size_t batch_id() const noexcept { return batch_id_; }

 private:
  std::size_t batch_id_;
};

/// Owns the optimizer state for one model; one call is one SGD step.
class Trainer {
 public:
  Trainer(ModelParams<float>& params, double learning_rate, double momentum)
      : params_(params), sgd_(static_cast<float>(learning_rate), static_cast<float>(momentum)) {}

  void set_learning_rate(double lr) { sgd_.set_learning_rate(static_cast<float>(lr)); }

  /// Mean cross-entropy of the batch before the update.
  double step(const Tensor<float>& batch, std::span<const std::size_t> labels, std::size_t batch_id = 0) {
    const Tensor<float> logits = train_forward(params_, batch, cache_);
    Tensor<float> grad;
    const float loss = nn::softmax_cross_entropy_batch(logits, labels, grad);
    if (!std::isfinite(loss)) throw TrainingError(batch_id, "non-finite loss");
    auto grads = backward(params_, cache_, grad);
    auto learnable = params_.learnable();
    try {
      sgd_.step(learnable, grads);
    } catch (const nn::NonFiniteGradient& e) {
      throw TrainingError(batch_id, e.what());
    }
    return loss;
  }

 private:
  ModelParams<float>& params_;
  nn::Sgd<float> sgd_;
  ForwardCache<float> cache_;
};

/// Mini-batch SGD over the augmented training stream; keeps the parameters
/// with the best validation top-1.
inline TrainResult train(ModelParams<float> params, const std::vector<synth::LabeledStrip>& train_set,
                         const std::vector<synth::LabeledStrip>& val_set, const augment::AugmentConfig& augment_config,
                         const TrainOptions& options, std::uint64_t seed,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train and val splits must be non-empty");
  if (options.epochs < 1 || options.batch_size < 1) throw std::invalid_argument("epochs and batch size must be >= 1");

  augment::TrainingStream stream(train_set, augment_config, derive_seed(seed, {0x57EA}), options.samples_per_epoch);
  Trainer trainer(params, options.learning_rate, options.momentum);
  TrainResult result{params, {}, 0};
  double best_val = -1.0;
  std::size_t batch_id = 0;

  std::vector<synth::LabeledStrip> items;
  std::vector<const EyeStrip*> ptrs;
  std::vector<std::size_t> labels;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const int halvings = options.lr_halving_period > 0 ? (epoch - 1) / options.lr_halving_period : 0;
    trainer.set_learning_rate(options.learning_rate * std::pow(0.5, halvings));
    stream.begin_epoch(static_cast<std::size_t>(epoch));
    double loss_sum = 0;
    std::size_t loss_n = 0;
    for (;;) {
      items.clear();
      while (items.size() < static_cast<std::size_t>(options.batch_size)) {
        auto item = stream.next();
        if (!item) break;
        items.push_back(std::move(*item));
      }
      if (items.empty()) break;
      ptrs.clear();
      labels.clear();
      for (const auto& it : items) {
        ptrs.push_back(&it.strip);
        labels.push_back(static_cast<std::size_t>(it.label.code()));
      }
      const double loss = trainer.step(make_batch<float>(ptrs, params.config), labels, batch_id++);
      loss_sum += loss * static_cast<double>(items.size());
      loss_n += items.size();
    }
    EpochStats stats{epoch, loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0, evaluate(params, val_set).top1};
    result.history.push_back(stats);
    if (stats.val_top1 > best_val) {
      best_val = stats.val_top1;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

inline TrainResult train(ModelParams<float> params, const synth::DatasetManifest& manifest,
                         const augment::AugmentConfig& augment_config, const TrainOptions& options, std::uint64_t seed,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  return train(std::move(params), synth::load_split(manifest, synth::Split::kTrain),
               synth::load_split(manifest, synth::Split::kVal), augment_config, options, seed, on_epoch);
}

/// History as CSV: epoch,loss,val_top1.
inline void write_history_csv(std::ostream& os, const std::vector<EpochStats>& history) {
  os << "epoch,loss,val_top1\n";
  for (const auto& h : history) os << h.epoch << ',' << h.train_loss << ',' << h.val_top1 << '\n';
}

}  // namespace gaze9::estimator
