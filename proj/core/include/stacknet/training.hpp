#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stacknet/features.hpp"
#include "stacknet/nn.hpp"
#include "stacknet/rng.hpp"

namespace stacknet {

/// Mean cross-entropy and frame accuracy over a set of frames. An empty set
/// reports zero frames, zero CE, and zero accuracy.
struct EvalMetrics {
  double mean_ce = 0.0;
  double frame_accuracy = 0.0;
  std::size_t frames = 0;
};

/// Running totals for EvalMetrics. Sums are taken in frame order.
class MetricAccumulator {
 public:
  /// Throws NumericError if the frame's cross-entropy is not finite.
  void add(std::span<const double> posterior, std::size_t label);
  void add(double ce, bool correct);
  EvalMetrics result() const;

 private:
  double ce_sum_ = 0.0;
  std::size_t correct_ = 0;
  std::size_t frames_ = 0;
};

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Summary of one training epoch, measured under training conditions
/// (dropout on, weights changing between minibatches).
struct TrainMetrics {
  double train_ce = 0.0;
  double train_accuracy = 0.0;
  std::size_t frames = 0;
  std::size_t updates = 0;
  /// BPSN only: train CE of every pass, earlier passes in eval mode.
  std::vector<double> pass_ce;
};

/// Random streams consumed by one epoch: utterance order and dropout masks.
struct TrainStreams {
  Rng order;
  Rng dropout;

  /// Streams for `epoch` of a run seeded with `seed`.
  static TrainStreams for_epoch(std::uint64_t seed, std::size_t epoch);
};

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng);

/// Accumulates per-frame gradients and applies the mean gradient of every
/// `minibatch_size` frames with one sgd_step. Gradients of a minibatch are
/// all taken against the weights in effect when the minibatch started.
class MinibatchSgd {
 public:
  MinibatchSgd(Mlp& model, const TrainConfig& cfg);

  /// Backward pass for one frame; may trigger an update.
  void add(const ForwardTrace& trace, std::size_t label);
  /// Applies any partial minibatch.
  void flush();
  std::size_t updates() const { return updates_; }

 private:
  Mlp& model_;
  double learning_rate_;
  std::size_t minibatch_size_;
  Gradients pending_;
  std::size_t pending_frames_ = 0;
  std::size_t updates_ = 0;
};

/// Sets the dropout rate of every hidden layer.
void set_hidden_dropout(Mlp& model, double rate);

/// Per-frame posteriors (T x S) of a plain feedforward model on spliced features.
Matrix baseline_forward_utterance(const Mlp& model, const Utterance& utt, const SpliceConfig& splice,
                                  DropoutMode mode, Rng* dropout_rng = nullptr);

EvalMetrics evaluate_baseline(const Mlp& model, const Corpus& corpus, const SpliceConfig& splice);

/// One SGD epoch over the shuffled utterances of `corpus`.
TrainMetrics baseline_train_epoch(Mlp& model, const Corpus& corpus, const SpliceConfig& splice,
                                  const TrainConfig& train_cfg, TrainStreams& streams);

}  // namespace stacknet
