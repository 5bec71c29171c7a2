#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stacknet/compression.hpp"
#include "stacknet/features.hpp"
#include "stacknet/nn.hpp"
#include "stacknet/training.hpp"

namespace stacknet {

enum class FeedbackMode { kFreeRunning, kTeacherForced };

const char* to_string(FeedbackMode m);

struct RdsnConfig {
  std::size_t k = 9;
  /// Drops the right splicing context so frame t never sees x_{t+1..}.
  bool causal = false;
  FeedbackMode feedback = FeedbackMode::kFreeRunning;

  void validate() const;
};

/// Splice settings actually used by a recurrent model under `cfg`.
SpliceConfig effective_splice(const SpliceConfig& splice, bool causal);

/// Network whose input is [spliced features | k compressed previous outputs].
struct RdsnModel {
  Mlp net;
  std::size_t k = 0;
  SenoneMap senone_map;

  std::size_t recurrent_dim() const { return k * senone_map.num_monophones(); }
  std::size_t spliced_dim() const { return net.input_dim() - recurrent_dim(); }

  /// Throws ShapeError unless input_dim >= k*M and output_dim == S.
  void validate() const;

  friend bool operator==(const RdsnModel&, const RdsnModel&) = default;
};

/// The last k compressed posteriors, most recent first. Starts all-zero.
class RecurrentBuffer {
 public:
  RecurrentBuffer(std::size_t k, std::size_t dim) : k_(k), dim_(dim), slots_(k * dim, 0.0) {}

  /// Shifts every slot back by one and stores `v` in slot 0; the oldest slot
  /// is dropped. Throws ShapeError if v.size() != dim.
  void push(std::span<const double> v);
  void reset();

  std::span<const double> slot(std::size_t i) const { return {slots_.data() + i * dim_, dim_}; }
  /// All slots concatenated, slot 0 first.
  std::span<const double> flat() const { return slots_; }

  std::size_t k() const { return k_; }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t k_;
  std::size_t dim_;
  std::vector<double> slots_;
};

/// Copies `baseline` and widens its first layer by k*M input columns, drawn
/// with the same Glorot-uniform scheme (fan-in of the widened layer).
/// Throws ShapeError if the baseline output width differs from S.
RdsnModel warm_start(const Mlp& baseline, std::size_t k, const SenoneMap& map, Rng& init_rng);

/// Fresh random recurrent model.
RdsnModel random_rdsn(std::size_t spliced_dim, std::span<const std::size_t> hidden, std::size_t k,
                      const SenoneMap& map, double dropout_rate, Rng& init_rng);

/// Zeroes the first-layer columns that read the recurrent inputs.
void zero_recurrent_columns(RdsnModel& model);

struct RdsnOutput {
  Matrix posteriors;        // T x S
  Matrix compressed_trace;  // T x M, row t is what frame t pushed
};

/// Sequential per-frame pass. The buffer starts all-zero; after each frame
/// it receives compress(posterior) (free running) or the one-hot compressed
/// label (teacher forced). Throws ShapeError on dimension mismatches.
RdsnOutput rdsn_forward_utterance(const RdsnModel& model, const Utterance& utt,
                                  const SpliceConfig& splice, const RdsnConfig& cfg,
                                  DropoutMode mode, Rng* dropout_rng = nullptr);

/// Eval-mode metrics over a corpus.
EvalMetrics evaluate_rdsn(const RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                          const RdsnConfig& cfg);

/// One epoch of frame-level SGD. Recurrent inputs are constants: no gradient
/// flows back through the feedback path to earlier frames.
TrainMetrics rdsn_train_epoch(RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                              const RdsnConfig& cfg, const TrainConfig& train_cfg,
                              TrainStreams& streams);

}  // namespace stacknet
