#pragma once

#include <cstddef>
#include <vector>

#include "stacknet/rdsn.hpp"

namespace stacknet {

struct BpsnConfig {
  std::size_t k = 9;
  std::size_t passes = 2;

  void validate() const;
};

/// passes x (T x S). Pass 1 feeds k*M zeros on every frame; pass p feeds the
/// compressed pass p-1 outputs of frames t-1 .. t-k (zeros before frame 0).
/// Uses the same RdsnModel as the recurrent scheme.
std::vector<Matrix> bpsn_forward_utterance(const RdsnModel& model, const Utterance& utt,
                                           const SpliceConfig& splice, const BpsnConfig& cfg,
                                           DropoutMode mode, Rng* dropout_rng = nullptr);

/// One pass given the previous pass's compressed outputs (T x M), or all-zero
/// recurrent inputs when `previous` is null.
Matrix bpsn_pass(const RdsnModel& model, const Utterance& utt, const SpliceConfig& splice,
                 const Matrix* previous, DropoutMode mode, Rng* dropout_rng = nullptr);

struct BpsnEvalMetrics {
  std::vector<EvalMetrics> per_pass;

  const EvalMetrics& final_pass() const { return per_pass.back(); }
};

BpsnEvalMetrics evaluate_bpsn(const RdsnModel& model, const Corpus& corpus,
                              const SpliceConfig& splice, const BpsnConfig& cfg);

/// One epoch minimizing the final-pass cross-entropy. Earlier passes are
/// recomputed per utterance in eval mode with the weights current at the
/// start of that utterance and are held constant.
TrainMetrics bpsn_train_epoch(RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                              const BpsnConfig& cfg, const TrainConfig& train_cfg,
                              TrainStreams& streams);

}  // namespace stacknet
