#pragma once

#include <cstddef>
#include <cstdint>

#include "stacknet/compression.hpp"
#include "stacknet/features.hpp"
#include "stacknet/nn.hpp"

namespace stacknet {

/// Synthetic corpus whose monophone labels follow a sticky Markov chain and
/// whose features are Gaussian around a fixed per-senone mean.
struct GenConfig {
  std::size_t num_monophones = 8;
  std::size_t senones_per_monophone = 4;
  std::size_t feature_dim = 10;
  double self_transition_prob = 0.85;
  double noise_sigma = 1.0;
  std::size_t train_utterances = 200;
  std::size_t dev_utterances = 50;
  std::size_t test_utterances = 50;
  std::size_t min_frames = 100;
  std::size_t max_frames = 200;
  std::uint64_t seed = 1;

  std::size_t num_senones() const { return num_monophones * senones_per_monophone; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GeneratedData {
  Corpus train;
  Corpus dev;
  Corpus test;
  SenoneMap senone_map;  // senone s belongs to monophone s / senones_per_monophone
  Matrix senone_means;   // S x D
};

/// Deterministic in `cfg.seed`. Each split and each utterance draws from its
/// own substream, so splits never share random draws.
GeneratedData generate_corpus(const GenConfig& cfg);

}  // namespace stacknet
