#include "stacknet/datagen.hpp"

#include <cmath>
#include <cstdio>

#include "stacknet/errors.hpp"
#include "stacknet/rng.hpp"

namespace stacknet {
namespace {

Utterance generate_utterance(const GenConfig& cfg, const Matrix& means, Rng rng, std::string id) {
  const std::size_t span = cfg.max_frames - cfg.min_frames + 1;
  const std::size_t frames = cfg.min_frames + static_cast<std::size_t>(rng.below(span));
  const std::size_t m = cfg.num_monophones;

  Utterance utt;
  utt.id = std::move(id);
  utt.frames = Matrix(frames, cfg.feature_dim);
  utt.labels.resize(frames);

  std::size_t mono = rng.below(m);
  for (std::size_t t = 0; t < frames; ++t) {
    if (t > 0 && m > 1 && !(rng.uniform() < cfg.self_transition_prob))
      mono = (mono + 1 + rng.below(m - 1)) % m;
    const std::size_t senone = mono * cfg.senones_per_monophone + rng.below(cfg.senones_per_monophone);
    utt.labels[t] = static_cast<std::uint32_t>(senone);
    auto row = utt.frames.row(t);
    const auto mean = means.row(senone);
    for (std::size_t d = 0; d < cfg.feature_dim; ++d)
      row[d] = mean[d] + cfg.noise_sigma * rng.normal();
  }
  return utt;
}

Corpus generate_split(const GenConfig& cfg, const Matrix& means, const Rng& split_rng,
                      std::size_t count, Split split) {
  Corpus corpus;
  corpus.num_senones = cfg.num_senones();
  corpus.feature_dim = cfg.feature_dim;
  corpus.split = split;
  corpus.utterances.reserve(count);
  for (std::size_t u = 0; u < count; ++u) {
    char id[32];
    std::snprintf(id, sizeof id, "%s-%05zu", to_string(split), u);
    corpus.utterances.push_back(generate_utterance(cfg, means, split_rng.split(u), id));
  }
  return corpus;
}

}  // namespace

void GenConfig::validate() const {
  if (num_monophones < 1) throw ConfigError("num_monophones must be at least 1");
  if (senones_per_monophone < 1) throw ConfigError("senones_per_monophone must be at least 1");
  if (feature_dim < 1) throw ConfigError("feature_dim must be at least 1");
  if (!(self_transition_prob > 0.0 && self_transition_prob <= 1.0))
    throw ConfigError("self_transition_prob must be in (0, 1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ConfigError("noise_sigma must be a finite non-negative number");
  if (train_utterances < 1) throw ConfigError("train_utterances must be at least 1");
  if (dev_utterances < 1) throw ConfigError("dev_utterances must be at least 1");
  if (test_utterances < 1) throw ConfigError("test_utterances must be at least 1");
  if (min_frames < 1) throw ConfigError("min_frames must be at least 1");
  if (max_frames < min_frames) throw ConfigError("max_frames must be >= min_frames");
}

GeneratedData generate_corpus(const GenConfig& cfg) {
  cfg.validate();
  const Rng root = Rng(cfg.seed).stream(Stream::kData);

  GeneratedData out;
  Rng mean_rng = root.split(0);
  out.senone_means = Matrix(cfg.num_senones(), cfg.feature_dim);
  for (double& v : out.senone_means.data) v = mean_rng.uniform(-2.0, 2.0);

  std::vector<std::uint32_t> mapping(cfg.num_senones());
  for (std::size_t s = 0; s < mapping.size(); ++s)
    mapping[s] = static_cast<std::uint32_t>(s / cfg.senones_per_monophone);
  out.senone_map = SenoneMap(std::move(mapping));

  out.train = generate_split(cfg, out.senone_means, root.split(1), cfg.train_utterances, Split::kTrain);
  out.dev = generate_split(cfg, out.senone_means, root.split(2), cfg.dev_utterances, Split::kDev);
  out.test = generate_split(cfg, out.senone_means, root.split(3), cfg.test_utterances, Split::kTest);
  return out;
}

}  // namespace stacknet
