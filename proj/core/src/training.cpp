#include "stacknet/training.hpp"

#include <cmath>
#include <string>

#include "stacknet/errors.hpp"

namespace stacknet {

void MetricAccumulator::add(std::span<const double> posterior, std::size_t label) {
  add(cross_entropy(posterior, label), argmax(posterior) == label);
}

void MetricAccumulator::add(double ce, bool correct) {
  if (!std::isfinite(ce))
    throw NumericError("non-finite cross-entropy after " + std::to_string(frames_) + " frames");
  ce_sum_ += ce;
  correct_ += correct ? 1 : 0;
  ++frames_;
}

EvalMetrics MetricAccumulator::result() const {
  if (frames_ == 0) return {};
  const double n = static_cast<double>(frames_);
  return {ce_sum_ / n, static_cast<double>(correct_) / n, frames_};
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

TrainStreams TrainStreams::for_epoch(std::uint64_t seed, std::size_t epoch) {
  const Rng root(seed);
  return {root.stream(Stream::kOrder).split(epoch), root.stream(Stream::kDropout).split(epoch)};
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

MinibatchSgd::MinibatchSgd(Mlp& model, const TrainConfig& cfg)
    : model_(model),
      learning_rate_(cfg.learning_rate),
      minibatch_size_(cfg.minibatch_size),
      pending_(Gradients::zeros_like(model)) {
  cfg.validate();
}

void MinibatchSgd::add(const ForwardTrace& trace, std::size_t label) {
  pending_.accumulate(backward(model_, trace, label));
  if (++pending_frames_ == minibatch_size_) flush();
}

void MinibatchSgd::flush() {
  if (pending_frames_ == 0) return;
  pending_.scale(1.0 / static_cast<double>(pending_frames_));
  sgd_step(model_, pending_, learning_rate_);
  pending_.scale(0.0);
  pending_frames_ = 0;
  ++updates_;
}

void set_hidden_dropout(Mlp& model, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("dropout rate must be in [0, 1)");
  auto& layers = model.mutable_layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) layers[i].dropout_rate = rate;
}

Matrix baseline_forward_utterance(const Mlp& model, const Utterance& utt, const SpliceConfig& splice,
                                  DropoutMode mode, Rng* dropout_rng) {
  Matrix posteriors(utt.num_frames(), model.output_dim());
  std::vector<double> input;
  for (std::size_t t = 0; t < utt.num_frames(); ++t) {
    input.clear();
    splice_into(utt, splice, t, input);
    const auto p = forward(model, input, mode, dropout_rng).posterior;
    std::copy(p.begin(), p.end(), posteriors.row(t).begin());
  }
  return posteriors;
}

EvalMetrics evaluate_baseline(const Mlp& model, const Corpus& corpus, const SpliceConfig& splice) {
  MetricAccumulator acc;
  for (const auto& utt : corpus.utterances) {
    const Matrix p = baseline_forward_utterance(model, utt, splice, DropoutMode::kEval);
    for (std::size_t t = 0; t < utt.num_frames(); ++t) acc.add(p.row(t), utt.labels[t]);
  }
  return acc.result();
}

TrainMetrics baseline_train_epoch(Mlp& model, const Corpus& corpus, const SpliceConfig& splice,
                                  const TrainConfig& train_cfg, TrainStreams& streams) {
  MinibatchSgd sgd(model, train_cfg);
  MetricAccumulator acc;
  std::vector<double> input;
  for (std::size_t ui : shuffled_order(corpus.utterances.size(), streams.order)) {
    const Utterance& utt = corpus.utterances[ui];
    for (std::size_t t = 0; t < utt.num_frames(); ++t) {
      input.clear();
      splice_into(utt, splice, t, input);
      const ForwardTrace trace = forward(model, input, DropoutMode::kTrain, &streams.dropout);
      acc.add(trace.posterior, utt.labels[t]);
      sgd.add(trace, utt.labels[t]);
    }
  }
  sgd.flush();
  const EvalMetrics m = acc.result();
  return {m.mean_ce, m.frame_accuracy, m.frames, sgd.updates(), {}};
}

}  // namespace stacknet
