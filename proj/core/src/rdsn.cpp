#include "stacknet/rdsn.hpp"

#include <algorithm>
#include <cmath>

#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

void check_compatible(const RdsnModel& model, const Utterance& utt, const SpliceConfig& splice,
                      std::size_t k) {
  if (k != model.k)
    throw ShapeError("config k = " + std::to_string(k) + " but model has k = " +
                     std::to_string(model.k));
  const std::size_t spliced = splice.spliced_dim(utt.feature_dim());
  if (spliced != model.spliced_dim())
    throw ShapeError("utterance '" + utt.id + "' splices to " + std::to_string(spliced) +
                     " values, model expects " + std::to_string(model.spliced_dim()));
  for (auto l : utt.labels)
    if (l >= model.senone_map.num_senones())
      throw ShapeError("utterance '" + utt.id + "' has label " + std::to_string(l) +
                       " outside the model's " + std::to_string(model.senone_map.num_senones()) +
                       " senones");
}

// Shared frame loop of inference and training. `on_frame` sees the forward
// trace of every frame before its feedback is pushed.
template <typename OnFrame>
void run_frames(const RdsnModel& model, const Utterance& utt, const SpliceConfig& splice,
                const RdsnConfig& cfg, DropoutMode mode, Rng* dropout_rng, OnFrame&& on_frame) {
  check_compatible(model, utt, splice, cfg.k);
  RecurrentBuffer buffer(model.k, model.senone_map.num_monophones());
  std::vector<double> input;
  std::vector<double> feedback;
  input.reserve(model.net.input_dim());
  for (std::size_t t = 0; t < utt.num_frames(); ++t) {
    input.clear();
    splice_into(utt, splice, t, input);
    const auto recurrent = buffer.flat();
    input.insert(input.end(), recurrent.begin(), recurrent.end());
    const ForwardTrace trace = forward(model.net, input, mode, dropout_rng);
    if (cfg.feedback == FeedbackMode::kFreeRunning)
      compress_into(trace.posterior, model.senone_map, feedback);
    else
      feedback = one_hot_compress(utt.labels[t], model.senone_map);
    on_frame(t, trace, feedback);
    buffer.push(feedback);
  }
}

}  // namespace

const char* to_string(FeedbackMode m) {
  return m == FeedbackMode::kFreeRunning ? "free_running" : "teacher_forced";
}

void RdsnConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
}

SpliceConfig effective_splice(const SpliceConfig& splice, bool causal) {
  SpliceConfig s = splice;
  if (causal) s.right = 0;
  return s;
}

void RdsnModel::validate() const {
  if (senone_map.num_senones() == 0) throw ShapeError("recurrent model has no senone map");
  if (net.output_dim() != senone_map.num_senones())
    throw ShapeError("network output width " + std::to_string(net.output_dim()) +
                     " differs from the senone map's " +
                     std::to_string(senone_map.num_senones()) + " senones");
  if (net.input_dim() <= recurrent_dim())
    throw ShapeError("network input width " + std::to_string(net.input_dim()) +
                     " leaves no room for spliced features next to k*M = " +
                     std::to_string(recurrent_dim()) + " recurrent inputs");
}

void RecurrentBuffer::push(std::span<const double> v) {
  if (v.size() != dim_)
    throw ShapeError("recurrent buffer slot has width " + std::to_string(dim_) + ", got " +
                     std::to_string(v.size()));
  if (k_ == 0) return;
  std::copy_backward(slots_.begin(), slots_.end() - static_cast<std::ptrdiff_t>(dim_), slots_.end());
  std::copy(v.begin(), v.end(), slots_.begin());
}

void RecurrentBuffer::reset() {
  std::fill(slots_.begin(), slots_.end(), 0.0);
}

RdsnModel warm_start(const Mlp& baseline, std::size_t k, const SenoneMap& map, Rng& init_rng) {
  if (k < 1) throw ShapeError("warm start needs k >= 1");
  if (baseline.output_dim() != map.num_senones())
    throw ShapeError("baseline output width " + std::to_string(baseline.output_dim()) +
                     " differs from the senone map's " + std::to_string(map.num_senones()) +
                     " senones");
  std::vector<DenseLayer> layers = baseline.layers();
  DenseLayer& first = layers.front();
  const std::size_t extra = k * map.num_monophones();
  const std::size_t old_cols = first.weights.cols;
  const std::size_t new_cols = old_cols + extra;

  // Glorot limit of the widened layer.
  const double limit = std::sqrt(6.0 / static_cast<double>(first.weights.rows + new_cols));
  Matrix widened(first.weights.rows, new_cols);
  for (std::size_t r = 0; r < widened.rows; ++r) {
    const auto src = first.weights.row(r);
    auto dst = widened.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t c = old_cols; c < new_cols; ++c) dst[c] = init_rng.uniform(-limit, limit);
  }
  first.weights = std::move(widened);

  RdsnModel model{Mlp(std::move(layers)), k, map};
  model.validate();
  return model;
}

RdsnModel random_rdsn(std::size_t spliced_dim, std::span<const std::size_t> hidden, std::size_t k,
                      const SenoneMap& map, double dropout_rate, Rng& init_rng) {
  RdsnModel model{Mlp::random(spliced_dim + k * map.num_monophones(), hidden, map.num_senones(),
                              dropout_rate, init_rng),
                  k, map};
  model.validate();
  return model;
}

void zero_recurrent_columns(RdsnModel& model) {
  DenseLayer& first = model.net.mutable_layers().front();
  const std::size_t begin = model.spliced_dim();
  for (std::size_t r = 0; r < first.weights.rows; ++r) {
    auto row = first.weights.row(r);
    std::fill(row.begin() + static_cast<std::ptrdiff_t>(begin), row.end(), 0.0);
  }
}

RdsnOutput rdsn_forward_utterance(const RdsnModel& model, const Utterance& utt,
                                  const SpliceConfig& splice, const RdsnConfig& cfg,
                                  DropoutMode mode, Rng* dropout_rng) {
  RdsnOutput out{Matrix(utt.num_frames(), model.net.output_dim()),
                 Matrix(utt.num_frames(), model.senone_map.num_monophones())};
  run_frames(model, utt, splice, cfg, mode, dropout_rng,
             [&](std::size_t t, const ForwardTrace& trace, const std::vector<double>& feedback) {
               std::copy(trace.posterior.begin(), trace.posterior.end(), out.posteriors.row(t).begin());
               std::copy(feedback.begin(), feedback.end(), out.compressed_trace.row(t).begin());
             });
  return out;
}

EvalMetrics evaluate_rdsn(const RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                          const RdsnConfig& cfg) {
  MetricAccumulator acc;
  for (const auto& utt : corpus.utterances) {
    const RdsnOutput out = rdsn_forward_utterance(model, utt, splice, cfg, DropoutMode::kEval);
    for (std::size_t t = 0; t < utt.num_frames(); ++t) acc.add(out.posteriors.row(t), utt.labels[t]);
  }
  return acc.result();
}

TrainMetrics rdsn_train_epoch(RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                              const RdsnConfig& cfg, const TrainConfig& train_cfg,
                              TrainStreams& streams) {
  cfg.validate();
  MinibatchSgd sgd(model.net, train_cfg);
  MetricAccumulator acc;
  for (std::size_t ui : shuffled_order(corpus.utterances.size(), streams.order)) {
    const Utterance& utt = corpus.utterances[ui];
    run_frames(model, utt, splice, cfg, DropoutMode::kTrain, &streams.dropout,
               [&](std::size_t t, const ForwardTrace& trace, const std::vector<double>&) {
                 acc.add(trace.posterior, utt.labels[t]);
                 sgd.add(trace, utt.labels[t]);
               });
  }
  sgd.flush();
  const EvalMetrics m = acc.result();
  return {m.mean_ce, m.frame_accuracy, m.frames, sgd.updates(), {}};
}

}  // namespace stacknet
