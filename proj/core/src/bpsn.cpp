#include "stacknet/bpsn.hpp"

#include <algorithm>

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
}

// Input of frame t: spliced features, then compressed previous-pass outputs
// of frames t-1 .. t-k, zeros where t-j < 0 or there is no previous pass.
void build_input(const RdsnModel& model, const Utterance& utt, const SpliceConfig& splice,
                 const Matrix* previous, std::size_t t, std::vector<double>& input) {
  input.clear();
  splice_into(utt, splice, t, input);
  const std::size_t m = model.senone_map.num_monophones();
  for (std::size_t j = 1; j <= model.k; ++j) {
    if (previous != nullptr && t >= j) {
      const auto row = previous->row(t - j);
      input.insert(input.end(), row.begin(), row.end());
    } else {
      input.insert(input.end(), m, 0.0);
    }
  }
}

Matrix compress_rows(const Matrix& posteriors, const SenoneMap& map) {
  Matrix out(posteriors.rows, map.num_monophones());
  std::vector<double> c;
  for (std::size_t t = 0; t < posteriors.rows; ++t) {
    compress_into(posteriors.row(t), map, c);
    std::copy(c.begin(), c.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace

void BpsnConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (passes < 2) throw ConfigError("passes must be at least 2");
}

Matrix bpsn_pass(const RdsnModel& model, const Utterance& utt, const SpliceConfig& splice,
                 const Matrix* previous, DropoutMode mode, Rng* dropout_rng) {
  check_compatible(model, utt, splice, model.k);
  if (previous != nullptr &&
      (previous->rows != utt.num_frames() || previous->cols != model.senone_map.num_monophones()))
    throw ShapeError("previous pass outputs do not match utterance '" + utt.id + "'");
  Matrix posteriors(utt.num_frames(), model.net.output_dim());
  std::vector<double> input;
  for (std::size_t t = 0; t < utt.num_frames(); ++t) {
    build_input(model, utt, splice, previous, t, input);
    const auto p = forward(model.net, input, mode, dropout_rng).posterior;
    std::copy(p.begin(), p.end(), posteriors.row(t).begin());
  }
  return posteriors;
}

std::vector<Matrix> bpsn_forward_utterance(const RdsnModel& model, const Utterance& utt,
                                           const SpliceConfig& splice, const BpsnConfig& cfg,
                                           DropoutMode mode, Rng* dropout_rng) {
  cfg.validate();
  check_compatible(model, utt, splice, cfg.k);
  std::vector<Matrix> passes;
  passes.reserve(cfg.passes);
  Matrix compressed;
  for (std::size_t p = 0; p < cfg.passes; ++p) {
    passes.push_back(bpsn_pass(model, utt, splice, p == 0 ? nullptr : &compressed, mode, dropout_rng));
    compressed = compress_rows(passes.back(), model.senone_map);
  }
  return passes;
}

BpsnEvalMetrics evaluate_bpsn(const RdsnModel& model, const Corpus& corpus,
                              const SpliceConfig& splice, const BpsnConfig& cfg) {
  cfg.validate();
  std::vector<MetricAccumulator> acc(cfg.passes);
  for (const auto& utt : corpus.utterances) {
    const auto passes = bpsn_forward_utterance(model, utt, splice, cfg, DropoutMode::kEval);
    for (std::size_t p = 0; p < cfg.passes; ++p)
      for (std::size_t t = 0; t < utt.num_frames(); ++t) acc[p].add(passes[p].row(t), utt.labels[t]);
  }
  BpsnEvalMetrics out;
  for (const auto& a : acc) out.per_pass.push_back(a.result());
  return out;
}

TrainMetrics bpsn_train_epoch(RdsnModel& model, const Corpus& corpus, const SpliceConfig& splice,
                              const BpsnConfig& cfg, const TrainConfig& train_cfg,
                              TrainStreams& streams) {
  cfg.validate();
  MinibatchSgd sgd(model.net, train_cfg);
  std::vector<MetricAccumulator> pass_acc(cfg.passes);
  std::vector<double> input;
  for (std::size_t ui : shuffled_order(corpus.utterances.size(), streams.order)) {
    const Utterance& utt = corpus.utterances[ui];
    check_compatible(model, utt, splice, cfg.k);

    Matrix compressed;
    for (std::size_t p = 0; p + 1 < cfg.passes; ++p) {
      const Matrix posteriors =
          bpsn_pass(model, utt, splice, p == 0 ? nullptr : &compressed, DropoutMode::kEval);
      for (std::size_t t = 0; t < utt.num_frames(); ++t)
        pass_acc[p].add(posteriors.row(t), utt.labels[t]);
      compressed = compress_rows(posteriors, model.senone_map);
    }

    // Final pass trains; its inputs are frozen for the whole utterance.
    for (std::size_t t = 0; t < utt.num_frames(); ++t) {
      build_input(model, utt, splice, &compressed, t, input);
      const ForwardTrace trace = forward(model.net, input, DropoutMode::kTrain, &streams.dropout);
      pass_acc.back().add(trace.posterior, utt.labels[t]);
      sgd.add(trace, utt.labels[t]);
    }
  }
  sgd.flush();

  TrainMetrics out;
  const EvalMetrics final_pass = pass_acc.back().result();
  out.train_ce = final_pass.mean_ce;
  out.train_accuracy = final_pass.frame_accuracy;
  out.frames = final_pass.frames;
  out.updates = sgd.updates();
  for (const auto& a : pass_acc) out.pass_ce.push_back(a.result().mean_ce);
  return out;
}

}  // namespace stacknet
