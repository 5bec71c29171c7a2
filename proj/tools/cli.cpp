#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "stacknet/checkpoint.hpp"
#include "stacknet/compression.hpp"
#include "stacknet/errors.hpp"
#include "stacknet/training.hpp"

namespace stacknet::cli {

namespace fs = std::filesystem;

void apply_seed_override(std::uint64_t& seed) {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return;
  std::string s(env);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(s);
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(std::string(kSeedEnv) + ": not an unsigned integer: '" + s + "'");
  }
  seed = v;
}

GenDataConfig parse_gen_config(KeyValueConfig& kv) {
  GenDataConfig cfg;
  cfg.output_dir = kv.require_string("output_dir");
  GenConfig& g = cfg.gen;
  kv.take_into("num_monophones", g.num_monophones);
  kv.take_into("senones_per_monophone", g.senones_per_monophone);
  kv.take_into("feature_dim", g.feature_dim);
  kv.take_into("self_transition_prob", g.self_transition_prob);
  kv.take_into("noise_sigma", g.noise_sigma);
  kv.take_into("train_utterances", g.train_utterances);
  kv.take_into("dev_utterances", g.dev_utterances);
  kv.take_into("test_utterances", g.test_utterances);
  kv.take_into("min_frames", g.min_frames);
  kv.take_into("max_frames", g.max_frames);
  kv.take_into("seed", g.seed);
  kv.finish();
  apply_seed_override(g.seed);
  g.validate();
  return cfg;
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBaseline: return "baseline";
    case ModelKind::kRdsn: return "rdsn";
    case ModelKind::kBpsn: return "bpsn";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "baseline") return ModelKind::kBaseline;
  if (s == "rdsn") return ModelKind::kRdsn;
  if (s == "bpsn") return ModelKind::kBpsn;
  throw ConfigError("model: expected baseline, rdsn or bpsn, got '" + s + "'");
}

namespace {

FeedbackMode parse_feedback(const std::string& s) {
  if (s == "free_running") return FeedbackMode::kFreeRunning;
  if (s == "teacher_forced") return FeedbackMode::kTeacherForced;
  throw ConfigError("feedback_mode: expected free_running or teacher_forced, got '" + s + "'");
}

}  // namespace

SpliceConfig RunConfig::model_splice() const {
  return kind == ModelKind::kBaseline ? splice : effective_splice(splice, rdsn.causal);
}

RunConfig parse_run_config(KeyValueConfig& kv) {
  RunConfig cfg;
  cfg.kind = parse_model_kind(kv.require_string("model"));
  cfg.train_corpus = kv.require_string("train_corpus");
  cfg.dev_corpus = kv.require_string("dev_corpus");
  cfg.output_dir = kv.require_string("output_dir");
  if (auto v = kv.take_string("senone_map")) cfg.senone_map = *v;
  if (auto v = kv.take_string("init_checkpoint")) cfg.init_checkpoint = *v;

  kv.take_into("learning_rate", cfg.train.learning_rate);
  kv.take_into("epochs", cfg.train.epochs);
  kv.take_into("dropout_rate", cfg.train.dropout_rate);
  kv.take_into("seed", cfg.train.seed);
  kv.take_into("minibatch_size", cfg.train.minibatch_size);
  kv.take_into("hidden_layers", cfg.hidden_layers);
  kv.take_into("hidden_width", cfg.hidden_width);
  kv.take_into("splice_left", cfg.splice.left);
  kv.take_into("splice_right", cfg.splice.right);

  std::size_t k = cfg.rdsn.k;
  kv.take_into("k", k);
  cfg.rdsn.k = k;
  cfg.bpsn.k = k;
  kv.take_into("causal", cfg.rdsn.causal);
  if (auto v = kv.take_string("feedback_mode")) cfg.rdsn.feedback = parse_feedback(*v);
  kv.take_into("passes", cfg.bpsn.passes);
  kv.take_into("zero_recurrent_init", cfg.zero_recurrent_init);
  kv.take_into("log_wall_time", cfg.log_wall_time);
  kv.finish();

  apply_seed_override(cfg.train.seed);
  cfg.train.validate();
  if (cfg.hidden_width == 0) throw ConfigError("hidden_width: must be positive");

  const bool recurrent = cfg.kind != ModelKind::kBaseline;
  if (recurrent) {
    cfg.rdsn.validate();
    if (cfg.kind == ModelKind::kBpsn) cfg.bpsn.validate();
    if (!cfg.senone_map && !cfg.init_checkpoint)
      throw ConfigError(std::string("model = ") + to_string(cfg.kind) +
                        " needs senone_map or init_checkpoint");
  } else {
    if (cfg.zero_recurrent_init) throw ConfigError("zero_recurrent_init: only valid for rdsn or bpsn");
  }
  if (cfg.kind != ModelKind::kRdsn && cfg.rdsn.feedback != FeedbackMode::kFreeRunning)
    throw ConfigError("feedback_mode: only valid for rdsn");

  for (const auto* p : {&cfg.train_corpus, &cfg.dev_corpus})
    if (!fs::exists(*p)) throw Error("no such file: " + p->string());
  if (cfg.senone_map && !fs::exists(*cfg.senone_map))
    throw Error("no such file: " + cfg.senone_map->string());
  if (cfg.init_checkpoint && !fs::exists(*cfg.init_checkpoint))
    throw Error("no such file: " + cfg.init_checkpoint->string());
  return cfg;
}

void write_metrics_csv(const std::vector<EpochMetrics>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << kMetricsHeader << '\n' << std::setprecision(17);
  for (const auto& r : rows)
    f << r.epoch << ',' << r.train_ce << ',' << r.dev_ce << ',' << r.dev_acc << ',' << r.seconds << '\n';
  if (!f) throw Error("write failed: " + path.string());
}

std::vector<EpochMetrics> read_metrics_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != kMetricsHeader)
    throw ParseError(ParseError::Kind::kSyntax, path.string() + ": bad metrics header");
  std::vector<EpochMetrics> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    EpochMetrics r;
    if (!(ss >> r.epoch >> r.train_ce >> r.dev_ce >> r.dev_acc >> r.seconds))
      throw ParseError(ParseError::Kind::kSyntax, path.string() + ": bad metrics row '" + line + "'");
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct Model {
  ModelKind kind;
  std::optional<Mlp> baseline;
  std::optional<RdsnModel> recurrent;
};

std::vector<std::size_t> hidden_sizes(const RunConfig& cfg) {
  return std::vector<std::size_t>(cfg.hidden_layers, cfg.hidden_width);
}

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

Model build_model(const RunConfig& cfg, const Corpus& train) {
  const SpliceConfig splice = cfg.model_splice();
  const std::size_t spliced = splice.spliced_dim(train.feature_dim);
  std::optional<SenoneMap> map;
  if (cfg.senone_map) map = load_map(*cfg.senone_map);
  std::optional<Checkpoint> init;
  if (cfg.init_checkpoint) init = load_checkpoint(*cfg.init_checkpoint);
  Rng init_rng = Rng(cfg.train.seed).stream(Stream::kInit);

  Model m{cfg.kind, std::nullopt, std::nullopt};
  if (cfg.kind == ModelKind::kBaseline) {
    if (init) {
      if (init->is_recurrent())
        throw ShapeError("init_checkpoint is recurrent (k = " + std::to_string(init->k) +
                         "); baseline training needs a baseline checkpoint");
      m.baseline = init->net;
    } else {
      auto hidden = hidden_sizes(cfg);
      m.baseline = Mlp::random(spliced, hidden, train.num_senones, cfg.train.dropout_rate, init_rng);
    }
    if (m.baseline->input_dim() != spliced)
      throw ShapeError("checkpoint input width does not match spliced corpus features: " +
                       dims(m.baseline->input_dim(), spliced));
    if (m.baseline->output_dim() != train.num_senones)
      throw ShapeError("checkpoint senone count does not match corpus: " +
                       dims(m.baseline->output_dim(), train.num_senones));
    if (map && map->num_senones() != train.num_senones)
      throw ShapeError("senone map size does not match corpus: " +
                       dims(map->num_senones(), train.num_senones));
    return m;
  }

  if (init && init->is_recurrent()) {
    RdsnModel r = init->to_rdsn();
    if (r.k != cfg.rdsn.k)
      throw ShapeError("init_checkpoint has k = " + std::to_string(r.k) + " but config has k = " +
                       std::to_string(cfg.rdsn.k));
    if (map && !(*map == r.senone_map))
      throw ShapeError("senone_map differs from the map embedded in init_checkpoint");
    m.recurrent = std::move(r);
  } else {
    if (!map && init) map = init->senone_map;
    if (!map) throw ConfigError("senone_map: required to warm-start from a checkpoint without a map");
    if (init) {
      if (init->net.input_dim() != spliced)
        throw ShapeError("checkpoint input width does not match spliced corpus features: " +
                         dims(init->net.input_dim(), spliced));
      m.recurrent = warm_start(init->net, cfg.rdsn.k, *map, init_rng);
    } else {
      auto hidden = hidden_sizes(cfg);
      m.recurrent = random_rdsn(spliced, hidden, cfg.rdsn.k, *map, cfg.train.dropout_rate, init_rng);
    }
  }
  RdsnModel& r = *m.recurrent;
  if (r.spliced_dim() != spliced)
    throw ShapeError("model spliced input width does not match corpus: " + dims(r.spliced_dim(), spliced));
  if (r.senone_map.num_senones() != train.num_senones)
    throw ShapeError("senone map size does not match corpus: " +
                     dims(r.senone_map.num_senones(), train.num_senones));
  if (cfg.zero_recurrent_init) zero_recurrent_columns(r);
  return m;
}

EvalMetrics evaluate(const Model& m, const Corpus& corpus, const RunConfig& cfg) {
  const SpliceConfig splice = cfg.model_splice();
  switch (m.kind) {
    case ModelKind::kBaseline: return evaluate_baseline(*m.baseline, corpus, splice);
    case ModelKind::kRdsn: {
      RdsnConfig eval_cfg = cfg.rdsn;
      eval_cfg.feedback = FeedbackMode::kFreeRunning;
      return evaluate_rdsn(*m.recurrent, corpus, splice, eval_cfg);
    }
    case ModelKind::kBpsn: return evaluate_bpsn(*m.recurrent, corpus, splice, cfg.bpsn).final_pass();
  }
  return {};
}

void train_epoch(Model& m, const Corpus& corpus, const RunConfig& cfg, std::size_t epoch) {
  const SpliceConfig splice = cfg.model_splice();
  TrainStreams streams = TrainStreams::for_epoch(cfg.train.seed, epoch);
  switch (m.kind) {
    case ModelKind::kBaseline:
      baseline_train_epoch(*m.baseline, corpus, splice, cfg.train, streams);
      break;
    case ModelKind::kRdsn:
      rdsn_train_epoch(*m.recurrent, corpus, splice, cfg.rdsn, cfg.train, streams);
      break;
    case ModelKind::kBpsn:
      bpsn_train_epoch(*m.recurrent, corpus, splice, cfg.bpsn, cfg.train, streams);
      break;
  }
}

Checkpoint to_checkpoint(const Model& m, const RunConfig& cfg) {
  if (m.recurrent) return Checkpoint::from_rdsn(*m.recurrent);
  std::optional<SenoneMap> map;
  if (cfg.senone_map) {
    map = load_map(*cfg.senone_map);
  } else if (cfg.init_checkpoint) {
    map = load_checkpoint(*cfg.init_checkpoint).senone_map;
  }
  return Checkpoint::from_baseline(*m.baseline, std::move(map));
}

}  // namespace

std::vector<EpochMetrics> train(const RunConfig& cfg, std::ostream& log) {
  Corpus train_set = load_corpus(cfg.train_corpus, Split::kTrain);
  Corpus dev_set = load_corpus(cfg.dev_corpus, Split::kDev);
  if (dev_set.feature_dim != train_set.feature_dim)
    throw ShapeError("dev corpus feature dim differs from train corpus: " +
                     dims(dev_set.feature_dim, train_set.feature_dim));
  if (dev_set.num_senones != train_set.num_senones)
    throw ShapeError("dev corpus senone count differs from train corpus: " +
                     dims(dev_set.num_senones, train_set.num_senones));

  Model model = build_model(cfg, train_set);
  fs::create_directories(cfg.output_dir);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::vector<EpochMetrics> rows;
  double best_ce = std::numeric_limits<double>::infinity();
  const auto best_path = cfg.output_dir / "best.ckpt";

  log << std::setprecision(17);
  for (std::size_t epoch = 0; epoch <= cfg.train.epochs; ++epoch) {
    if (epoch > 0) train_epoch(model, train_set, cfg, epoch);
    EpochMetrics row;
    row.epoch = epoch;
    row.train_ce = evaluate(model, train_set, cfg).mean_ce;
    const EvalMetrics dev = evaluate(model, dev_set, cfg);
    row.dev_ce = dev.mean_ce;
    row.dev_acc = dev.frame_accuracy;
    if (cfg.log_wall_time) row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    rows.push_back(row);
    log << "epoch " << row.epoch << " train_ce " << row.train_ce << " dev_ce " << row.dev_ce
        << " dev_acc " << row.dev_acc << '\n';
    if (row.dev_ce < best_ce) {
      best_ce = row.dev_ce;
      save_checkpoint(to_checkpoint(model, cfg), best_path);
    }
  }
  save_checkpoint(to_checkpoint(model, cfg), cfg.output_dir / "final.ckpt");
  write_metrics_csv(rows, cfg.output_dir / "metrics.csv");
  return rows;
}

void gen_data(const GenDataConfig& cfg) {
  GeneratedData data = generate_corpus(cfg.gen);
  fs::create_directories(cfg.output_dir);
  save_corpus(data.train, cfg.output_dir / "train.corpus");
  save_corpus(data.dev, cfg.output_dir / "dev.corpus");
  save_corpus(data.test, cfg.output_dir / "test.corpus");
  save_map(data.senone_map, cfg.output_dir / "senones.map");
}

namespace {

struct EvalOptions {
  std::string checkpoint;
  std::string corpus;
  std::string mode = "baseline";
  std::size_t passes = 2;
  std::size_t splice_left = 9;
  std::size_t splice_right = 9;
  bool causal = false;
  std::string feedback = "free_running";
  std::string per_utterance;
};

void write_utterance_row(std::ostream& f, const std::string& id, const std::vector<EvalMetrics>& passes) {
  f << id << ',' << passes.back().frames;
  for (const auto& p : passes) f << ',' << p.mean_ce << ',' << p.frame_accuracy;
  f << '\n';
}

EvalMetrics score(const Matrix& posteriors, const Utterance& utt) {
  MetricAccumulator acc;
  for (std::size_t t = 0; t < utt.num_frames(); ++t) acc.add(posteriors.row(t), utt.labels[t]);
  return acc.result();
}

void print_metrics(std::ostream& out, const std::string& prefix, const EvalMetrics& m) {
  out << prefix << "mean_ce " << m.mean_ce << '\n' << prefix << "frame_acc " << m.frame_accuracy << '\n';
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const ModelKind kind = parse_model_kind(o.mode);
  const FeedbackMode feedback = parse_feedback(o.feedback);
  if (kind == ModelKind::kBpsn) BpsnConfig{1, o.passes}.validate();

  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  Corpus corpus = load_corpus(o.corpus, Split::kTest);
  SpliceConfig splice{o.splice_left, o.splice_right};
  if (kind != ModelKind::kBaseline) splice = effective_splice(splice, o.causal);
  const std::size_t spliced = splice.spliced_dim(corpus.feature_dim);

  std::optional<RdsnModel> rdsn;
  if (kind == ModelKind::kBaseline) {
    if (ckpt.net.input_dim() != spliced)
      throw ShapeError("baseline mode: checkpoint input width " + std::to_string(ckpt.net.input_dim()) +
                       " does not match spliced feature width " + std::to_string(spliced) +
                       (ckpt.is_recurrent() ? " (checkpoint is recurrent, k = " + std::to_string(ckpt.k) + ")"
                                            : std::string()));
    if (ckpt.net.output_dim() != corpus.num_senones)
      throw ShapeError("checkpoint senone count does not match corpus: " +
                       dims(ckpt.net.output_dim(), corpus.num_senones));
  } else {
    rdsn = ckpt.to_rdsn();
    if (rdsn->spliced_dim() != spliced)
      throw ShapeError("checkpoint spliced input width does not match corpus: " +
                       dims(rdsn->spliced_dim(), spliced));
    if (rdsn->senone_map.num_senones() != corpus.num_senones)
      throw ShapeError("checkpoint senone count does not match corpus: " +
                       dims(rdsn->senone_map.num_senones(), corpus.num_senones));
  }

  std::ofstream per_utt;
  if (!o.per_utterance.empty()) {
    per_utt.open(o.per_utterance, std::ios::binary | std::ios::trunc);
    if (!per_utt) throw Error("cannot write " + o.per_utterance);
    per_utt << std::setprecision(17) << "utterance,frames";
    const std::size_t n = kind == ModelKind::kBpsn ? o.passes : 1;
    for (std::size_t p = 1; p <= n; ++p) {
      if (kind == ModelKind::kBpsn) {
        per_utt << ",pass" << p << "_ce,pass" << p << "_acc";
      } else {
        per_utt << ",mean_ce,frame_acc";
      }
    }
    per_utt << '\n';
  }

  const std::size_t num_passes = kind == ModelKind::kBpsn ? o.passes : 1;
  std::vector<MetricAccumulator> totals(num_passes);
  const RdsnConfig rcfg{rdsn ? rdsn->k : 0, o.causal, feedback};
  const BpsnConfig bcfg{rdsn ? rdsn->k : 0, o.passes};
  for (const auto& utt : corpus.utterances) {
    std::vector<Matrix> outputs;
    switch (kind) {
      case ModelKind::kBaseline:
        outputs.push_back(baseline_forward_utterance(ckpt.net, utt, splice, DropoutMode::kEval));
        break;
      case ModelKind::kRdsn:
        outputs.push_back(rdsn_forward_utterance(*rdsn, utt, splice, rcfg, DropoutMode::kEval).posteriors);
        break;
      case ModelKind::kBpsn:
        outputs = bpsn_forward_utterance(*rdsn, utt, splice, bcfg, DropoutMode::kEval);
        break;
    }
    std::vector<EvalMetrics> utt_metrics;
    for (std::size_t p = 0; p < outputs.size(); ++p) {
      for (std::size_t t = 0; t < utt.num_frames(); ++t) totals[p].add(outputs[p].row(t), utt.labels[t]);
      if (per_utt.is_open()) utt_metrics.push_back(score(outputs[p], utt));
    }
    if (per_utt.is_open()) write_utterance_row(per_utt, utt.id, utt_metrics);
  }

  out << std::setprecision(17);
  out << "mode " << to_string(kind) << '\n';
  out << "frames " << totals.back().result().frames << '\n';
  if (kind == ModelKind::kBpsn) {
    for (std::size_t p = 0; p < num_passes; ++p)
      out << "pass" << (p + 1) << "_ce " << totals[p].result().mean_ce << '\n';
  }
  print_metrics(out, "", totals.back().result());
  return kExitOk;
}

void cmd_inspect(const std::string& path, std::ostream& out) {
  Checkpoint ckpt = load_checkpoint(path);
  const auto& layers = ckpt.net.layers();
  out << "format STKCKPT1 version " << Checkpoint::kVersion << '\n';
  out << "kind " << (ckpt.is_recurrent() ? "recurrent" : "baseline") << '\n';
  out << "input_dim " << ckpt.net.input_dim() << '\n';
  out << "output_dim " << ckpt.net.output_dim() << '\n';
  out << "k " << ckpt.k << '\n';
  out << "M " << (ckpt.senone_map ? ckpt.senone_map->num_monophones() : 0) << '\n';
  out << "S " << ckpt.net.output_dim() << '\n';
  if (ckpt.is_recurrent()) {
    const std::size_t rec = ckpt.k * ckpt.senone_map->num_monophones();
    out << "spliced_dim " << ckpt.net.input_dim() - rec << '\n';
    out << "recurrent_dim " << rec << '\n';
  }
  out << "parameters " << ckpt.net.num_parameters() << '\n';
  out << "layers " << layers.size() << '\n';
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    out << "  layer " << i << ": " << l.weights.cols << " -> " << l.weights.rows << ' '
        << to_string(l.activation) << " dropout " << l.dropout_rate << '\n';
  }
}

void cmd_import_text(const std::string& in, const std::string& out_path, std::optional<std::size_t> senones) {
  Corpus c = load_text_corpus(in, senones);
  save_corpus(c, out_path);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stacknet: deep stacking networks for senone posterior estimation", "stacknet"};
  app.require_subcommand(1);

  std::string gen_path;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus from a config file");
  gen->add_option("config", gen_path, "config file")->required();

  std::string train_path;
  auto* tr = app.add_subcommand("train", "train a baseline, rdsn or bpsn model from a config file");
  tr->add_option("config", train_path, "config file")->required();

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  ev->add_option("--checkpoint", eo.checkpoint, "checkpoint file")->required();
  ev->add_option("--corpus", eo.corpus, "corpus file")->required();
  ev->add_option("--mode", eo.mode, "baseline, rdsn or bpsn")->capture_default_str();
  ev->add_option("--passes", eo.passes, "bpsn passes")->capture_default_str();
  ev->add_option("--splice-left", eo.splice_left)->capture_default_str();
  ev->add_option("--splice-right", eo.splice_right)->capture_default_str();
  ev->add_flag("--causal", eo.causal, "drop right splice context (rdsn/bpsn)");
  ev->add_option("--feedback", eo.feedback, "free_running or teacher_forced")->capture_default_str();
  ev->add_option("--per-utterance", eo.per_utterance, "write per-utterance metrics CSV here");

  std::string inspect_path;
  auto* in = app.add_subcommand("inspect-checkpoint", "print checkpoint dimensions and layer shapes");
  in->add_option("checkpoint", inspect_path)->required();

  std::string text_in, text_out;
  std::size_t text_senones = 0;
  auto* imp = app.add_subcommand("import-text", "convert a text corpus (id label f1..fD lines) to binary");
  imp->add_option("input", text_in)->required();
  imp->add_option("output", text_out)->required();
  imp->add_option("--senones", text_senones, "number of senones (default: 1 + max label)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "stacknet: " << e.what() << '\n';
    if (e.get_exit_code() == 0) return kExitOk;
    err << "run 'stacknet --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      auto kv = KeyValueConfig::load(gen_path);
      gen_data(parse_gen_config(kv));
    } else if (*tr) {
      auto kv = KeyValueConfig::load(train_path);
      train(parse_run_config(kv), out);
    } else if (*ev) {
      return cmd_eval(eo, out);
    } else if (*in) {
      cmd_inspect(inspect_path, out);
    } else if (*imp) {
      cmd_import_text(text_in, text_out,
                      imp->count("--senones") ? std::optional<std::size_t>(text_senones) : std::nullopt);
    }
  } catch (const ConfigError& e) {
    err << "stacknet: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "stacknet: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "stacknet: error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace stacknet::cli
