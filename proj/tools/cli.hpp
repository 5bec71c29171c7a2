#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stacknet/bpsn.hpp"
#include "stacknet/config.hpp"
#include "stacknet/datagen.hpp"
#include "stacknet/features.hpp"
#include "stacknet/nn.hpp"
#include "stacknet/rdsn.hpp"

namespace stacknet::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,    // bad command line or config
  kExitData = 2,     // unreadable files, shape mismatches
  kExitNumeric = 3,  // non-finite loss or gradient
};

/// Environment variable that overrides every config `seed` key.
inline constexpr const char* kSeedEnv = "STACKNET_SEED";

/// Replaces `seed` with $STACKNET_SEED when set. Throws ConfigError if the
/// variable is not an unsigned integer.
void apply_seed_override(std::uint64_t& seed);

struct GenDataConfig {
  GenConfig gen;
  std::filesystem::path output_dir;
};

/// Keys: output_dir (required), num_monophones, senones_per_monophone,
/// feature_dim, self_transition_prob, noise_sigma, train_utterances,
/// dev_utterances, test_utterances, min_frames, max_frames, seed.
GenDataConfig parse_gen_config(KeyValueConfig& kv);

enum class ModelKind { kBaseline, kRdsn, kBpsn };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

struct RunConfig {
  ModelKind kind = ModelKind::kBaseline;
  std::filesystem::path train_corpus;
  std::filesystem::path dev_corpus;
  std::optional<std::filesystem::path> senone_map;
  std::optional<std::filesystem::path> init_checkpoint;
  std::filesystem::path output_dir;

  TrainConfig train;
  SpliceConfig splice;
  std::size_t hidden_layers = 6;
  std::size_t hidden_width = 1024;
  RdsnConfig rdsn;
  BpsnConfig bpsn;
  /// Debug aid: zero the recurrent-input columns after model construction.
  bool zero_recurrent_init = false;
  /// When false the `seconds` column is written as 0 so reruns are byte-identical.
  bool log_wall_time = true;

  /// Splice settings after applying the causal flag.
  SpliceConfig model_splice() const;
};

/// Keys: model, train_corpus, dev_corpus, senone_map, init_checkpoint,
/// output_dir, learning_rate, epochs, dropout_rate, seed, minibatch_size,
/// hidden_layers, hidden_width, splice_left, splice_right, k, causal,
/// feedback_mode, passes, zero_recurrent_init, log_wall_time.
RunConfig parse_run_config(KeyValueConfig& kv);

/// One row of metrics.csv.
struct EpochMetrics {
  std::size_t epoch = 0;
  double train_ce = 0.0;
  double dev_ce = 0.0;
  double dev_acc = 0.0;
  double seconds = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,train_ce,dev_ce,dev_acc,seconds";

void write_metrics_csv(const std::vector<EpochMetrics>& rows, const std::filesystem::path& path);
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

/// Trains per `cfg` and writes output_dir/{metrics.csv,final.ckpt,best.ckpt}.
/// Row 0 evaluates the initial model. train_ce is re-measured after every
/// epoch in eval mode on the training corpus.
std::vector<EpochMetrics> train(const RunConfig& cfg, std::ostream& log);

/// Generates a synthetic corpus into output_dir/{train,dev,test}.corpus and
/// output_dir/senones.map.
void gen_data(const GenDataConfig& cfg);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stacknet::cli
