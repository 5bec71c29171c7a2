#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stacknet/nn.hpp"

namespace stacknet {

/// One utterance: T frames of D features, one senone label per frame.
struct Utterance {
  std::string id;
  Matrix frames;  // T x D, frame-major
  std::vector<std::uint32_t> labels;

  std::size_t num_frames() const { return frames.rows; }
  std::size_t feature_dim() const { return frames.cols; }
  std::span<const double> frame(std::size_t t) const { return frames.row(t); }

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class Split : std::uint8_t { kTrain, kDev, kTest };

const char* to_string(Split s);

struct Corpus {
  std::vector<Utterance> utterances;
  std::size_t num_senones = 0;
  std::size_t feature_dim = 0;
  Split split = Split::kTrain;

  std::size_t total_frames() const;
  /// Throws ShapeError / InputError naming the first offending utterance.
  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct SpliceConfig {
  std::size_t left = 9;
  std::size_t right = 9;

  std::size_t window() const { return left + right + 1; }
  std::size_t spliced_dim(std::size_t feature_dim) const { return feature_dim * window(); }

  friend bool operator==(const SpliceConfig&, const SpliceConfig&) = default;
};

/// Frames t-left .. t+right concatenated in temporal order. Indices outside
/// [0, T) are clamped to the nearest edge frame. Throws InputError if t >= T.
std::vector<double> splice(const Utterance& utt, const SpliceConfig& cfg, std::size_t t);
/// Appending variant used by the frame loops.
void splice_into(const Utterance& utt, const SpliceConfig& cfg, std::size_t t,
                 std::vector<double>& out);

/// Binary corpus: magic "STKCORP1"; u32 S, D, count; per utterance u32 id
/// length, id bytes, u32 T, T*D f64, T u32 labels. All little-endian.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path, Split split = Split::kTrain);

/// Line-oriented text corpus: "utt-id label f_1 ... f_D" per frame. Lines of
/// one utterance must be contiguous; '#' starts a comment. If `num_senones` is
/// absent it is inferred as 1 + the largest label.
Corpus load_text_corpus(const std::filesystem::path& path,
                        std::optional<std::size_t> num_senones = std::nullopt,
                        Split split = Split::kTrain);

}  // namespace stacknet
