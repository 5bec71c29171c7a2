#include "stacknet/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

constexpr char kCorpusMagic[8] = {'S', 'T', 'K', 'C', 'O', 'R', 'P', '1'};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw ShapeError(std::string(what) + " does not fit the on-disk u32 field");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

std::size_t Corpus::total_frames() const {
  std::size_t n = 0;
  for (const auto& u : utterances) n += u.num_frames();
  return n;
}

void Corpus::validate() const {
  if (num_senones == 0) throw ShapeError("corpus has zero senone classes");
  if (feature_dim == 0) throw ShapeError("corpus has zero feature dimensions");
  for (const auto& u : utterances) {
    if (u.num_frames() == 0) throw ShapeError("utterance '" + u.id + "' has no frames");
    if (u.feature_dim() != feature_dim)
      throw ShapeError("utterance '" + u.id + "' has feature dim " +
                       std::to_string(u.feature_dim()) + ", corpus has " +
                       std::to_string(feature_dim));
    if (u.labels.size() != u.num_frames())
      throw ShapeError("utterance '" + u.id + "' has " + std::to_string(u.labels.size()) +
                       " labels for " + std::to_string(u.num_frames()) + " frames");
    for (double v : u.frames.data)
      if (!std::isfinite(v)) throw InputError("utterance '" + u.id + "' has non-finite features");
    for (auto l : u.labels)
      if (l >= num_senones)
        throw InputError("utterance '" + u.id + "' has label " + std::to_string(l) +
                         " >= num_senones " + std::to_string(num_senones));
  }
}

void splice_into(const Utterance& utt, const SpliceConfig& cfg, std::size_t t,
                 std::vector<double>& out) {
  const std::size_t frames = utt.num_frames();
  if (t >= frames)
    throw InputError("frame " + std::to_string(t) + " out of range for utterance '" + utt.id +
                     "' with " + std::to_string(frames) + " frames");
  const auto first = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(cfg.left);
  const auto last = static_cast<std::ptrdiff_t>(t + cfg.right);
  const auto max_index = static_cast<std::ptrdiff_t>(frames) - 1;
  for (std::ptrdiff_t j = first; j <= last; ++j) {
    const auto row = utt.frame(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, max_index)));
    out.insert(out.end(), row.begin(), row.end());
  }
}

std::vector<double> splice(const Utterance& utt, const SpliceConfig& cfg, std::size_t t) {
  std::vector<double> out;
  out.reserve(cfg.spliced_dim(utt.feature_dim()));
  splice_into(utt, cfg, t, out);
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kCorpusMagic, sizeof kCorpusMagic);
  io::write_u32(out, checked_u32(corpus.num_senones, "num_senones"));
  io::write_u32(out, checked_u32(corpus.feature_dim, "feature_dim"));
  io::write_u32(out, checked_u32(corpus.utterances.size(), "utterance count"));
  for (const auto& u : corpus.utterances) {
    if (u.feature_dim() != corpus.feature_dim || u.labels.size() != u.num_frames())
      throw ShapeError("utterance '" + u.id + "' does not match the corpus dimensions");
    io::write_u32(out, checked_u32(u.id.size(), "utterance id length"));
    out.write(u.id.data(), static_cast<std::streamsize>(u.id.size()));
    io::write_u32(out, checked_u32(u.num_frames(), "frame count"));
    io::write_f64s(out, u.frames.data.data(), u.frames.data.size());
    for (auto l : u.labels) io::write_u32(out, l);
  }
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Corpus load_corpus(const std::filesystem::path& path, Split split) {
  using Kind = ParseError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(Kind::kIo, "cannot open corpus '" + path.string() + "'");
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw ParseError(Kind::kIo, "cannot stat corpus '" + path.string() + "'");
  io::Reader r(in, path.string(), size);

  char magic[8];
  if (size < sizeof magic)
    throw ParseError(Kind::kBadMagic, path.string() + ": missing STKCORP1 magic");
  r.bytes(magic, sizeof magic, "magic");
  if (!std::equal(magic, magic + 8, kCorpusMagic))
    throw ParseError(Kind::kBadMagic, path.string() + ": bad magic, expected STKCORP1");

  Corpus corpus;
  corpus.split = split;
  corpus.num_senones = r.u32("num_senones");
  corpus.feature_dim = r.u32("feature_dim");
  const std::uint32_t count = r.u32("utterance count");
  if (corpus.num_senones == 0 || corpus.feature_dim == 0)
    throw ParseError(Kind::kDimensionMismatch,
                     path.string() + ": num_senones and feature_dim must be positive");

  corpus.utterances.reserve(std::min<std::uint32_t>(count, 1u << 16));
  for (std::uint32_t ui = 0; ui < count; ++ui) {
    const std::string where = "utterance #" + std::to_string(ui);
    Utterance u;
    const std::uint32_t id_len = r.u32(where + " id length");
    r.require(id_len, where + " id");
    u.id.resize(id_len);
    r.bytes(u.id.data(), id_len, where + " id");
    const std::string named = "utterance '" + u.id + "'";

    const std::uint32_t frames = r.u32(named + " frame count");
    if (frames == 0)
      throw ParseError(Kind::kDimensionMismatch, path.string() + ": " + named + " has no frames");
    const std::uint64_t values = static_cast<std::uint64_t>(frames) * corpus.feature_dim;
    r.require(values * sizeof(double) + static_cast<std::uint64_t>(frames) * 4,
              named + " frames and labels");
    u.frames = Matrix(frames, corpus.feature_dim);
    r.bytes(u.frames.data.data(), values * sizeof(double), named + " frames");
    for (double v : u.frames.data)
      if (!std::isfinite(v))
        throw ParseError(Kind::kNonFinite, path.string() + ": " + named + " has non-finite features");
    u.labels.resize(frames);
    r.bytes(u.labels.data(), static_cast<std::size_t>(frames) * 4, named + " labels");
    for (auto l : u.labels)
      if (l >= corpus.num_senones)
        throw ParseError(Kind::kLabelOutOfRange,
                         path.string() + ": " + named + " has label " + std::to_string(l) +
                             " >= num_senones " + std::to_string(corpus.num_senones));
    corpus.utterances.push_back(std::move(u));
  }
  if (!r.at_end())
    throw ParseError(Kind::kDimensionMismatch,
                     path.string() + ": trailing bytes after the declared utterances");
  return corpus;
}

Corpus load_text_corpus(const std::filesystem::path& path, std::optional<std::size_t> num_senones,
                        Split split) {
  using Kind = ParseError::Kind;
  std::ifstream in(path);
  if (!in) throw ParseError(Kind::kIo, "cannot open text corpus '" + path.string() + "'");

  Corpus corpus;
  corpus.split = split;
  std::vector<std::vector<double>> rows;
  std::vector<std::uint32_t> labels;
  std::string current;
  std::vector<std::string> seen;
  std::size_t max_label = 0;

  auto flush = [&] {
    if (rows.empty()) return;
    Utterance u;
    u.id = current;
    u.frames = Matrix(rows.size(), corpus.feature_dim);
    for (std::size_t t = 0; t < rows.size(); ++t)
      std::copy(rows[t].begin(), rows[t].end(), u.frames.row(t).begin());
    u.labels = labels;
    corpus.utterances.push_back(std::move(u));
    seen.push_back(current);
    rows.clear();
    labels.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    long long label = -1;
    if (!(fields >> label) || label < 0)
      throw ParseError(Kind::kSyntax, where + ": expected a non-negative integer label");
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) throw ParseError(Kind::kSyntax, where + ": malformed feature value");
    if (row.empty()) throw ParseError(Kind::kSyntax, where + ": no feature values");
    for (double x : row)
      if (!std::isfinite(x))
        throw ParseError(Kind::kNonFinite, where + ": utterance '" + id + "' has non-finite features");

    if (corpus.feature_dim == 0) corpus.feature_dim = row.size();
    if (row.size() != corpus.feature_dim)
      throw ParseError(Kind::kDimensionMismatch,
                       where + ": utterance '" + id + "' has " + std::to_string(row.size()) +
                           " features, expected " + std::to_string(corpus.feature_dim));
    if (id != current) {
      flush();
      if (std::find(seen.begin(), seen.end(), id) != seen.end())
        throw ParseError(Kind::kDuplicateEntry,
                         where + ": utterance '" + id + "' lines are not contiguous");
      current = id;
    }
    rows.push_back(std::move(row));
    labels.push_back(static_cast<std::uint32_t>(label));
    max_label = std::max(max_label, static_cast<std::size_t>(label));
  }
  flush();

  corpus.num_senones = num_senones.value_or(corpus.utterances.empty() ? 0 : max_label + 1);
  for (const auto& u : corpus.utterances)
    for (auto l : u.labels)
      if (l >= corpus.num_senones)
        throw ParseError(Kind::kLabelOutOfRange,
                         path.string() + ": utterance '" + u.id + "' has label " +
                             std::to_string(l) + " >= num_senones " +
                             std::to_string(corpus.num_senones));
  return corpus;
}

}  // namespace stacknet
