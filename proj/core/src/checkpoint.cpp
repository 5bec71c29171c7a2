#include "stacknet/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

constexpr char kMagic[8] = {'S', 'T', 'K', 'C', 'K', 'P', 'T', '1'};

std::uint32_t to_u32(std::size_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw ShapeError("value does not fit the checkpoint's u32 field");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Checkpoint Checkpoint::from_baseline(const Mlp& net, std::optional<SenoneMap> map) {
  if (map && map->num_senones() != net.output_dim())
    throw ShapeError("senone map size differs from the network output width");
  return {net, 0, std::move(map)};
}

Checkpoint Checkpoint::from_rdsn(const RdsnModel& model) {
  model.validate();
  return {model.net, to_u32(model.k), model.senone_map};
}

RdsnModel Checkpoint::to_rdsn() const {
  if (k == 0 || !senone_map)
    throw ShapeError("checkpoint holds a baseline network, not a recurrent one");
  RdsnModel model{net, k, *senone_map};
  model.validate();
  return model;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof kMagic);
  io::write_u32(out, Checkpoint::kVersion);
  const auto& layers = ckpt.net.layers();
  io::write_u32(out, to_u32(layers.size()));
  for (const auto& l : layers) {
    io::write_u32(out, to_u32(l.weights.rows));
    io::write_u32(out, to_u32(l.weights.cols));
    io::write_u8(out, static_cast<std::uint8_t>(l.activation));
    io::write_f64(out, l.dropout_rate);
    io::write_f64s(out, l.weights.data.data(), l.weights.data.size());
    io::write_f64s(out, l.bias.data(), l.bias.size());
  }
  const std::size_t m = ckpt.senone_map ? ckpt.senone_map->num_monophones() : 0;
  io::write_u32(out, ckpt.k);
  io::write_u32(out, to_u32(m));
  io::write_u32(out, to_u32(ckpt.net.output_dim()));
  if (ckpt.senone_map)
    for (auto v : ckpt.senone_map->mapping()) io::write_u32(out, v);
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  using Kind = ParseError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(Kind::kIo, "cannot open checkpoint '" + path.string() + "'");
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw ParseError(Kind::kIo, "cannot stat checkpoint '" + path.string() + "'");
  const std::string src = path.string();
  io::Reader r(in, src, size);

  char magic[8];
  if (size < sizeof magic) throw ParseError(Kind::kBadMagic, src + ": missing STKCKPT1 magic");
  r.bytes(magic, sizeof magic, "magic");
  if (!std::equal(magic, magic + 8, kMagic))
    throw ParseError(Kind::kBadMagic, src + ": bad magic, expected STKCKPT1");
  const std::uint32_t version = r.u32("format version");
  if (version != Checkpoint::kVersion)
    throw ParseError(Kind::kUnsupportedVersion,
                     src + ": unsupported checkpoint version " + std::to_string(version));

  const std::uint32_t count = r.u32("layer count");
  if (count == 0) throw ParseError(Kind::kDimensionMismatch, src + ": checkpoint has no layers");
  std::vector<DenseLayer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "layer " + std::to_string(i);
    DenseLayer l;
    const std::uint32_t rows = r.u32(where + " rows");
    const std::uint32_t cols = r.u32(where + " cols");
    const std::uint8_t tag = r.u8(where + " activation");
    if (tag > static_cast<std::uint8_t>(Activation::kSoftmax))
      throw ParseError(Kind::kSyntax, src + ": " + where + " has unknown activation tag " +
                                          std::to_string(tag));
    l.activation = static_cast<Activation>(tag);
    l.dropout_rate = r.f64(where + " dropout rate");
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    r.require((n + rows) * sizeof(double), where + " parameters");
    l.weights = Matrix(rows, cols);
    r.bytes(l.weights.data.data(), n * sizeof(double), where + " weights");
    l.bias.resize(rows);
    r.bytes(l.bias.data(), rows * sizeof(double), where + " biases");
    layers.push_back(std::move(l));
  }

  Checkpoint ckpt;
  try {
    ckpt.net = Mlp(std::move(layers));
  } catch (const Error& e) {
    throw ParseError(Kind::kDimensionMismatch, src + ": " + e.what());
  }
  ckpt.k = r.u32("k");
  const std::uint32_t m = r.u32("M");
  const std::uint32_t s = r.u32("S");
  if (s != ckpt.net.output_dim())
    throw ParseError(Kind::kDimensionMismatch,
                     src + ": S = " + std::to_string(s) + " but the output layer has " +
                         std::to_string(ckpt.net.output_dim()) + " units");
  if (ckpt.k > 0 && m == 0)
    throw ParseError(Kind::kDimensionMismatch, src + ": recurrent checkpoint without a senone map");
  if (m > 0) {
    r.require(static_cast<std::uint64_t>(s) * 4, "senone map");
    std::vector<std::uint32_t> mapping(s);
    r.bytes(mapping.data(), mapping.size() * 4, "senone map");
    try {
      ckpt.senone_map = SenoneMap(std::move(mapping));
    } catch (const Error& e) {
      throw ParseError(Kind::kGap, src + ": " + e.what());
    }
    if (ckpt.senone_map->num_monophones() != m)
      throw ParseError(Kind::kDimensionMismatch,
                       src + ": M = " + std::to_string(m) + " but the embedded map uses " +
                           std::to_string(ckpt.senone_map->num_monophones()) + " monophones");
    if (static_cast<std::uint64_t>(ckpt.k) * m >= ckpt.net.input_dim())
      throw ParseError(Kind::kDimensionMismatch,
                       src + ": k*M exceeds the network input width");
  }
  if (!r.at_end()) throw ParseError(Kind::kDimensionMismatch, src + ": trailing bytes");
  return ckpt;
}

}  // namespace stacknet
