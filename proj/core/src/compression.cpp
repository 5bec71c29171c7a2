#include "stacknet/compression.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

std::optional<std::size_t> first_unused(const std::vector<std::uint32_t>& mapping, std::size_t m) {
  std::vector<bool> used(m, false);
  for (auto v : mapping) used[v] = true;
  const auto it = std::find(used.begin(), used.end(), false);
  if (it == used.end()) return std::nullopt;
  return static_cast<std::size_t>(it - used.begin());
}

}  // namespace

SenoneMap::SenoneMap(std::vector<std::uint32_t> mapping) : mapping_(std::move(mapping)) {
  if (mapping_.empty()) throw InputError("senone map is empty");
  num_monophones_ = static_cast<std::size_t>(*std::max_element(mapping_.begin(), mapping_.end())) + 1;
  if (const auto gap = first_unused(mapping_, num_monophones_))
    throw InputError("senone map is not surjective: monophone " + std::to_string(*gap) +
                     " has no senone");
}

SenoneMap SenoneMap::identity(std::size_t n) {
  std::vector<std::uint32_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<std::uint32_t>(i);
  return SenoneMap(std::move(m));
}

void compress_into(std::span<const double> posterior, const SenoneMap& map, std::vector<double>& out) {
  if (posterior.size() != map.num_senones())
    throw ShapeError("posterior has " + std::to_string(posterior.size()) +
                     " entries, senone map covers " + std::to_string(map.num_senones()));
  out.assign(map.num_monophones(), 0.0);
  const auto& m = map.mapping();
  for (std::size_t s = 0; s < posterior.size(); ++s) out[m[s]] += posterior[s];
}

std::vector<double> compress(std::span<const double> posterior, const SenoneMap& map) {
  std::vector<double> out;
  compress_into(posterior, map, out);
  return out;
}

std::vector<double> one_hot_compress(std::size_t label, const SenoneMap& map) {
  if (label >= map.num_senones())
    throw InputError("senone " + std::to_string(label) + " out of range for map with " +
                     std::to_string(map.num_senones()) + " senones");
  std::vector<double> out(map.num_monophones(), 0.0);
  out[map.monophone_of(label)] = 1.0;
  return out;
}

SenoneMap load_map(const std::filesystem::path& path) {
  using Kind = ParseError::Kind;
  std::ifstream in(path);
  if (!in) throw ParseError(Kind::kIo, "cannot open senone map '" + path.string() + "'");

  std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long senone, mono;
    if (!(fields >> senone)) continue;
    std::string rest;
    if (!(fields >> mono) || senone < 0 || mono < 0 || (fields >> rest) ||
        mono > std::numeric_limits<std::uint32_t>::max())
      throw ParseError(Kind::kSyntax, path.string() + ":" + std::to_string(line_no) +
                                          ": expected 'senone_id monophone_id'");
    entries.emplace_back(senone, mono);
  }
  if (entries.empty()) throw ParseError(Kind::kMissingEntry, path.string() + ": no entries");

  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].first == entries[i - 1].first)
      throw ParseError(Kind::kDuplicateEntry, path.string() + ": senone " +
                                                  std::to_string(entries[i].first) +
                                                  " listed more than once");
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].first != i)
      throw ParseError(Kind::kMissingEntry,
                       path.string() + ": senone " + std::to_string(i) + " has no entry");

  std::vector<std::uint32_t> mapping(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    mapping[i] = static_cast<std::uint32_t>(entries[i].second);
  const std::size_t m = *std::max_element(mapping.begin(), mapping.end()) + std::size_t{1};
  if (const auto gap = first_unused(mapping, m))
    throw ParseError(Kind::kGap, path.string() + ": monophone ids are not contiguous; monophone " +
                                     std::to_string(*gap) + " has no senone but " +
                                     std::to_string(m - 1) + " is used");
  return SenoneMap(std::move(mapping));
}

void save_map(const SenoneMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (std::size_t s = 0; s < map.num_senones(); ++s) out << s << ' ' << map.monophone_of(s) << '\n';
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace stacknet
