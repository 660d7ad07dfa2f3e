#include "ghostlab/gis1.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "ghostlab/error.hpp"
#include "ghostlab/fileio.hpp"

namespace ghostlab {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw RangeError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::string encode_meta(const MetaEntries& meta) {
  std::string block;
  for (const auto& [key, value] : meta) {
    if (key.empty() || key.find_first_of("=\n") != std::string::npos)
      throw RangeError("meta key '" + key + "' is empty or contains '=' or a newline");
    if (value.find('\n') != std::string::npos)
      throw RangeError("meta value for '" + key + "' contains a newline");
    block += key;
    block += '=';
    block += value;
    block += '\n';
  }
  return block;
}

MetaEntries decode_meta(std::string_view block) {
  MetaEntries meta;
  while (!block.empty()) {
    const auto eol = block.find('\n');
    if (eol == std::string_view::npos) throw FormatError("meta block line lacks a newline");
    const auto line = block.substr(0, eol);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw FormatError("meta line '" + std::string(line) + "' is not key=value");
    meta.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    block.remove_prefix(eol + 1);
  }
  return meta;
}

} // namespace

namespace gis1 {

std::string encode_header(const Header& header) {
  std::string out;
  out.append(kMagic);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(kDtypeU16));
  out.push_back('\0');
  out.push_back('\0');
  put_u32(out, header.width);
  put_u32(out, header.height);
  put_u32(out, header.n_frames);
  put_u32(out, header.meta_length);
  return out;
}

Header decode_header(std::string_view bytes) {
  if (bytes.size() < kHeaderSize)
    throw TruncationError("GIS1 header needs " + std::to_string(kHeaderSize) + " bytes, got " +
                          std::to_string(bytes.size()));
  if (bytes.substr(0, 4) != kMagic) throw FormatError("bad magic, expected \"GIS1\"");
  if (static_cast<unsigned char>(bytes[4]) != kVersion)
    throw FormatError("unsupported GIS1 version " +
                      std::to_string(static_cast<unsigned char>(bytes[4])));
  if (static_cast<unsigned char>(bytes[5]) != kDtypeU16)
    throw FormatError("unsupported GIS1 dtype " +
                      std::to_string(static_cast<unsigned char>(bytes[5])));
  if (bytes[6] != '\0' || bytes[7] != '\0') throw FormatError("reserved header bytes not zero");
  return {get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16), get_u32(bytes, 20)};
}

std::string encode(const FrameStack& stack) {
  const std::string meta = encode_meta(stack.meta());
  std::string out = encode_header({checked_u32(stack.width(), "width"),
                                   checked_u32(stack.height(), "height"),
                                   checked_u32(stack.n_frames(), "n_frames"),
                                   checked_u32(meta.size(), "meta block")});
  out.reserve(kHeaderSize + meta.size() + 2 * stack.pixels().size());
  out += meta;

  const auto pixels = stack.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = pixels[i];
    if (!(v >= 0.0 && v <= 65535.0) || v != std::floor(v)) {
      const std::size_t f = i / stack.frame_size();
      const std::size_t rem = i % stack.frame_size();
      throw RangeError("value " + std::to_string(v) + " at frame " + std::to_string(f) +
                       ", row " + std::to_string(rem / stack.width()) + ", column " +
                       std::to_string(rem % stack.width()) +
                       " is not an integer in [0, 65535]");
    }
    const auto q = static_cast<std::uint16_t>(v);
    out.push_back(static_cast<char>(q & 0xFFu));
    out.push_back(static_cast<char>(q >> 8));
  }
  return out;
}

FrameStack decode(std::string_view bytes) {
  const Header header = decode_header(bytes);
  const std::uint64_t width = header.width;
  const std::uint64_t height = header.height;
  const std::uint64_t n_frames = header.n_frames;
  const std::uint64_t meta_len = header.meta_length;
  if (width == 0 || height == 0 || n_frames == 0)
    throw FormatError("GIS1 dimensions must be non-zero");

  const std::uint64_t payload = 2 * width * height * n_frames;
  const std::uint64_t expected = kHeaderSize + meta_len + payload;
  if (bytes.size() < expected)
    throw TruncationError("GIS1 file truncated: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw FormatError("GIS1 file has " + std::to_string(bytes.size() - expected) +
                      " trailing bytes");

  MetaEntries meta = decode_meta(bytes.substr(kHeaderSize, meta_len));
  std::vector<double> pixels(width * height * n_frames);
  const std::size_t base = kHeaderSize + meta_len;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto lo = static_cast<unsigned char>(bytes[base + 2 * i]);
    const auto hi = static_cast<unsigned char>(bytes[base + 2 * i + 1]);
    pixels[i] = static_cast<double>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return FrameStack(width, height, n_frames, std::move(pixels), std::move(meta));
}

} // namespace gis1

FrameStack read_stack(const std::filesystem::path& path) {
  return gis1::decode(read_file(path));
}

void write_stack(const FrameStack& stack, const std::filesystem::path& path) {
  atomic_write(path, gis1::encode(stack));
}

FrameStack quantize(const FrameStack& stack) {
  std::vector<double> q(stack.pixels().begin(), stack.pixels().end());
  for (double& v : q) v = std::clamp(std::nearbyint(v), 0.0, 65535.0);
  return FrameStack(stack.width(), stack.height(), stack.n_frames(), std::move(q), stack.meta());
}

} // namespace ghostlab
