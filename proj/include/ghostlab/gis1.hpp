#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ghostlab/frames.hpp"

namespace ghostlab {

/// GIS1 frame-stack container.
///
/// Layout (all scalars little-endian):
///   0..3    magic "GIS1"
///   4       version (1)
///   5       dtype (1 = u16)
///   6..7    reserved, zero
///   8..11   width      (u32)
///   12..15  height     (u32)
///   16..19  n_frames   (u32)
///   20..23  meta length M (u32)
///   24..    M bytes of UTF-8 "key=value\n" lines
///   then    width*height*n_frames u16 pixels, frame-major then row-major
namespace gis1 {

inline constexpr std::string_view kMagic = "GIS1";
inline constexpr unsigned char kVersion = 1;
inline constexpr unsigned char kDtypeU16 = 1;
inline constexpr std::size_t kHeaderSize = 24;

struct Header {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t n_frames = 0;
  std::uint32_t meta_length = 0;
};

/// The fixed 24-byte header.
std::string encode_header(const Header& header);
Header decode_header(std::string_view bytes);

/// Serializes a stack. Pixels must be integers in [0, 65535]; otherwise a
/// RangeError names the offending frame and pixel.
std::string encode(const FrameStack& stack);

/// Parses GIS1 bytes. Throws FormatError on a bad magic, version, dtype or
/// meta block and TruncationError when the byte count is short.
FrameStack decode(std::string_view bytes);

} // namespace gis1

FrameStack read_stack(const std::filesystem::path& path);
void write_stack(const FrameStack& stack, const std::filesystem::path& path);

/// Rounds every pixel to the nearest integer and clamps to [0, 65535].
FrameStack quantize(const FrameStack& stack);

} // namespace ghostlab
