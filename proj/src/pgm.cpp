#include "ghostlab/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ghostlab/error.hpp"
#include "ghostlab/fileio.hpp"

namespace ghostlab {

std::string encode_pgm(const GrayImage& image) {
  if (image.maxval == 0 || image.maxval > 65535) throw RangeError("PGM maxval must be 1..65535");
  if (image.pixels.size() != image.extent.width * image.extent.height)
    throw PreconditionError("PGM pixel count does not match its extent");
  std::string out = "P5\n" + std::to_string(image.extent.width) + " " +
                    std::to_string(image.extent.height) + "\n" + std::to_string(image.maxval) +
                    "\n";
  const bool wide = image.maxval > 255;
  for (const auto v : image.pixels) {
    if (v > image.maxval) throw RangeError("PGM sample exceeds maxval");
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFFu));
  }
  return out;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return std::string(bytes.substr(start, pos - start));
}

std::size_t parse_header_number(const std::string& token, const char* what) {
  if (token.empty() || !std::all_of(token.begin(), token.end(),
                                    [](unsigned char c) { return std::isdigit(c); }))
    throw FormatError(std::string("PGM header: bad ") + what + " '" + token + "'");
  return std::stoul(token);
}

} // namespace

GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw FormatError("not a binary PGM (P5)");
  GrayImage image;
  image.extent.width = parse_header_number(next_token(bytes, pos), "width");
  image.extent.height = parse_header_number(next_token(bytes, pos), "height");
  const auto maxval = parse_header_number(next_token(bytes, pos), "maxval");
  if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval out of range");
  image.maxval = static_cast<unsigned>(maxval);
  ++pos; // single whitespace byte after maxval
  const std::size_t n = image.extent.width * image.extent.height;
  const std::size_t sample = image.maxval > 255 ? 2 : 1;
  if (pos > bytes.size() || bytes.size() - pos < n * sample)
    throw TruncationError("PGM payload truncated: expected " + std::to_string(n * sample) +
                          " bytes");
  image.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sample == 2) {
      image.pixels[i] = static_cast<std::uint16_t>(
          (static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
          static_cast<unsigned char>(bytes[pos + 2 * i + 1]));
    } else {
      image.pixels[i] = static_cast<unsigned char>(bytes[pos + i]);
    }
  }
  return image;
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

std::string Rendering::sidecar() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "width=" << image.extent.width << "\n";
  os << "height=" << image.extent.height << "\n";
  os << "maxval=" << image.maxval << "\n";
  os << "min=" << lo << "\n";
  os << "max=" << hi << "\n";
  os << "flat=" << (flat ? 1 : 0) << "\n";
  os << "undefined_count=" << undefined.size() << "\n";
  os << "undefined_sentinel=0\n";
  if (!undefined.empty()) {
    os << "undefined_pixels=";
    for (std::size_t i = 0; i < undefined.size(); ++i) {
      if (i) os << ";";
      os << undefined[i] % image.extent.width << ":" << undefined[i] / image.extent.width;
    }
    os << "\n";
  }
  return os.str();
}

Rendering render(Extent extent, std::span<const std::optional<double>> values, unsigned maxval) {
  if (values.size() != extent.width * extent.height)
    throw PreconditionError("render: value count does not match extent");
  if (maxval == 0 || maxval > 65535) throw RangeError("PGM maxval must be 1..65535");
  Rendering r;
  r.image.extent = extent;
  r.image.maxval = maxval;
  r.image.pixels.assign(values.size(), 0);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] && std::isfinite(*values[i])) {
      lo = std::min(lo, *values[i]);
      hi = std::max(hi, *values[i]);
    } else {
      r.undefined.push_back(i);
    }
  }
  if (r.undefined.size() == values.size()) {
    r.flat = true;
    return r;
  }
  r.lo = lo;
  r.hi = hi;
  r.flat = !(hi > lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i] || !std::isfinite(*values[i])) continue;
    if (r.flat) {
      r.image.pixels[i] = static_cast<std::uint16_t>(maxval / 2);
    } else {
      const double t = (*values[i] - lo) / (hi - lo);
      r.image.pixels[i] = static_cast<std::uint16_t>(
          std::clamp(std::lround(t * maxval), 0L, static_cast<long>(maxval)));
    }
  }
  return r;
}

Rendering render(Extent extent, std::span<const double> values, unsigned maxval) {
  std::vector<std::optional<double>> wrapped(values.begin(), values.end());
  return render(extent, wrapped, maxval);
}

} // namespace ghostlab
