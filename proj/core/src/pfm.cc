#include "mondi/pfm.h"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mondi/errors.h"

namespace mondi {
namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

// Reads one whitespace-delimited header token and consumes exactly one
// trailing whitespace byte.
std::string_view next_token(std::string_view bytes, std::size_t& pos, const char* what) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos || pos >= bytes.size())
    throw FormatError(std::string("truncated PFM header: missing ") + what, start);
  const std::string_view token = bytes.substr(start, pos - start);
  ++pos;
  return token;
}

int parse_dimension(std::string_view token, std::size_t offset, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value <= 0)
    throw FormatError(std::string("invalid PFM ") + what, offset);
  return value;
}

}  // namespace

std::string encode_pfm(const PfmImage& image) {
  if (image.channels != 1 && image.channels != 3) throw InvalidInput("PFM supports 1 or 3 channels");
  if (image.width <= 0 || image.height <= 0) throw InvalidInput("PFM dimensions must be positive");
  const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
  if (image.data.size() != row * image.height) throw InvalidInput("PFM payload size mismatch");

  std::string out = image.channels == 3 ? "PF\n" : "Pf\n";
  out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + image.data.size() * 4);
  char* dst = out.data() + header;
  for (int y = image.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(image.data[y * row + i]);
      if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
  return out;
}

PfmImage decode_pfm(std::string_view bytes) {
  std::size_t pos = 0;
  const std::string_view magic = next_token(bytes, pos, "magic");
  PfmImage image;
  if (magic == "PF") {
    image.channels = 3;
  } else if (magic == "Pf") {
    image.channels = 1;
  } else {
    throw FormatError("bad PFM magic", 0);
  }
  std::size_t at = pos;
  image.width = parse_dimension(next_token(bytes, pos, "width"), at, "width");
  at = pos;
  image.height = parse_dimension(next_token(bytes, pos, "height"), at, "height");
  at = pos;
  const std::string_view scale_token = next_token(bytes, pos, "scale");
  double scale = 0.0;
  const auto [ptr, ec] =
      std::from_chars(scale_token.data(), scale_token.data() + scale_token.size(), scale);
  if (ec != std::errc() || ptr != scale_token.data() + scale_token.size() || scale == 0.0 ||
      !std::isfinite(scale))
    throw FormatError("invalid PFM scale", at);
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);

  const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
  const std::size_t count = row * image.height;
  if (bytes.size() - pos < count * 4)
    throw FormatError("truncated PFM payload", bytes.size());
  image.data.resize(count);
  const char* src = bytes.data() + pos;
  for (int y = image.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, src, 4);
      if (swap) bits = byteswap32(bits);
      image.data[y * row + i] = std::bit_cast<float>(bits);
      src += 4;
    }
  }
  return image;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

PfmImage read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file(path)); }

void write_pfm(const std::filesystem::path& path, const PfmImage& image) {
  write_file_atomic(path, encode_pfm(image));
}

namespace {

template <typename G>
PfmImage single_channel(const G& grid) {
  PfmImage p{grid.width, grid.height, 1, std::vector<float>(grid.data.size())};
  for (std::size_t i = 0; i < grid.data.size(); ++i) p.data[i] = static_cast<float>(grid.data[i]);
  return p;
}

template <typename G>
G single_channel_grid(const PfmImage& pfm) {
  if (pfm.channels != 1) throw InvalidInput("expected a single-channel PFM");
  G g(pfm.height, pfm.width);
  for (std::size_t i = 0; i < pfm.data.size(); ++i) g.data[i] = pfm.data[i];
  return g;
}

}  // namespace

PfmImage to_pfm(const DepthGrid& depth) { return single_channel(depth); }
PfmImage to_pfm(const ScalarGrid& grid) { return single_channel(grid); }

PfmImage to_pfm(const ImageGrid& image) {
  if (image.channels != 3 && image.channels != 1)
    throw InvalidInput("only 1- or 3-channel images can be stored as PFM");
  PfmImage p{image.width, image.height, image.channels, std::vector<float>(image.data.size())};
  for (std::size_t i = 0; i < image.data.size(); ++i) p.data[i] = static_cast<float>(image.data[i]);
  return p;
}

DepthGrid depth_from_pfm(const PfmImage& pfm) { return single_channel_grid<DepthGrid>(pfm); }
ScalarGrid scalar_from_pfm(const PfmImage& pfm) { return single_channel_grid<ScalarGrid>(pfm); }

ImageGrid image_from_pfm(const PfmImage& pfm) {
  ImageGrid g(pfm.height, pfm.width, pfm.channels);
  for (std::size_t i = 0; i < pfm.data.size(); ++i) g.data[i] = pfm.data[i];
  return g;
}

}  // namespace mondi
