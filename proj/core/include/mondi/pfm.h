#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mondi/grid.h"

namespace mondi {

// Raw Portable Float Map content. Rows are stored top to bottom here; the
// file stores them bottom to top.
struct PfmImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 ("Pf") or 3 ("PF")
  std::vector<float> data;

  bool operator==(const PfmImage&) const = default;
};

// Little-endian encoding (negative scale).
std::string encode_pfm(const PfmImage& image);
// Accepts either endianness. Throws FormatError with the byte offset.
PfmImage decode_pfm(std::string_view bytes);

PfmImage read_pfm(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void write_pfm(const std::filesystem::path& path, const PfmImage& image);

PfmImage to_pfm(const DepthGrid& depth);
PfmImage to_pfm(const ImageGrid& image);
PfmImage to_pfm(const ScalarGrid& grid);
DepthGrid depth_from_pfm(const PfmImage& pfm);
ImageGrid image_from_pfm(const PfmImage& pfm);
ScalarGrid scalar_from_pfm(const PfmImage& pfm);

// Whole-file helpers shared by the bundle and CLI writers.
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Thrown by read_file when the path does not exist or cannot be opened.
class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const std::filesystem::path& path)
      : std::runtime_error("cannot open " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mondi
