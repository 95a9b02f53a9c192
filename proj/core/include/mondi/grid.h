#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mondi/errors.h"

namespace mondi {

// Row-major single-channel raster. The tag parameter keeps depth, monitor,
// index and mask rasters from being mixed up at call sites.
template <typename T, typename Tag>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {
    if (h < 0 || w < 0) throw InvalidInput("grid dimensions must be non-negative");
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  T& operator()(int row, int col) { return data[index(row, col)]; }
  const T& operator()(int row, int col) const { return data[index(row, col)]; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }

  // True when `other` (any raster with height/width members) has this shape.
  template <typename Other>
  bool same_shape(const Other& other) const {
    return height == other.height && width == other.width;
  }

  bool operator==(const Grid&) const = default;
};

struct DepthTag {};
struct MonitorTag {};
struct IndexTag {};
struct MaskTag {};
struct ScalarTag {};

// Depths in meters; 0 marks an invalid or missing sample.
using DepthGrid = Grid<double, DepthTag>;
// Per-pixel confidence in [0,1].
using MonitorGrid = Grid<double, MonitorTag>;
// Per-pixel teacher index, 1-based; 0 marks "no selection".
using IndexGrid = Grid<int, IndexTag>;
using Mask = Grid<std::uint8_t, MaskTag>;
using ScalarGrid = Grid<double, ScalarTag>;

// H x W x C color raster, interleaved channels, values nominally in [0,1].
struct ImageGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || c < 0) throw InvalidInput("image dimensions must be non-negative");
  }

  double& operator()(int row, int col, int ch) { return data[index(row, col, ch)]; }
  double operator()(int row, int col, int ch) const { return data[index(row, col, ch)]; }

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }

  template <typename U, typename Tag>
  bool same_shape(const Grid<U, Tag>& other) const {
    return height == other.height && width == other.width;
  }
  bool same_shape(const ImageGrid& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }

  bool operator==(const ImageGrid&) const = default;
};

// Per-pixel non-negative error with a validity mask. Holds P_i, E_i and the
// aggregated residual.
struct ErrorMap {
  ScalarGrid value;
  Mask valid;

  ErrorMap() = default;
  ErrorMap(int h, int w) : value(h, w, 0.0), valid(h, w, 0) {}

  int height() const { return value.height; }
  int width() const { return value.width; }
};

}  // namespace mondi
