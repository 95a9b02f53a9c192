#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mondi/grid.h"

namespace mondi {

// Pinhole intrinsics. Integer pixel coordinates sit at pixel centers.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws InvalidInput unless fx, fy > 0 and the principal point lies in
  // [0,width) x [0,height).
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid transform p' = rotation * p + translation (meters).
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidPose identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  RigidPose inverse() const;
  bool is_identity() const;

  // Orthonormality and det = +1, both within 1e-9.
  void validate() const;

  bool operator==(const RigidPose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

inline constexpr double kMinProjectiveDepth = 1e-6;

// depth * K^-1 [x, 1]^T. The z component equals `depth` exactly.
Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const CameraIntrinsics& K);

struct Projection {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  bool valid = false;
};

Projection project(const Eigen::Vector3d& point, const CameraIntrinsics& K);

struct ColorSample {
  std::vector<double> color;
  bool valid = false;
};

// Bilinear lookup at a continuous coordinate (u = column, v = row). Invalid
// when any of the four taps falls outside the grid.
ColorSample bilinear_sample(const ImageGrid& image, const Eigen::Vector2d& pixel);

struct Reprojection {
  ImageGrid image;
  Mask mask;
  // d(image)/d(depth) per pixel and channel; filled only when requested.
  ImageGrid jacobian;
};

// Reconstructs the target view by sampling `source` at
// pi(g * backproject(x, depth(x), K)). Pixels with depth 0, a projection
// outside the image, or a behind-camera point are masked out.
Reprojection reproject_image(const ImageGrid& source, const DepthGrid& depth,
                             const CameraIntrinsics& K, const RigidPose& pose,
                             bool with_jacobian = false);

namespace detail {

// Four bilinear taps for a coordinate already known to be inside
// [0,width-1] x [0,height-1].
struct BilinearTaps {
  int x0, y0;
  double ax, ay;  // fractional offsets in [0,1]
};

bool bilinear_taps(int width, int height, double u, double v, BilinearTaps& taps);

}  // namespace detail

}  // namespace mondi
