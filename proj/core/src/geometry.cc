#include "mondi/geometry.h"

#include <cmath>

#include <Eigen/Dense>

#include "mondi/parallel.h"

namespace mondi {
namespace {

// Coordinates this close to the image border are snapped onto it, so that
// the identity warp stays valid on the last row and column despite roundoff.
constexpr double kBorderSnap = 1e-9;

bool snap_into(double& coord, int extent) {
  const double hi = extent - 1;
  if (coord < 0.0) {
    if (coord < -kBorderSnap) return false;
    coord = 0.0;
  } else if (coord > hi) {
    if (coord > hi + kBorderSnap) return false;
    coord = hi;
  }
  return true;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidInput("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidInput("camera grid must be non-empty");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw InvalidInput("principal point outside the image");
}

RigidPose RigidPose::inverse() const {
  RigidPose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

bool RigidPose::is_identity() const {
  return rotation == Eigen::Matrix3d::Identity() && translation == Eigen::Vector3d::Zero();
}

void RigidPose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw InvalidInput("pose contains non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9) throw InvalidInput("pose rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw InvalidInput("pose rotation determinant is not +1");
}

Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const CameraIntrinsics& K) {
  if (!(depth > 0.0)) throw InvalidInput("backproject requires a positive depth");
  return {(pixel.x() - K.cx) / K.fx * depth, (pixel.y() - K.cy) / K.fy * depth, depth};
}

Projection project(const Eigen::Vector3d& point, const CameraIntrinsics& K) {
  Projection out;
  if (!(point.z() > kMinProjectiveDepth)) return out;
  out.pixel = {K.fx * point.x() / point.z() + K.cx, K.fy * point.y() / point.z() + K.cy};
  double u = out.pixel.x();
  double v = out.pixel.y();
  out.valid = snap_into(u, K.width) && snap_into(v, K.height);
  if (out.valid) out.pixel = {u, v};
  return out;
}

namespace detail {

bool bilinear_taps(int width, int height, double u, double v, BilinearTaps& taps) {
  if (!(u >= 0.0 && u <= width - 1) || !(v >= 0.0 && v <= height - 1)) return false;
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  // On the last row/column, use the cell to the left/above with weight 1.
  if (x0 >= width - 1) x0 = std::max(width - 2, 0);
  if (y0 >= height - 1) y0 = std::max(height - 2, 0);
  taps.x0 = x0;
  taps.y0 = y0;
  taps.ax = u - x0;
  taps.ay = v - y0;
  return true;
}

}  // namespace detail

ColorSample bilinear_sample(const ImageGrid& image, const Eigen::Vector2d& pixel) {
  ColorSample out;
  detail::BilinearTaps t{};
  if (!detail::bilinear_taps(image.width, image.height, pixel.x(), pixel.y(), t)) return out;
  const int x1 = std::min(t.x0 + 1, image.width - 1);
  const int y1 = std::min(t.y0 + 1, image.height - 1);
  out.color.resize(image.channels);
  for (int c = 0; c < image.channels; ++c) {
    const double i00 = image(t.y0, t.x0, c);
    const double i10 = image(t.y0, x1, c);
    const double i01 = image(y1, t.x0, c);
    const double i11 = image(y1, x1, c);
    out.color[c] = (1.0 - t.ay) * ((1.0 - t.ax) * i00 + t.ax * i10) +
                   t.ay * ((1.0 - t.ax) * i01 + t.ax * i11);
  }
  out.valid = true;
  return out;
}

Reprojection reproject_image(const ImageGrid& source, const DepthGrid& depth,
                             const CameraIntrinsics& K, const RigidPose& pose,
                             bool with_jacobian) {
  if (!source.same_shape(depth) || source.width != K.width || source.height != K.height)
    throw InvalidInput("reproject_image: source, depth and intrinsics must share dimensions");
  const int H = depth.height;
  const int W = depth.width;
  const int C = source.channels;

  Reprojection out;
  out.image = ImageGrid(H, W, C, 0.0);
  out.mask = Mask(H, W, 0);
  if (with_jacobian) out.jacobian = ImageGrid(H, W, C, 0.0);

  const Eigen::Matrix3d& R = pose.rotation;
  const Eigen::Vector3d& tr = pose.translation;

  parallel_rows(H, [&](int y) {
    for (int x = 0; x < W; ++x) {
      const double d = depth(y, x);
      if (!(d > 0.0)) continue;
      const Eigen::Vector3d ray((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Eigen::Vector3d dp = R * ray;
      const Eigen::Vector3d p = d * dp + tr;
      if (!(p.z() > kMinProjectiveDepth)) continue;
      double u = K.fx * p.x() / p.z() + K.cx;
      double v = K.fy * p.y() / p.z() + K.cy;
      if (!snap_into(u, W) || !snap_into(v, H)) continue;
      detail::BilinearTaps t{};
      if (!detail::bilinear_taps(W, H, u, v, t)) continue;
      const int x1 = std::min(t.x0 + 1, W - 1);
      const int y1 = std::min(t.y0 + 1, H - 1);

      const double inv_z2 = 1.0 / (p.z() * p.z());
      const double du = K.fx * (dp.x() * p.z() - p.x() * dp.z()) * inv_z2;
      const double dv = K.fy * (dp.y() * p.z() - p.y() * dp.z()) * inv_z2;

      out.mask(y, x) = 1;
      for (int c = 0; c < C; ++c) {
        const double i00 = source(t.y0, t.x0, c);
        const double i10 = source(t.y0, x1, c);
        const double i01 = source(y1, t.x0, c);
        const double i11 = source(y1, x1, c);
        out.image(y, x, c) = (1.0 - t.ay) * ((1.0 - t.ax) * i00 + t.ax * i10) +
                             t.ay * ((1.0 - t.ax) * i01 + t.ax * i11);
        if (with_jacobian) {
          const double gu = (1.0 - t.ay) * (i10 - i00) + t.ay * (i11 - i01);
          const double gv = (1.0 - t.ax) * (i01 - i00) + t.ax * (i11 - i10);
          out.jacobian(y, x, c) = gu * du + gv * dv;
        }
      }
    }
  });
  return out;
}

}  // namespace mondi
