#pragma once

#include <optional>
#include <vector>

#include "mondi/ensemble.h"
#include "mondi/geometry.h"
#include "mondi/grid.h"

namespace mondi {

// An adjacent view and the rigid transform taking target-frame points into
// that view's camera frame.
struct AdjacentView {
  ImageGrid image;
  RigidPose pose;

  bool operator==(const AdjacentView&) const = default;
};

// Everything needed to distill and solve for one target frame.
struct SceneBundle {
  CameraIntrinsics intrinsics;
  ImageGrid target;
  std::vector<AdjacentView> views;
  DepthGrid sparse;
  std::optional<DepthGrid> ground_truth;
  std::vector<TeacherHypothesis> teachers;

  int height() const { return target.height; }
  int width() const { return target.width; }

  // Dimension consistency, pose and intrinsics invariants, positive teacher
  // depths. Throws InvalidInput.
  void validate() const;
};

}  // namespace mondi
