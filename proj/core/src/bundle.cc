#include "mondi/bundle.h"

#include <cmath>

namespace mondi {

void SceneBundle::validate() const {
  intrinsics.validate();
  const int H = target.height;
  const int W = target.width;
  if (H != intrinsics.height || W != intrinsics.width)
    throw InvalidInput("bundle: target image does not match the intrinsics");
  if (target.channels <= 0) throw InvalidInput("bundle: target image has no channels");
  if (views.empty()) throw InvalidInput("bundle: at least one adjacent view is required");
  for (const AdjacentView& v : views) {
    if (!v.image.same_shape(target)) throw InvalidInput("bundle: view image dimensions differ");
    v.pose.validate();
  }
  if (!sparse.same_shape(target)) throw InvalidInput("bundle: sparse depth dimensions differ");
  for (double z : sparse.data)
    if (!std::isfinite(z) || z < 0.0) throw InvalidInput("bundle: sparse depth must be finite and >= 0");
  if (ground_truth && !ground_truth->same_shape(target))
    throw InvalidInput("bundle: ground-truth dimensions differ");
  if (teachers.empty()) throw InvalidInput("bundle: no teachers");
  for (const TeacherHypothesis& t : teachers) {
    if (!t.depth.same_shape(target)) throw InvalidInput("bundle: teacher dimensions differ");
    for (double d : t.depth.data)
      if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("bundle: teacher depths must be positive");
  }
}

}  // namespace mondi
