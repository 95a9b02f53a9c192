#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"
#include "mondi/geometry.h"
#include "mondi/grid.h"

namespace mondi {

// Infinite plane {X : normal . X = offset} in the target camera frame.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 1.0;
  std::uint64_t texture_seed = 0;
  int priority = 0;  // breaks exact depth ties; higher wins
  double contrast = 0.7;  // amplitude of the texture around its base color
};

// Piecewise-planar scene. view_poses[0] is the target view and must be the
// identity; view_poses[j] maps target-frame points into view j.
struct PlanarScene {
  std::vector<Plane> planes;
  CameraIntrinsics camera;
  std::vector<RigidPose> view_poses;
  double min_depth = 0.2;
  double max_depth = 5.0;

  void validate() const;
};

struct RenderedView {
  ImageGrid image;
  DepthGrid depth;
};

// Ray-casts every pixel of view `view` against all planes and keeps the
// nearest hit. Color is a band-limited value-noise texture evaluated at the
// 3D hit point, so corresponding pixels agree across views. Throws
// GenerationError when a ray misses every plane or lands outside the depth
// range.
RenderedView render(const PlanarScene& scene, int view);

// Samples floor(density * H * W) distinct pixels uniformly; others are 0.
// Sample sets for the same seed are nested across densities.
DepthGrid sample_sparse(const DepthGrid& ground_truth, double density, std::uint64_t seed);

enum class CorruptionMode { kScale, kRegionalBias, kNoise, kSmoothing };

std::string to_string(CorruptionMode mode);

// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct CorruptionSpec {
  CorruptionMode mode = CorruptionMode::kScale;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
  std::optional<PixelRect> region;
};

// Depth floor applied after additive corruptions.
inline constexpr double kTeacherDepthFloor = 1e-3;

// scale: depth * magnitude. regional_bias: + magnitude meters inside the
// region (whole image when absent). noise: + N(0, magnitude^2). smoothing:
// box blur of radius round(magnitude). Results are floored at
// kTeacherDepthFloor.
TeacherHypothesis make_teacher(const DepthGrid& depth, const CorruptionSpec& spec, int id = 1);

// A teacher built by applying corruptions in order to the ground truth.
using TeacherRecipe = std::vector<CorruptionSpec>;

struct SceneOptions {
  int size = 64;
  int views = 2;
  double min_baseline = 0.1;
  double max_baseline = 0.2;
  double density = 0.005;
};

// Random room-like scene: a back wall, a floor, and up to two extra side or
// ceiling planes, viewed from the target plus `views` translated cameras.
PlanarScene random_scene(const SceneOptions& options, std::uint64_t seed);

// Named teacher ensembles:
//   complementary  two regional-bias teachers on disjoint halves (0.8 m too
//                  near on the left, 0.8 m too far on the right) plus a 1.5x
//                  scaled twin of the first
//   disjoint       the two regional-bias teachers only
//   noisy          three teachers with 2 m Gaussian noise
//   perfect        one teacher equal to the ground truth
//   mixed          regional bias, edge smoothing and mild noise
std::vector<TeacherRecipe> teacher_preset(const std::string& name, int width, int height,
                                          std::uint64_t seed);

// Renders the scene, samples sparse depth, and builds the teachers. All grids
// are rounded to float precision so the bundle survives a file round trip.
SceneBundle make_bundle(const PlanarScene& scene, const std::vector<TeacherRecipe>& recipes,
                        double density, std::uint64_t seed);

// Scene `index` of a seeded suite: geometry, teachers and sparse points come
// from independent sub-seeds of mix_seed(seed, index).
SceneBundle generate_bundle(const SceneOptions& options, const std::string& preset,
                            std::uint64_t seed, int index);

// Rounds every grid to float precision (grids are stored as float32 on disk).
void quantize_to_float(SceneBundle& bundle);

// Deterministic 64-bit mix for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mondi
