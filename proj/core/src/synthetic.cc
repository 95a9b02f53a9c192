#include "mondi/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "mondi/parallel.h"

namespace mondi {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(std::int64_t ix, std::int64_t iy, std::int64_t iz, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(ix));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy));
  h = splitmix64(h ^ static_cast<std::uint64_t>(iz));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// C2 value noise in [0,1].
double value_noise(const Eigen::Vector3d& p, std::uint64_t seed) {
  const double fx = std::floor(p.x());
  const double fy = std::floor(p.y());
  const double fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = fade(p.x() - fx);
  const double ty = fade(p.y() - fy);
  const double tz = fade(p.z() - fz);
  double acc = 0.0;
  for (int dz = 0; dz <= 1; ++dz) {
    const double wz = dz ? tz : 1.0 - tz;
    for (int dy = 0; dy <= 1; ++dy) {
      const double wy = dy ? ty : 1.0 - ty;
      for (int dx = 0; dx <= 1; ++dx) {
        const double wx = dx ? tx : 1.0 - tx;
        acc += wx * wy * wz * lattice_value(ix + dx, iy + dy, iz + dz, seed);
      }
    }
  }
  return acc;
}

// Texture octaves: lattice spacing in meters and relative amplitude.
constexpr double kCellSizes[] = {0.32, 0.16};
constexpr double kOctaveWeights[] = {0.6, 0.4};
double texture(const Eigen::Vector3d& point, std::uint64_t plane_seed, double contrast,
               int channel) {
  const std::uint64_t base_seed = mix_seed(plane_seed, 100 + channel);
  const double base = 0.3 + 0.4 * lattice_value(0, 0, 0, base_seed);
  double n = 0.0;
  for (int o = 0; o < 2; ++o)
    n += kOctaveWeights[o] *
         (value_noise(point / kCellSizes[o], mix_seed(plane_seed, 10 * channel + o)) - 0.5);
  return std::clamp(base + contrast * n, 0.0, 1.0);
}

double box_blur_at(const DepthGrid& depth, int y, int x, int radius) {
  double acc = 0.0;
  int n = 0;
  for (int yy = std::max(0, y - radius); yy <= std::min(depth.height - 1, y + radius); ++yy)
    for (int xx = std::max(0, x - radius); xx <= std::min(depth.width - 1, x + radius); ++xx) {
      acc += depth(yy, xx);
      ++n;
    }
  return acc / n;
}

double to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

void quantize(std::vector<double>& data) {
  for (double& v : data) v = to_float(v);
}

RigidPose random_view_pose(std::mt19937_64& rng, const SceneOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const double baseline =
      options.min_baseline + (options.max_baseline - options.min_baseline) * unit(rng);
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  Eigen::Vector3d dir(std::cos(angle), 0.5 * std::sin(angle), 0.2 * sym(rng));
  dir.normalize();
  Eigen::Vector3d axis(sym(rng), sym(rng), sym(rng));
  if (axis.norm() < 1e-6) axis = Eigen::Vector3d::UnitY();
  const double rot = 0.02 * sym(rng);  // up to ~1.1 degrees
  RigidPose pose;
  pose.rotation = Eigen::AngleAxisd(rot, axis.normalized()).toRotationMatrix();
  pose.translation = baseline * dir;
  return pose;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
}

void PlanarScene::validate() const {
  camera.validate();
  if (planes.empty()) throw InvalidInput("scene has no planes");
  if (view_poses.empty() || !view_poses.front().is_identity())
    throw InvalidInput("view pose 0 must be the identity");
  for (const auto& p : planes) {
    if (std::abs(p.normal.norm() - 1.0) > 1e-9) throw InvalidInput("plane normals must be unit length");
  }
  for (const auto& pose : view_poses) pose.validate();
  if (!(min_depth > 0.0 && min_depth < max_depth)) throw InvalidInput("invalid scene depth range");
}

RenderedView render(const PlanarScene& scene, int view) {
  scene.validate();
  if (view < 0 || view >= static_cast<int>(scene.view_poses.size()))
    throw InvalidInput("render: view index out of range");
  const CameraIntrinsics& K = scene.camera;
  const RigidPose& pose = scene.view_poses[view];
  const Eigen::Matrix3d Rt = pose.rotation.transpose();
  const Eigen::Vector3d center = -(Rt * pose.translation);
  for (const auto& plane : scene.planes) {
    if (!(plane.normal.dot(center) < plane.offset))
      throw GenerationError("camera center lies outside the scene volume");
  }

  RenderedView out{ImageGrid(K.height, K.width, 3, 0.0), DepthGrid(K.height, K.width, 0.0)};
  std::vector<int> failures(K.height, 0);
  parallel_rows(K.height, [&](int y) {
    for (int x = 0; x < K.width; ++x) {
      const Eigen::Vector3d ray((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      const Eigen::Vector3d dir = Rt * ray;
      int best = -1;
      double best_s = 0.0;
      for (std::size_t p = 0; p < scene.planes.size(); ++p) {
        const Plane& plane = scene.planes[p];
        const double denom = plane.normal.dot(dir);
        if (!(denom > 1e-12)) continue;
        const double s = (plane.offset - plane.normal.dot(center)) / denom;
        if (!(s > 0.0)) continue;
        if (best < 0 || s < best_s ||
            (s == best_s && plane.priority > scene.planes[best].priority)) {
          best = static_cast<int>(p);
          best_s = s;
        }
      }
      // The hit point in view coordinates is best_s * ray, so best_s is the depth.
      if (best < 0 || !(best_s > scene.min_depth && best_s <= scene.max_depth)) {
        failures[y] = 1;
        continue;
      }
      out.depth(y, x) = best_s;
      const Eigen::Vector3d hit = center + best_s * dir;
      for (int c = 0; c < 3; ++c) out.image(y, x, c) = texture(hit, scene.planes[best].texture_seed, scene.planes[best].contrast, c);
    }
  });
  if (std::any_of(failures.begin(), failures.end(), [](int f) { return f != 0; }))
    throw GenerationError("render: a ray missed every plane inside the depth range");
  return out;
}

DepthGrid sample_sparse(const DepthGrid& ground_truth, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw InvalidInput("sample_sparse: density must lie in (0,1]");
  const std::size_t n = ground_truth.size();
  const auto count = static_cast<std::size_t>(std::floor(density * static_cast<double>(n)));
  if (count == 0) throw InvalidInput("sample_sparse: density yields zero samples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample, and
  // smaller counts take a prefix of the same permutation.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  DepthGrid out(ground_truth.height, ground_truth.width, 0.0);
  for (std::size_t i = 0; i < count; ++i) out.data[order[i]] = ground_truth.data[order[i]];
  return out;
}

std::string to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::kScale: return "scale";
    case CorruptionMode::kRegionalBias: return "regional_bias";
    case CorruptionMode::kNoise: return "noise";
    case CorruptionMode::kSmoothing: return "smoothing";
  }
  return "unknown";
}

TeacherHypothesis make_teacher(const DepthGrid& depth, const CorruptionSpec& spec, int id) {
  if (!std::isfinite(spec.magnitude)) throw InvalidInput("make_teacher: magnitude must be finite");
  if (spec.region) {
    const PixelRect& r = *spec.region;
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > depth.width || r.y1 > depth.height || r.x0 > r.x1 ||
        r.y0 > r.y1)
      throw InvalidInput("make_teacher: region outside the image");
  }
  TeacherHypothesis t{id, depth};
  switch (spec.mode) {
    case CorruptionMode::kScale:
      for (double& d : t.depth.data) d *= spec.magnitude;
      break;
    case CorruptionMode::kRegionalBias:
      for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x)
          if (!spec.region || spec.region->contains(x, y)) t.depth(y, x) += spec.magnitude;
      break;
    case CorruptionMode::kNoise: {
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> noise(0.0, std::abs(spec.magnitude));
      for (double& d : t.depth.data) d += noise(rng);
      break;
    }
    case CorruptionMode::kSmoothing: {
      const int radius = static_cast<int>(std::lround(std::abs(spec.magnitude)));
      for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) t.depth(y, x) = box_blur_at(depth, y, x, radius);
      break;
    }
  }
  for (double& d : t.depth.data) d = std::max(d, kTeacherDepthFloor);
  return t;
}

PlanarScene random_scene(const SceneOptions& options, std::uint64_t seed) {
  if (options.size < 8) throw InvalidInput("random_scene: size must be >= 8");
  if (options.views < 1) throw InvalidInput("random_scene: need at least one adjacent view");
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  PlanarScene scene;
  const int n = options.size;
  scene.camera = {0.9 * n, 0.9 * n, 0.5 * (n - 1), 0.5 * (n - 1), n, n};

  auto add_plane = [&](Eigen::Vector3d normal, double offset) {
    scene.planes.push_back({normal.normalized(), offset, mix_seed(seed, 1000 + scene.planes.size()),
                            static_cast<int>(scene.planes.size()), 0.7});
  };
  add_plane({uniform(-0.1, 0.1), uniform(-0.1, 0.1), 1.0}, uniform(2.6, 3.8));  // back wall
  add_plane({0.0, 1.0, uniform(-0.15, 0.05)}, uniform(0.7, 1.2));                // floor
  const int extras = static_cast<int>(unit(rng) * 3.0);
  for (int e = 0; e < extras; ++e) {
    switch (static_cast<int>(unit(rng) * 3.0)) {
      case 0: add_plane({-1.0, 0.0, uniform(-0.2, 0.2)}, uniform(1.0, 1.6)); break;  // left wall
      case 1: add_plane({1.0, 0.0, uniform(-0.2, 0.2)}, uniform(1.0, 1.6)); break;   // right wall
      default: add_plane({0.0, -1.0, uniform(-0.2, 0.1)}, uniform(1.0, 1.6)); break; // ceiling
    }
  }

  scene.view_poses.push_back(RigidPose::identity());
  for (int v = 0; v < options.views; ++v) scene.view_poses.push_back(random_view_pose(rng, options));
  return scene;
}

std::vector<TeacherRecipe> teacher_preset(const std::string& name, int width, int height,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 2));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int split = static_cast<int>(std::lround(width * (0.4 + 0.2 * unit(rng))));
  const int top = static_cast<int>(height * 0.15 * unit(rng));
  const int bottom = height - static_cast<int>(height * 0.15 * unit(rng));
  const PixelRect left{0, top, split, bottom};
  const PixelRect right{split, top, width, bottom};
  // Opposite signs: one teacher too near on the left, the other too far on
  // the right, so neither the mean nor the median cancels the bias.
  constexpr double kBias = 0.8;

  const CorruptionSpec bias_left{CorruptionMode::kRegionalBias, -kBias, 0, left};
  const CorruptionSpec bias_right{CorruptionMode::kRegionalBias, kBias, 0, right};
  if (name == "complementary") {
    return {{bias_left}, {bias_right}, {bias_left, {CorruptionMode::kScale, 1.5, 0, std::nullopt}}};
  }
  if (name == "disjoint") return {{bias_left}, {bias_right}};
  if (name == "noisy") {
    std::vector<TeacherRecipe> out;
    for (int i = 0; i < 3; ++i)
      out.push_back({{CorruptionMode::kNoise, 2.0, mix_seed(seed, 50 + i), std::nullopt}});
    return out;
  }
  if (name == "perfect") return {{{CorruptionMode::kScale, 1.0, 0, std::nullopt}}};
  if (name == "mixed") {
    return {{bias_left},
            {{CorruptionMode::kSmoothing, 3.0, 0, std::nullopt}},
            {{CorruptionMode::kNoise, 0.2, mix_seed(seed, 60), std::nullopt}}};
  }
  throw InvalidInput("unknown teacher preset '" + name + "'");
}

SceneBundle make_bundle(const PlanarScene& scene, const std::vector<TeacherRecipe>& recipes,
                        double density, std::uint64_t seed) {
  if (recipes.empty()) throw InvalidInput("make_bundle: no teacher recipes");
  SceneBundle bundle;
  bundle.intrinsics = scene.camera;
  RenderedView target = render(scene, 0);
  bundle.target = std::move(target.image);
  bundle.ground_truth = std::move(target.depth);
  quantize(bundle.ground_truth->data);
  for (std::size_t v = 1; v < scene.view_poses.size(); ++v)
    bundle.views.push_back({render(scene, static_cast<int>(v)).image, scene.view_poses[v]});
  bundle.sparse = sample_sparse(*bundle.ground_truth, density, mix_seed(seed, 3));
  int id = 1;
  for (const TeacherRecipe& recipe : recipes) {
    TeacherHypothesis t{id, *bundle.ground_truth};
    for (const CorruptionSpec& spec : recipe) t = make_teacher(t.depth, spec, id);
    bundle.teachers.push_back(std::move(t));
    ++id;
  }
  quantize_to_float(bundle);
  bundle.validate();
  return bundle;
}

SceneBundle generate_bundle(const SceneOptions& options, const std::string& preset,
                            std::uint64_t seed, int index) {
  if (index < 0) throw InvalidInput("generate_bundle: negative scene index");
  const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(index));
  const PlanarScene scene = random_scene(options, mix_seed(s, 1));
  return make_bundle(scene, teacher_preset(preset, options.size, options.size, mix_seed(s, 2)),
                     options.density, mix_seed(s, 3));
}

void quantize_to_float(SceneBundle& bundle) {
  quantize(bundle.target.data);
  for (auto& v : bundle.views) quantize(v.image.data);
  quantize(bundle.sparse.data);
  if (bundle.ground_truth) quantize(bundle.ground_truth->data);
  for (auto& t : bundle.teachers) quantize(t.depth.data);
}

}  // namespace mondi
