#include "mondi/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "mondi/synthetic.h"

namespace mondi {

MetricReport evaluate(const DepthGrid& prediction, const DepthGrid& ground_truth, double min_depth,
                      double max_depth) {
  if (!prediction.same_shape(ground_truth)) throw InvalidInput("evaluate: dimension mismatch");
  if (!(min_depth < max_depth)) throw InvalidInput("evaluate: min_depth must be below max_depth");
  double abs_sum = 0.0, sq_sum = 0.0, iabs_sum = 0.0, isq_sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const double gt = ground_truth.data[i];
    if (!(gt > 0.0) || gt < min_depth || gt > max_depth) continue;
    const double pred = prediction.data[i];
    if (!(pred > 0.0)) throw InvalidInput("evaluate: prediction must be positive on evaluated pixels");
    const double e = std::abs(pred - gt);
    const double ie = std::abs(1.0 / pred - 1.0 / gt);
    abs_sum += e;
    sq_sum += e * e;
    iabs_sum += ie;
    isq_sum += ie * ie;
    ++n;
  }
  if (n == 0) throw InvalidInput("evaluate: no valid ground-truth pixels in range");
  MetricReport r;
  r.valid_count = n;
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.imae = iabs_sum / n;
  r.irmse = std::sqrt(isq_sum / n);
  // Power-mean inequality; a constant residual can round RMSE one ulp below MAE.
  r.rmse = std::max(r.rmse, r.mae);
  r.irmse = std::max(r.irmse, r.imae);
  return r;
}

std::string Method::name() const {
  switch (kind) {
    case MethodKind::kMonitored: return "monitored";
    case MethodKind::kMean: return "mean";
    case MethodKind::kMedian: return "median";
    case MethodKind::kRandom: return "random";
    case MethodKind::kNoBeta: return "no_beta";
    case MethodKind::kUnsupervisedOnly: return "unsupervised_only";
    case MethodKind::kSingleTeacher: return "single_teacher_" + std::to_string(teacher);
  }
  return "unknown";
}

Method Method::parse(const std::string& text) {
  if (text == "monitored") return {MethodKind::kMonitored};
  if (text == "mean") return {MethodKind::kMean};
  if (text == "median") return {MethodKind::kMedian};
  if (text == "random") return {MethodKind::kRandom};
  if (text == "no_beta") return {MethodKind::kNoBeta};
  if (text == "unsupervised_only") return {MethodKind::kUnsupervisedOnly};
  const std::string prefix = "single_teacher_";
  if (text.rfind(prefix, 0) == 0) {
    int index = 0;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec == std::errc() && ptr == last && index >= 1) return {MethodKind::kSingleTeacher, index};
  }
  throw InvalidInput("unknown method '" + text + "'");
}

namespace {

DistillationProduct trusted_product(const DepthGrid& depth) {
  DistillationProduct p;
  p.distilled = depth;
  p.residual = ErrorMap(depth.height, depth.width);
  p.monitor = MonitorGrid(depth.height, depth.width, 1.0);
  p.selection = IndexGrid(depth.height, depth.width, 0);
  return p;
}

}  // namespace

LossWeights method_weights(const Method& method, const LossWeights& weights) {
  LossWeights out = weights;
  if (method.kind == MethodKind::kUnsupervisedOnly) out.md = 0.0;
  return out;
}

MethodSupervision method_supervision(const SceneBundle& scene, const Method& method,
                                     const ExperimentConfig& config, std::uint64_t scene_seed) {
  MethodSupervision out{{}, method_weights(method, config.weights)};
  switch (method.kind) {
    case MethodKind::kMonitored:
      out.product = monitored_distill(scene, config.ensemble);
      break;
    case MethodKind::kNoBeta:
      out.product = monitored_distill(scene, config.ensemble, /*force_unit_beta=*/true);
      break;
    case MethodKind::kMean:
      out.product = trusted_product(baseline_ensemble(scene.teachers, BaselineMode::kMean, scene_seed));
      break;
    case MethodKind::kMedian:
      out.product =
          trusted_product(baseline_ensemble(scene.teachers, BaselineMode::kMedian, scene_seed));
      break;
    case MethodKind::kRandom:
      out.product =
          trusted_product(baseline_ensemble(scene.teachers, BaselineMode::kRandom, scene_seed));
      break;
    case MethodKind::kUnsupervisedOnly: {
      out.product = trusted_product(baseline_ensemble(scene.teachers, BaselineMode::kMedian, scene_seed));
      std::fill(out.product.monitor.data.begin(), out.product.monitor.data.end(), 0.0);
      break;
    }
    case MethodKind::kSingleTeacher: {
      if (method.teacher < 1 || method.teacher > static_cast<int>(scene.teachers.size()))
        throw InvalidInput("single_teacher index out of range");
      SceneBundle single = scene;
      single.teachers = {scene.teachers[method.teacher - 1]};
      single.teachers.front().id = 1;
      out.product = monitored_distill(single, config.ensemble);
      break;
    }
  }
  return out;
}

DepthGrid run_method(const SceneBundle& scene, const Method& method, const ExperimentConfig& config,
                     std::uint64_t scene_seed) {
  const MethodSupervision sup = method_supervision(scene, method, config, scene_seed);
  return solve(scene, sup.product, sup.weights, config.solver).depth;
}

std::vector<MethodRow> compare_methods(std::span<const SceneBundle> scenes,
                                       std::span<const Method> methods,
                                       const ExperimentConfig& config) {
  if (scenes.empty()) throw InvalidInput("compare_methods: no scenes");
  if (methods.empty()) throw InvalidInput("compare_methods: no methods");
  double density = 0.0;
  for (const SceneBundle& s : scenes) {
    if (!s.ground_truth) throw InvalidInput("compare_methods: scenes need ground truth");
    long valid = 0;
    for (double z : s.sparse.data) valid += z > 0.0;
    density += static_cast<double>(valid) / static_cast<double>(s.sparse.size());
  }
  density /= static_cast<double>(scenes.size());

  std::vector<MethodRow> rows;
  for (const Method& method : methods) {
    MethodRow row{method.name(), density, {}};
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const DepthGrid depth = run_method(scenes[i], method, config, mix_seed(config.seed, i));
      const MetricReport r =
          evaluate(depth, *scenes[i].ground_truth, config.eval_min_depth, config.eval_max_depth);
      row.report.mae += r.mae;
      row.report.rmse += r.rmse;
      row.report.imae += r.imae;
      row.report.irmse += r.irmse;
      row.report.valid_count += r.valid_count;
    }
    const double inv = 1.0 / static_cast<double>(scenes.size());
    row.report.mae *= inv;
    row.report.rmse *= inv;
    row.report.imae *= inv;
    row.report.irmse *= inv;
    rows.push_back(row);
  }
  return rows;
}

std::vector<MethodRow> density_sweep(std::span<const SceneBundle> scenes,
                                     std::span<const double> densities,
                                     std::span<const Method> methods,
                                     const ExperimentConfig& config) {
  std::set<double> seen;
  for (double d : densities) {
    if (!(d > 0.0 && d <= 1.0)) throw InvalidInput("density_sweep: densities must lie in (0,1]");
    if (!seen.insert(d).second) throw InvalidInput("density_sweep: densities must be distinct");
  }
  std::vector<MethodRow> rows;
  for (double density : densities) {
    std::vector<SceneBundle> resampled(scenes.begin(), scenes.end());
    for (std::size_t i = 0; i < resampled.size(); ++i) {
      if (!resampled[i].ground_truth) throw InvalidInput("density_sweep: scenes need ground truth");
      resampled[i].sparse =
          sample_sparse(*resampled[i].ground_truth, density, mix_seed(config.seed, 7000 + i));
    }
    for (MethodRow& row : compare_methods(resampled, methods, config)) {
      row.density = density;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

}  // namespace

std::string format_table(std::span<const MethodRow> rows) {
  std::string out = "method,density,mae_m,rmse_m,imae_per_m,irmse_per_m,valid_count\n";
  for (const MethodRow& r : rows) {
    out += r.method + "," + fmt(r.density) + "," + fmt(r.report.mae) + "," + fmt(r.report.rmse) +
           "," + fmt(r.report.imae) + "," + fmt(r.report.irmse) + "," +
           std::to_string(r.report.valid_count) + "\n";
  }
  return out;
}

}  // namespace mondi
