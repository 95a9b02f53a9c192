#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"
#include "mondi/losses.h"
#include "mondi/pipeline.h"
#include "mondi/solver.h"

namespace mondi {

struct MetricReport {
  double mae = 0.0;    // m
  double rmse = 0.0;   // m
  double imae = 0.0;   // 1/m
  double irmse = 0.0;  // 1/m
  long valid_count = 0;
};

// Errors over pixels whose ground truth lies in [min_depth, max_depth].
// Throws InvalidInput when no pixel qualifies or a prediction on a qualifying
// pixel is not positive.
MetricReport evaluate(const DepthGrid& prediction, const DepthGrid& ground_truth, double min_depth,
                      double max_depth);

enum class MethodKind { kMonitored, kMean, kMedian, kRandom, kNoBeta, kUnsupervisedOnly, kSingleTeacher };

struct Method {
  MethodKind kind = MethodKind::kMonitored;
  int teacher = 0;  // 1-based, single_teacher only

  std::string name() const;
  // "monitored", "mean", "median", "random", "no_beta", "unsupervised_only",
  // "single_teacher_<i>".
  static Method parse(const std::string& text);
};

struct ExperimentConfig {
  EnsembleParams ensemble;
  LossWeights weights;
  SolverConfig solver;
  std::uint64_t seed = 0;
  double eval_min_depth = 0.2;
  double eval_max_depth = 5.0;
};

// Supervision for one method:
//   monitored        monitored distillation
//   no_beta          monitored distillation with every beta forced to 1
//   mean/median/random  the naive ensemble, fully trusted (Q = 1)
//   unsupervised_only   Q = 0 and w_md = 0
//   single_teacher_i    teacher i alone, Q from its own weighted residual
struct MethodSupervision {
  DistillationProduct product;
  LossWeights weights;
};

// Loss weights a method trains with: unsupervised_only drops w_md, every
// other method keeps `weights`.
LossWeights method_weights(const Method& method, const LossWeights& weights);

MethodSupervision method_supervision(const SceneBundle& scene, const Method& method,
                                     const ExperimentConfig& config, std::uint64_t scene_seed);

// Distill (per the method) then solve.
DepthGrid run_method(const SceneBundle& scene, const Method& method, const ExperimentConfig& config,
                     std::uint64_t scene_seed);

struct MethodRow {
  std::string method;
  double density = 0.0;
  MetricReport report;  // unweighted mean over scenes; valid_count is summed
};

// Runs every method on every scene and averages the metrics. Scene i uses the
// seed mix_seed(config.seed, i). The density column is the mean sparse
// density of the scenes.
std::vector<MethodRow> compare_methods(std::span<const SceneBundle> scenes,
                                       std::span<const Method> methods,
                                       const ExperimentConfig& config);

// compare_methods after resampling each scene's sparse map from its ground
// truth at every density (same per-scene seed at every density).
std::vector<MethodRow> density_sweep(std::span<const SceneBundle> scenes,
                                     std::span<const double> densities,
                                     std::span<const Method> methods,
                                     const ExperimentConfig& config);

// CSV with columns method,density,mae,rmse,imae,irmse,valid_count; units are
// stated in the header.
std::string format_table(std::span<const MethodRow> rows);

}  // namespace mondi
