// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   mondi_acceptance [--only N ...] [--scenes N] [--iters N] [--verbose]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mondi/ensemble.h"
#include "mondi/losses.h"
#include "mondi/metrics.h"
#include "mondi/photometric.h"
#include "mondi/pipeline.h"
#include "mondi/solver.h"
#include "mondi/synthetic.h"
#include "suite.h"

namespace fs = std::filesystem;
using namespace mondi;

namespace {

struct Options {
  int scenes = 20;
  int iters = 1000;
  bool verbose = false;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

ExperimentConfig suite_config(const Options& opt) {
  ExperimentConfig config;
  config.solver.max_iters = opt.iters;
  config.solver.log_every = opt.iters;
  config.seed = 2024;
  return config;
}

double mae_of(const std::vector<MethodRow>& rows, const std::string& method) {
  for (const MethodRow& r : rows)
    if (r.method == method) return r.report.mae;
  throw std::runtime_error("missing method row " + method);
}

void dump(const Options& opt, const std::vector<MethodRow>& rows) {
  if (opt.verbose) std::fputs(format_table(rows).c_str(), stderr);
}

// E(x) <= E_i(x) for every teacher at every pixel where E is valid.
Outcome lower_bound(const Options& opt) {
  const auto t0 = Clock::now();
  long checked = 0, violations = 0, coverage_errors = 0;
  for (const SceneBundle& scene : testing::make_suite("complementary", opt.scenes, 101)) {
    EnsembleScores scores;
    const DistillationProduct product = monitored_distill(scene, {}, false, &scores);
    for (std::size_t p = 0; p < product.residual.value.size(); ++p) {
      bool any = false;
      for (const ErrorMap& e : scores.weighted) any = any || e.valid.data[p];
      if (any != static_cast<bool>(product.residual.valid.data[p])) ++coverage_errors;
      if (!product.residual.valid.data[p]) continue;
      for (const ErrorMap& e : scores.weighted) {
        if (!e.valid.data[p]) continue;
        ++checked;
        if (!(product.residual.value.data[p] <= e.value.data[p])) ++violations;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && coverage_errors == 0 && checked > 0 && secs < 10.0,
          fmt("%ld violations, %ld coverage mismatches over %ld (pixel, teacher) pairs; %.1f s",
              violations, coverage_errors, checked, secs)};
}

// Analytic gradients against central differences with a 1e-3 m step.
Outcome gradient_oracle(const Options&) {
  const auto t0 = Clock::now();
  constexpr int kScenes = 5;
  constexpr int kProbes = 100;
  constexpr double kStep = 1e-3;
  struct Term {
    const char* name;
    LossWeights weights;
  };
  const std::vector<Term> terms = {
      {"md", {1, 0, 0, 0}},     {"co", {0, 1, 0, 0}},       {"st", {0, 0, 1, 0}},
      {"sm", {0, 0, 0, 1}},     {"total", LossWeights{}},
  };
  bool pass = true;
  std::string detail;
  int worst = kProbes;
  const std::vector<SceneBundle> scenes = testing::make_suite("mixed", kScenes, 202);
  for (int s = 0; s < kScenes; ++s) {
    const SceneBundle& scene = scenes[s];
    const DistillationProduct product = monitored_distill(scene, {});
    // Probe away from the optimum so the absolute-value kinks are rarely hit.
    std::mt19937_64 rng(mix_seed(303, s));
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    DepthGrid depth = *scene.ground_truth;
    for (double& d : depth.data) d *= jitter(rng);
    std::vector<int> pixels(depth.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<int>(i);
    std::shuffle(pixels.begin(), pixels.end(), rng);
    pixels.resize(kProbes);

    for (const Term& term : terms) {
      const LossBreakdown analytic = total_loss(depth, scene, product, term.weights);
      const std::vector<double> numeric =
          finite_difference_gradient(depth, scene, product, term.weights, pixels, kStep);
      int good = 0;
      for (int k = 0; k < kProbes; ++k) {
        const double a = analytic.gradient.data[pixels[k]];
        const double f = numeric[k];
        const double scale = std::max(std::abs(a), std::abs(f));
        const double rel = scale == 0.0 ? 0.0 : std::abs(a - f) / scale;
        if (rel < 1e-4) ++good;
      }
      worst = std::min(worst, good);
      if (good < 95) {
        pass = false;
        detail += fmt(" scene %d %s: %d/100;", s, term.name, good);
      }
    }
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 60.0;
  return {pass, fmt("worst term/scene %d/100 probes within 1e-4;%s %.1f s", worst, detail.c_str(), secs)};
}

// Monitored beats the naive ensembles and the beta-free ablation.
Outcome naive_ordering(const Options& opt) {
  const auto t0 = Clock::now();
  const std::vector<SceneBundle> scenes = testing::make_suite("complementary", opt.scenes, 404);
  const std::vector<Method> methods = {Method::parse("monitored"), Method::parse("mean"),
                                       Method::parse("median"), Method::parse("random"),
                                       Method::parse("no_beta")};
  const std::vector<MethodRow> rows = compare_methods(scenes, methods, suite_config(opt));
  dump(opt, rows);
  const double m = mae_of(rows, "monitored");
  const double mean = mae_of(rows, "mean");
  const double median = mae_of(rows, "median");
  const double random = mae_of(rows, "random");
  const double no_beta = mae_of(rows, "no_beta");
  const double secs = seconds_since(t0);
  return {m < mean && m < median && m < random && m < no_beta && secs < 300.0,
          fmt("MAE monitored %.4f, mean %.4f, median %.4f, random %.4f, no_beta %.4f; %.1f s", m,
              mean, median, random, no_beta, secs)};
}

// Two teachers wrong on disjoint regions: monitored beats either alone by 10%.
Outcome beyond_single_teacher(const Options& opt) {
  const auto t0 = Clock::now();
  const std::vector<SceneBundle> scenes = testing::make_suite("disjoint", opt.scenes, 505);
  const std::vector<Method> methods = {Method::parse("monitored"), Method::parse("single_teacher_1"),
                                       Method::parse("single_teacher_2")};
  const std::vector<MethodRow> rows = compare_methods(scenes, methods, suite_config(opt));
  dump(opt, rows);
  const double m = mae_of(rows, "monitored");
  const double best =
      std::min(mae_of(rows, "single_teacher_1"), mae_of(rows, "single_teacher_2"));
  return {m < 0.9 * best,
          fmt("MAE monitored %.4f vs best single teacher %.4f (ratio %.3f); %.1f s", m, best,
              m / best, seconds_since(t0))};
}

// Pure-noise teachers: the monitor shuts distillation off and the solve
// matches the unsupervised one. The default lambda keeps Q near 1 for any
// residual, so the suite uses a sharper monitor.
constexpr double kFallbackLambda = 1000.0;

Outcome fallback(const Options& opt) {
  const auto t0 = Clock::now();
  const std::vector<SceneBundle> scenes = testing::make_suite("noisy", opt.scenes, 606);
  ExperimentConfig config = suite_config(opt);
  config.ensemble.lambda = kFallbackLambda;

  long low = 0, total = 0;
  for (const SceneBundle& scene : scenes) {
    const DistillationProduct product = monitored_distill(scene, config.ensemble);
    for (double q : product.monitor.data) {
      low += q < 0.05;
      ++total;
    }
  }
  const double low_fraction = static_cast<double>(low) / static_cast<double>(total);

  const std::vector<Method> methods = {Method::parse("monitored"),
                                       Method::parse("unsupervised_only")};
  const std::vector<MethodRow> rows = compare_methods(scenes, methods, config);
  dump(opt, rows);
  const double m = mae_of(rows, "monitored");
  const double u = mae_of(rows, "unsupervised_only");
  const double gap = std::abs(m - u) / u;
  return {low_fraction > 0.95 && gap <= 0.05,
          fmt("lambda %.0f: Q < 0.05 on %.1f%% of pixels; MAE monitored %.4f vs unsupervised %.4f "
              "(%.1f%% apart); %.1f s",
              kFallbackLambda, 100.0 * low_fraction, m, u, 100.0 * gap, seconds_since(t0))};
}

Outcome density(const Options& opt) {
  const auto t0 = Clock::now();
  const std::vector<SceneBundle> scenes = testing::make_suite("complementary", opt.scenes, 707);
  const std::vector<double> densities = {0.005, 0.0015, 0.0005};
  const std::vector<Method> methods = {Method::parse("monitored")};
  const std::vector<MethodRow> rows = density_sweep(scenes, densities, methods, suite_config(opt));
  dump(opt, rows);
  return {rows[0].report.mae <= rows[1].report.mae && rows[1].report.mae <= rows[2].report.mae,
          fmt("MAE at 0.5%% %.4f, 0.15%% %.4f, 0.05%% %.4f; %.1f s", rows[0].report.mae,
              rows[1].report.mae, rows[2].report.mae, seconds_since(t0))};
}

// Naive reference with long double accumulation.
MetricReport reference_metrics(const DepthGrid& pred, const DepthGrid& gt, double lo, double hi) {
  long double abs_sum = 0, sq_sum = 0, iabs_sum = 0, isq_sum = 0;
  long n = 0;
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      const long double g = gt(y, x);
      if (g < lo || g > hi) continue;
      const long double p = pred(y, x);
      const long double e = p - g;
      const long double ie = 1.0L / p - 1.0L / g;
      abs_sum += std::fabs(e);
      sq_sum += e * e;
      iabs_sum += std::fabs(ie);
      isq_sum += ie * ie;
      ++n;
    }
  }
  MetricReport r;
  r.valid_count = n;
  r.mae = static_cast<double>(abs_sum / n);
  r.rmse = static_cast<double>(std::sqrt(sq_sum / n));
  r.imae = static_cast<double>(iabs_sum / n);
  r.irmse = static_cast<double>(std::sqrt(isq_sum / n));
  return r;
}

Outcome metric_oracle(const Options&) {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> side(1, 48);
  std::uniform_real_distribution<double> depth(0.05, 6.0);
  double worst = 0.0;
  int ordering_failures = 0;
  for (int g = 0; g < 100; ++g) {
    const int h = side(rng), w = side(rng);
    DepthGrid gt(h, w), pred(h, w);
    for (double& v : gt.data) v = depth(rng);
    for (double& v : pred.data) v = depth(rng);
    gt.data[0] = 1.0;  // at least one pixel inside the range
    const MetricReport got = evaluate(pred, gt, 0.2, 5.0);
    const MetricReport ref = reference_metrics(pred, gt, 0.2, 5.0);
    if (got.valid_count != ref.valid_count) worst = INFINITY;
    for (auto [a, b] : {std::pair{got.mae, ref.mae}, {got.rmse, ref.rmse}, {got.imae, ref.imae},
                        {got.irmse, ref.irmse}})
      worst = std::max(worst, std::abs(a - b));
    if (!(got.rmse >= got.mae) || !(got.irmse >= got.imae)) ++ordering_failures;
  }
  return {worst <= 1e-12 && ordering_failures == 0,
          fmt("max deviation from reference %.3g; %d ordering failures", worst, ordering_failures)};
}

Outcome photoconsistency(const Options& opt) {
  double worst_color = 0.0;
  int scale_failures = 0;
  const std::vector<SceneBundle> scenes = testing::make_suite("perfect", opt.scenes, 909);
  for (const SceneBundle& scene : scenes) {
    auto warps_for = [&](double scale) {
      DepthGrid d = *scene.ground_truth;
      for (double& v : d.data) v *= scale;
      std::vector<Reprojection> warps;
      for (const AdjacentView& v : scene.views)
        warps.push_back(reproject_image(v.image, d, scene.intrinsics, v.pose));
      return warps;
    };
    auto mean_error = [](const ErrorMap& e) {
      double sum = 0.0;
      long n = 0;
      for (std::size_t i = 0; i < e.value.size(); ++i) {
        if (!e.valid.data[i]) continue;
        sum += e.value.data[i];
        ++n;
      }
      return n > 0 ? sum / n : INFINITY;
    };
    const std::vector<Reprojection> gt_warps = warps_for(1.0);
    for (const Reprojection& w : gt_warps)
      worst_color = std::max(worst_color, mean_error(color_error(scene.target, w.image, w.mask)));
    const double p_gt = mean_error(photometric_error(scene.target, gt_warps));
    const double p_half = mean_error(photometric_error(scene.target, warps_for(0.5)));
    const double p_double = mean_error(photometric_error(scene.target, warps_for(2.0)));
    if (!(p_gt < p_half && p_gt < p_double)) ++scale_failures;
  }
  return {worst_color < 2e-2 && scale_failures == 0,
          fmt("worst mean color error %.4f; scaled depth beat ground truth on %d of %zu scenes",
              worst_color, scale_failures, scenes.size())};
}

#ifndef MONDI_CLI_PATH
#define MONDI_CLI_PATH "mondi"
#endif

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_pipeline(const fs::path& dir, int threads, const Options& opt, std::string& log) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "max_iters=" << std::min(opt.iters, 300) << "\nlog_every=25\n";
  }
  const std::string cli = MONDI_CLI_PATH;
  const std::string d = dir.string();
  const std::string env = "MONDI_THREADS=" + std::to_string(threads) + " ";
  const std::vector<std::string> steps = {
      "generate --seed 7 --scenes 1 --preset complementary --out " + d + "/scenes",
      "distill --bundle " + d + "/scenes/scene_000 --config " + d + "/run.cfg --out " + d + "/product",
      "solve --bundle " + d + "/scenes/scene_000 --product " + d + "/product --config " + d +
          "/run.cfg --out " + d + "/solve",
      "eval --bundle " + d + "/scenes/scene_000 --depth " + d + "/solve/depth.pfm --out " + d +
          "/metrics.csv",
  };
  for (const std::string& step : steps) {
    const std::string cmd = env + "\"" + cli + "\" " + step + " >> " + d + "/../log_" +
                            std::to_string(threads) + ".txt 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      log = "step failed: " + step;
      return rc;
    }
  }
  return 0;
}

Outcome determinism(const Options& opt) {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "mondi_acceptance_determinism";
  fs::remove_all(root);
  std::string log;
  for (int threads : {1, 8}) {
    if (run_pipeline(root / ("threads_" + std::to_string(threads)), threads, opt, log) != 0)
      return {false, log};
  }
  long files = 0, differing = 0;
  const fs::path a = root / "threads_1";
  const fs::path b = root / "threads_8";
  std::set<fs::path> names;
  for (const fs::path& side : {a, b})
    for (const auto& entry : fs::recursive_directory_iterator(side))
      if (entry.is_regular_file()) names.insert(fs::relative(entry.path(), side));
  for (const fs::path& rel : names) {
    ++files;
    if (!fs::exists(a / rel) || !fs::exists(b / rel) || read_all(a / rel) != read_all(b / rel)) {
      ++differing;
      if (opt.verbose) std::fprintf(stderr, "differs: %s\n", rel.string().c_str());
    }
  }
  const bool finite_table = read_all(a / "metrics.csv").find("nan") == std::string::npos;
  fs::remove_all(root);
  return {differing == 0 && files > 0 && finite_table,
          fmt("%ld of %ld output files differ between 1 and 8 threads; %.1f s", differing, files,
              seconds_since(t0))};
}

// Q = 1 everywhere and only the distillation term: the solve must reach d-bar.
Outcome perfect_teacher(const Options& opt) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  const std::vector<SceneBundle> scenes = testing::make_suite("perfect", std::min(opt.scenes, 5), 1010);
  for (const SceneBundle& scene : scenes) {
    DistillationProduct product = monitored_distill(scene, {});
    std::fill(product.monitor.data.begin(), product.monitor.data.end(), 1.0);
    SolverConfig config;
    config.max_iters = 2000;
    config.init_mode = InitMode::kConstant;
    const SolveResult result = solve(scene, product, LossWeights{1, 0, 0, 0}, config);
    double sum = 0.0;
    for (std::size_t i = 0; i < result.depth.size(); ++i)
      sum += std::abs(result.depth.data[i] - product.distilled.data[i]);
    worst = std::max(worst, sum / static_cast<double>(result.depth.size()));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 30.0,
          fmt("worst MAE to d-bar %.2e m after 2000 iterations on %zu scenes; %.1f s", worst,
              scenes.size(), secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mondi acceptance suite"};
  Options opt;
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--scenes", opt.scenes, "Scenes per suite")->check(CLI::PositiveNumber);
  app.add_option("--iters", opt.iters, "Solver iterations for suite solves")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", opt.verbose, "Print method tables to stderr");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome(const Options&)>>> criteria = {
      {"distillation lower bound", lower_bound},
      {"gradient oracle", gradient_oracle},
      {"ordering against naive ensembles", naive_ordering},
      {"beyond any single teacher", beyond_single_teacher},
      {"fall-back to unsupervised", fallback},
      {"density monotonicity", density},
      {"metric oracle", metric_oracle},
      {"synthetic photoconsistency", photoconsistency},
      {"pipeline determinism", determinism},
      {"perfect-teacher convergence", perfect_teacher},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second(opt);
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("[%s] %2d %s: %s\n", outcome.pass ? "PASS" : "FAIL", id, criteria[i].first,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
