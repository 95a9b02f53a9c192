// mondi: generate scenes, distill teacher ensembles, solve for depth,
// evaluate, and run method comparisons.
//
// Exit status: 0 success, 2 bad configuration, 3 missing input file,
// 1 any other failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mondi/bundle_io.h"
#include "mondi/errors.h"
#include "mondi/metrics.h"
#include "mondi/pfm.h"
#include "mondi/run_config.h"
#include "mondi/solver.h"
#include "mondi/synthetic.h"

namespace fs = std::filesystem;
using namespace mondi;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string method;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Run configuration (key=value lines)");
  cmd->add_option("--seed", common.seed, "Overrides the configuration seed");
  cmd->add_option("--method", common.method, "Overrides the configuration method");
}

// Everything is parsed and validated before the first write.
RunConfig resolve_config(const Common& common) {
  RunConfig config = common.config_path.empty() ? RunConfig{} : load_run_config(common.config_path);
  if (common.seed) config.seed = *common.seed;
  if (!common.method.empty()) config.method = common.method;
  config.validate();
  return config;
}

double sparse_density(const SceneBundle& bundle) {
  long valid = 0;
  for (double z : bundle.sparse.data) valid += z > 0.0;
  return static_cast<double>(valid) / static_cast<double>(bundle.sparse.size());
}

std::string trace_csv(const SolveTrace& trace) {
  std::string out = "iteration,md,co,st,sm,total\n";
  for (const TraceEntry& e : trace.entries) {
    out += std::to_string(e.iteration) + "," + format_double(e.md) + "," + format_double(e.co) +
           "," + format_double(e.st) + "," + format_double(e.sm) + "," + format_double(e.total) +
           "\n";
  }
  return out;
}

std::vector<fs::path> bundle_dirs(const fs::path& root) {
  if (fs::exists(root / "manifest.txt")) return {root};
  if (!fs::is_directory(root)) throw MissingFile(root);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.txt")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw InvalidInput("no scene bundles under " + root.string());
  return dirs;
}

int run(int argc, char** argv) {
  CLI::App app{"Monitored distillation of depth-completion teacher ensembles"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write seeded synthetic scene bundles");
  std::uint64_t gen_seed = 0;
  int gen_scenes = 1;
  std::string gen_preset = "complementary";
  SceneOptions gen_options;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Suite seed");
  gen->add_option("--scenes", gen_scenes, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--preset", gen_preset, "Teacher preset")
      ->check(CLI::IsMember({"complementary", "disjoint", "noisy", "perfect", "mixed"}));
  gen->add_option("--size", gen_options.size, "Image width and height in pixels");
  gen->add_option("--views", gen_options.views, "Adjacent views per scene");
  gen->add_option("--density", gen_options.density, "Sparse depth density");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // distill
  auto* dis = app.add_subcommand("distill", "Distill the bundle's teachers for a method");
  Common dis_common;
  std::string dis_bundle, dis_out;
  add_common(dis, dis_common);
  dis->add_option("--bundle", dis_bundle, "Scene bundle directory")->required();
  dis->add_option("--out", dis_out, "Product directory")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Optimize a depth field against the objective");
  Common sol_common;
  std::string sol_bundle, sol_product, sol_out;
  add_common(sol, sol_common);
  sol->add_option("--bundle", sol_bundle, "Scene bundle directory")->required();
  sol->add_option("--product", sol_product, "Product directory from distill")->required();
  sol->add_option("--out", sol_out, "Output directory (depth.pfm, trace.csv)")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a depth map against ground truth");
  Common ev_common;
  std::string ev_bundle, ev_depth, ev_out;
  add_common(ev, ev_common);
  ev->add_option("--bundle", ev_bundle, "Scene bundle directory with ground truth")->required();
  ev->add_option("--depth", ev_depth, "Predicted depth PFM")->required();
  ev->add_option("--out", ev_out, "Metric table (CSV); stdout when omitted");

  // ablate
  auto* abl = app.add_subcommand("ablate", "Compare methods, optionally across densities");
  Common abl_common;
  std::string abl_bundles, abl_out;
  std::vector<std::string> abl_methods = {"monitored", "mean", "median", "random", "no_beta"};
  std::vector<double> abl_densities;
  add_common(abl, abl_common);
  abl->add_option("--bundles", abl_bundles, "A bundle or a directory of bundles")->required();
  abl->add_option("--methods", abl_methods, "Methods to compare")->delimiter(',');
  abl->add_option("--densities", abl_densities, "Resample sparse depth at these densities")
      ->delimiter(',');
  abl->add_option("--out", abl_out, "Metric table (CSV); stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto emit = [](const std::string& out, const std::string& text) {
    if (out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      write_file_atomic(out, text);
    }
  };

  if (gen->parsed()) {
    for (int i = 0; i < gen_scenes; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%03d", i);
      write_bundle(fs::path(gen_out) / name, generate_bundle(gen_options, gen_preset, gen_seed, i));
    }
    return 0;
  }
  if (dis->parsed()) {
    const RunConfig config = resolve_config(dis_common);
    const SceneBundle bundle = read_bundle(dis_bundle);
    const MethodSupervision sup = method_supervision(bundle, Method::parse(config.method),
                                                     config.experiment(), mix_seed(config.seed, 0));
    write_product(dis_out, sup.product);
    return 0;
  }
  if (sol->parsed()) {
    const RunConfig config = resolve_config(sol_common);
    const SceneBundle bundle = read_bundle(sol_bundle);
    const DistillationProduct product = read_product(sol_product);
    const LossWeights weights = method_weights(Method::parse(config.method), config.weights);
    const SolveResult result = solve(bundle, product, weights, config.solver);
    fs::create_directories(sol_out);
    write_pfm(fs::path(sol_out) / "depth.pfm", to_pfm(result.depth));
    write_file_atomic(fs::path(sol_out) / "trace.csv", trace_csv(result.trace));
    return 0;
  }
  if (ev->parsed()) {
    const RunConfig config = resolve_config(ev_common);
    const SceneBundle bundle = read_bundle(ev_bundle);
    if (!bundle.ground_truth) throw InvalidInput("bundle " + ev_bundle + " has no ground truth");
    const DepthGrid depth = depth_from_pfm(read_pfm(ev_depth));
    const MethodRow row{config.method, sparse_density(bundle),
                        evaluate(depth, *bundle.ground_truth, config.solver.min_depth,
                                 config.solver.max_depth)};
    emit(ev_out, format_table(std::vector<MethodRow>{row}));
    return 0;
  }
  if (abl->parsed()) {
    const RunConfig config = resolve_config(abl_common);
    std::vector<Method> methods;
    for (const std::string& m : abl_methods) {
      try {
        methods.push_back(Method::parse(m));
      } catch (const InvalidInput& e) {
        throw ConfigError("method", e.what());
      }
    }
    std::vector<SceneBundle> scenes;
    for (const fs::path& dir : bundle_dirs(abl_bundles)) scenes.push_back(read_bundle(dir));
    const std::vector<MethodRow> rows =
        abl_densities.empty() ? compare_methods(scenes, methods, config.experiment())
                              : density_sweep(scenes, abl_densities, methods, config.experiment());
    emit(abl_out, format_table(rows));
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "mondi: %s\n", e.what());
    return 2;
  } catch (const MissingFile& e) {
    std::fprintf(stderr, "mondi: missing file: %s\n", e.path().string().c_str());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mondi: %s\n", e.what());
    return 1;
  }
}
