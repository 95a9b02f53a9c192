#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mondi/errors.h"
#include "mondi/losses.h"
#include "mondi/metrics.h"
#include "mondi/pipeline.h"
#include "mondi/solver.h"

namespace mondi {

// A rejected configuration entry. `key` names the offending key.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : InvalidInput("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  LossWeights weights;
  EnsembleParams ensemble;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::string method = "monitored";

  // Validates every field; throws ConfigError naming the first bad key.
  void validate() const;
  ExperimentConfig experiment() const;
};

// key=value text. Accepted keys: w_md w_ph w_st w_sm alpha lambda k max_iters
// step_size moment1 moment2 min_depth max_depth init_mode log_every
// final_step_fraction seed method. Unknown keys are rejected. Unlisted keys
// keep their defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_text(const RunConfig& config);

}  // namespace mondi
