#include "mondi/run_config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "mondi/bundle_io.h"
#include "mondi/pfm.h"

namespace mondi {
namespace {

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key, "expected a number, got '" + value + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& value) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  return v;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"w_md", [](RunConfig& c, const auto& k, const auto& v) { c.weights.md = to_double(k, v); }},
      {"w_ph", [](RunConfig& c, const auto& k, const auto& v) { c.weights.ph = to_double(k, v); }},
      {"w_st", [](RunConfig& c, const auto& k, const auto& v) { c.weights.st = to_double(k, v); }},
      {"w_sm", [](RunConfig& c, const auto& k, const auto& v) { c.weights.sm = to_double(k, v); }},
      {"alpha", [](RunConfig& c, const auto& k, const auto& v) { c.ensemble.alpha = to_double(k, v); }},
      {"lambda", [](RunConfig& c, const auto& k, const auto& v) { c.ensemble.lambda = to_double(k, v); }},
      {"k", [](RunConfig& c, const auto& k, const auto& v) { c.ensemble.neighborhood = to_integer<int>(k, v); }},
      {"max_iters", [](RunConfig& c, const auto& k, const auto& v) { c.solver.max_iters = to_integer<int>(k, v); }},
      {"step_size", [](RunConfig& c, const auto& k, const auto& v) { c.solver.step_size = to_double(k, v); }},
      {"moment1", [](RunConfig& c, const auto& k, const auto& v) { c.solver.moment1 = to_double(k, v); }},
      {"moment2", [](RunConfig& c, const auto& k, const auto& v) { c.solver.moment2 = to_double(k, v); }},
      {"min_depth", [](RunConfig& c, const auto& k, const auto& v) { c.solver.min_depth = to_double(k, v); }},
      {"max_depth", [](RunConfig& c, const auto& k, const auto& v) { c.solver.max_depth = to_double(k, v); }},
      {"init_mode",
       [](RunConfig& c, const auto& k, const auto& v) {
         try {
           c.solver.init_mode = parse_init_mode(v);
         } catch (const InvalidInput& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"log_every", [](RunConfig& c, const auto& k, const auto& v) { c.solver.log_every = to_integer<int>(k, v); }},
      {"final_step_fraction",
       [](RunConfig& c, const auto& k, const auto& v) { c.solver.final_step_fraction = to_double(k, v); }},
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = to_integer<std::uint64_t>(k, v); }},
      {"method", [](RunConfig& c, const auto&, const auto& v) { c.method = v; }},
  };
  return table;
}

template <typename Fn>
void check(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  for (const auto& [key, w] : {std::pair{"w_md", weights.md}, std::pair{"w_ph", weights.ph},
                               std::pair{"w_st", weights.st}, std::pair{"w_sm", weights.sm}}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError(key, "weights must be finite and >= 0");
  }
  check("w_md", [&] { weights.validate(); });
  if (!(ensemble.alpha > 0.0) || !std::isfinite(ensemble.alpha)) throw ConfigError("alpha", "must be positive");
  if (!(ensemble.lambda > 0.0) || !std::isfinite(ensemble.lambda)) throw ConfigError("lambda", "must be positive");
  if (ensemble.neighborhood < 1 || ensemble.neighborhood % 2 == 0)
    throw ConfigError("k", "must be odd and >= 1");
  if (solver.max_iters < 0) throw ConfigError("max_iters", "must be >= 0");
  if (!(solver.step_size > 0.0)) throw ConfigError("step_size", "must be positive");
  if (!(solver.moment1 >= 0.0 && solver.moment1 < 1.0)) throw ConfigError("moment1", "must lie in [0,1)");
  if (!(solver.moment2 >= 0.0 && solver.moment2 < 1.0)) throw ConfigError("moment2", "must lie in [0,1)");
  if (!(solver.min_depth > 0.0)) throw ConfigError("min_depth", "must be positive");
  if (!(solver.max_depth > solver.min_depth) || !std::isfinite(solver.max_depth))
    throw ConfigError("max_depth", "must exceed min_depth");
  if (solver.log_every < 1) throw ConfigError("log_every", "must be >= 1");
  if (!(solver.final_step_fraction > 0.0 && solver.final_step_fraction <= 1.0))
    throw ConfigError("final_step_fraction", "must lie in (0,1]");
  check("method", [&] { Method::parse(method); });
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.ensemble = ensemble;
  e.weights = weights;
  e.solver = solver;
  e.seed = seed;
  e.eval_min_depth = solver.min_depth;
  e.eval_max_depth = solver.max_depth;
  return e;
}

RunConfig parse_run_config(const std::string& text) {
  KeyValues kv;
  try {
    kv = parse_key_values(text);
  } catch (const FormatError& e) {
    throw ConfigError("<syntax>", e.what());
  }
  RunConfig config;
  for (const auto& [key, value] : kv) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

std::string to_text(const RunConfig& c) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  line("w_md", format_double(c.weights.md));
  line("w_ph", format_double(c.weights.ph));
  line("w_st", format_double(c.weights.st));
  line("w_sm", format_double(c.weights.sm));
  line("alpha", format_double(c.ensemble.alpha));
  line("lambda", format_double(c.ensemble.lambda));
  line("k", std::to_string(c.ensemble.neighborhood));
  line("max_iters", std::to_string(c.solver.max_iters));
  line("step_size", format_double(c.solver.step_size));
  line("moment1", format_double(c.solver.moment1));
  line("moment2", format_double(c.solver.moment2));
  line("min_depth", format_double(c.solver.min_depth));
  line("max_depth", format_double(c.solver.max_depth));
  line("init_mode", to_string(c.solver.init_mode));
  line("log_every", std::to_string(c.solver.log_every));
  line("final_step_fraction", format_double(c.solver.final_step_fraction));
  line("seed", std::to_string(c.seed));
  line("method", c.method);
  return out;
}

}  // namespace mondi
