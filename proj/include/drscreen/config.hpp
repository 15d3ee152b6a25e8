#pragma once

#include <string>
#include <vector>

#include "drscreen/inputs.hpp"

namespace drscreen {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads one or more JSON configuration files (later files deep-merge over
// earlier ones), resolves the life table CSV relative to the config file,
// validates every cross-module invariant, and stamps a stable digest of the
// canonicalized configuration into ModelInputs::config_hash.
// Sections: graders, strategies, transitions, utilities, costs, discounting,
// cohort; optional: wtp, psa, tornado.
ModelInputs load_config(const std::vector<std::string>& paths);
ModelInputs load_config(const std::string& path);

// Tornado ranges configured under "tornado.ranges"; when absent, every
// PSA-varied parameter gets a ±10% range clamped to its domain.
struct TornadoConfig {
  std::vector<std::pair<std::string, std::pair<double, double>>> ranges;
};
TornadoConfig load_tornado_config(const std::vector<std::string>& paths,
                                  const ModelInputs& inputs);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace drscreen
