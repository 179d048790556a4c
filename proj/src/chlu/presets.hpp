#pragma once

#include <string>
#include <vector>

#include "chlu/train.hpp"

namespace chlu {

// Model architecture plus training configuration for one experiment kind.
// These are the built-in defaults; a config file overrides field by field.
struct ExperimentPreset {
  std::vector<int> hidden; // hidden layer widths, scalar output head implicit
  double c = 3.0;
  double m0 = 1.0;
  double alpha = 0.05;
  std::uint64_t model_seed = 0; // potential initialization stream
  TrainConfig train;
};

// kind is "lemniscate", "sine", or "images". train.epsilon = 0 in a preset
// means "use the dataset spacing"; callers resolve it before training.
ExperimentPreset experiment_preset(const std::string& kind);

// Applies "model.*" and "train.*" keys from a key-value config file on top
// of p. Unknown keys are rejected so typos fail loudly.
void overlay_config_file(const std::string& path, ExperimentPreset& p);

} // namespace chlu
