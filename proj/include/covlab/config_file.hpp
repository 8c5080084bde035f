#pragma once

#include <istream>
#include <string>

#include "covlab/harness.hpp"

namespace covlab {

// Flat key=value experiment configs with '#' comments and [a, b, c] lists.
// Unknown keys, duplicate keys, and malformed values are rejected with
// file:line context. `kind` (screening | qq) is required; every other key
// falls back to the ExperimentConfig default.
ExperimentConfig parse_experiment_config(std::istream& in, const std::string& name);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace covlab
