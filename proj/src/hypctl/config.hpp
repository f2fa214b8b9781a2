#pragma once

#include "hypctl/plant.hpp"

#include <stdexcept>
#include <string>

namespace hypctl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a run needs: the plant, the design parameters, and the
// simulation setup.
struct ProblemConfig {
    PlantSpec plant;
    DesignParams design;
    SimConfig sim;
};

// Sectioned key/value text format. Coefficient entries are expression
// strings in z (canonical form) or sampled tables written as
// "table: v0 v1 ...". Numeric matrices are row-major float lists.
ProblemConfig load_config(const std::string& path);
ProblemConfig parse_config(const std::string& text);

std::string config_to_string(const ProblemConfig& cfg);
void save_config(const std::string& path, const ProblemConfig& cfg);

// FNV-1a over the raw file bytes, for provenance records.
std::string fnv1a_hex(const std::string& bytes);

} // namespace hypctl
