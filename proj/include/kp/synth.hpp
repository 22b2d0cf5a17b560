#pragma once

#include <cstdint>
#include <string>

#include "kp/instance.hpp"

namespace kp {

// Desk-scale synthetic instances: origins and sites on an integer grid,
// Euclidean distances scaled to meters, integer populations. Output is a
// deterministic function of the spec (one fixed RNG algorithm, no
// platform-dependent distributions).
struct SynthSpec {
    std::uint64_t seed = 0;
    int origins = 40;
    int sites = 12;
    int existing = 0;
    int k = 1;  // validated against the candidate count only
    bool capacitated = false;
    int penalized = 0;  // candidate sites marked as penalized (cost filled by planning)
    int grid = 100;     // grid cells per side
    double cell_m = 100.0;
};

struct SynthFiles {
    std::string origins_csv;
    std::string sites_csv;
    std::string distances_csv;
};

SynthFiles synthesize(const SynthSpec& spec);
Instance synthesize_instance(const SynthSpec& spec);

}  // namespace kp
