#pragma once

#include <string>
#include <vector>

#include "kp/instance.hpp"
#include "kp/synth.hpp"

namespace kpt {

// Four origins of population 1, three candidate sites, dense 4x3 matrix.
// Columns embed the reference distributions: s1 = (100,100,100,100),
// s2 = (50,75,125,150), s3 = (0,0,200,200).
kp::Instance tiny();

// Same layout with custom site rows (existing flags, capacities, penalties).
kp::Instance tiny_with_sites(std::vector<kp::Site> sites);

const std::vector<std::tuple<std::string, std::string, double>>& tiny_entries();

// Temporary directory wiped on destruction.
struct TempDir {
    std::string path;
    TempDir();
    ~TempDir();
    std::string file(const std::string& name, const std::string& content) const;
};

// Deterministic desk-scale random instance for property suites.
kp::Instance random_instance(std::uint64_t seed, int origins, int sites, int existing,
                             bool capacitated = false);

}  // namespace kpt
