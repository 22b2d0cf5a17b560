#pragma once

#include <string>
#include <vector>

namespace kp {

// A weighted travel-distance distribution: value z_r in meters, weight in
// people. Weights are doubles so that split-demand scoring can carry
// fractional person-weights; instance populations themselves stay integral.
struct Distribution {
    std::vector<double> values;
    std::vector<double> weights;
    double total_weight = 0.0;  // T
};

// Validates lengths, finiteness, nonnegativity, and T > 0.
Distribution make_distribution(std::vector<double> values, std::vector<double> weights);

// CSV with header `value_meters,weight`.
Distribution load_distribution_csv(const std::string& path);

struct SummaryStats {
    double mean = 0.0;   // population-weighted, meters
    double max = 0.0;    // meters
    double stdev = 0.0;  // population-weighted sample stdev (divisor T-1), meters
    double kp_ede = 0.0; // meters
};

}  // namespace kp
