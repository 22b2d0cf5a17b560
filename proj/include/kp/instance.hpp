#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kp/distribution.hpp"

namespace kp {

struct Origin {
    std::string id;
    long long population = 0;  // people
    std::optional<std::pair<double, double>> coords;  // (lat, lon) degrees
};

struct Site {
    std::string id;
    bool existing = false;
    std::optional<double> capacity;  // people
    std::optional<double> penalty;   // meters; marks membership in the penalized set
};

// Immutable after construction; safe to share across threads.
//
// Distances are stored dense, site-major (one contiguous column of |R|
// doubles per site), with +inf marking absent entries so the enumeration
// kernels can scan columns directly.
class Instance {
  public:
    Instance(std::vector<Origin> origins, std::vector<Site> sites,
             std::vector<double> site_major_distances, std::optional<double> d_max,
             std::vector<std::string> warnings);

    const std::vector<Origin>& origins() const { return origins_; }
    const std::vector<Site>& sites() const { return sites_; }
    long long total_population() const { return total_population_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    std::optional<double> d_max() const { return d_max_; }

    std::size_t origin_count() const { return origins_.size(); }
    std::size_t site_count() const { return sites_.size(); }

    // +inf when the entry is absent.
    double distance(std::size_t origin, std::size_t site) const {
        return distances_[site * origins_.size() + origin];
    }
    bool has_distance(std::size_t origin, std::size_t site) const;
    std::span<const double> column(std::size_t site) const {
        return {distances_.data() + site * origins_.size(), origins_.size()};
    }
    std::size_t entry_count() const { return entry_count_; }

    // Population weights as doubles, aligned with origins().
    std::span<const double> population_weights() const { return weights_; }

    std::size_t origin_index(const std::string& id) const;
    std::size_t site_index(const std::string& id) const;
    bool has_site(const std::string& id) const { return site_idx_.count(id) > 0; }

    // Indices of non-existing sites (candidates) and existing sites, in id order.
    const std::vector<std::size_t>& candidate_indices() const { return candidates_; }
    const std::vector<std::size_t>& existing_indices() const { return existing_; }

    bool capacitated() const { return capacitated_; }

    // Max distance over stored entries; 0 when there are none.
    double max_distance() const { return max_distance_; }

  private:
    std::vector<Origin> origins_;
    std::vector<Site> sites_;
    std::vector<double> distances_;  // site-major dense, +inf = absent
    std::vector<double> weights_;
    std::vector<std::size_t> candidates_, existing_;
    std::unordered_map<std::string, std::size_t> origin_idx_, site_idx_;
    std::optional<double> d_max_;
    std::vector<std::string> warnings_;
    long long total_population_ = 0;
    std::size_t entry_count_ = 0;
    double max_distance_ = 0.0;
    bool capacitated_ = false;
};

// CSV schemas:
//   origins.csv    id,population[,lat,lon]
//   sites.csv      id,existing,capacity,penalty   (empty cell = absent)
//   distances.csv  origin_id,site_id,meters
// Zero-population origins are dropped with a warning. Origins and sites are
// kept in lexicographic id order, so identical files (in any row order)
// produce identical instances.
Instance load_instance(const std::string& origins_path, const std::string& sites_path,
                       const std::string& distances_path);

// In-memory construction used by the generator and tests; applies the same
// validation as load_instance.
Instance build_instance(std::vector<Origin> origins, std::vector<Site> sites,
                        const std::vector<std::tuple<std::string, std::string, double>>& entries);

// Drops entries with d > d_max. The nearest existing-site entry of each
// origin is always retained so that models with fixed-open existing sites
// stay feasible. An origin left without any entry is an error naming it.
Instance sparsify(const Instance& instance, double d_max);

enum class SiteFilter { existing_only, all };

// z_r = min over filtered sites of d(r,s); ties broken toward the
// lexicographically smallest site id. Weights are populations.
Distribution nearest_assignment_distribution(const Instance& instance, SiteFilter filter);

// The chosen nearest site per origin, same tie-break.
std::vector<std::size_t> nearest_assignment_sites(const Instance& instance, SiteFilter filter);

}  // namespace kp
