#include "kp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "kp/csv.hpp"
#include "kp/errors.hpp"

namespace kp {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::infinity();

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (!ok) return false;
    }
    return true;
}

void check_id(const std::string& id, const std::string& what) {
    if (!valid_id(id))
        throw DataError(what + " id '" + id + "' invalid: ids use [A-Za-z0-9_.-] only");
}

}  // namespace

Instance::Instance(std::vector<Origin> origins, std::vector<Site> sites,
                   std::vector<double> site_major_distances, std::optional<double> d_max,
                   std::vector<std::string> warnings)
    : origins_(std::move(origins)),
      sites_(std::move(sites)),
      distances_(std::move(site_major_distances)),
      d_max_(d_max),
      warnings_(std::move(warnings)) {
    if (sites_.empty()) throw DataError("instance has no sites");
    if (origins_.empty()) throw DataError("instance has no origins with positive population");
    if (distances_.size() != origins_.size() * sites_.size())
        throw DataError("distance buffer size mismatch");

    weights_.reserve(origins_.size());
    for (std::size_t i = 0; i < origins_.size(); ++i) {
        const Origin& o = origins_[i];
        if (o.population <= 0) throw DataError("origin " + o.id + " has nonpositive population");
        if (!origin_idx_.emplace(o.id, i).second)
            throw DataError("duplicate origin id " + o.id);
        total_population_ += o.population;
        weights_.push_back(static_cast<double>(o.population));
    }

    std::size_t with_capacity = 0;
    for (std::size_t s = 0; s < sites_.size(); ++s) {
        const Site& site = sites_[s];
        if (!site_idx_.emplace(site.id, s).second)
            throw DataError("duplicate site id " + site.id);
        if (site.capacity) {
            if (!(*site.capacity > 0.0) || !std::isfinite(*site.capacity))
                throw DataError("site " + site.id + " capacity must be positive");
            ++with_capacity;
        }
        if (site.penalty && (!( *site.penalty >= 0.0) || !std::isfinite(*site.penalty)))
            throw DataError("site " + site.id + " penalty must be >= 0");
        if (site.existing)
            existing_.push_back(s);
        else
            candidates_.push_back(s);
    }
    if (with_capacity != 0 && with_capacity != sites_.size())
        throw DataError("capacities must be present on all sites or none");
    capacitated_ = with_capacity == sites_.size();

    for (std::size_t r = 0; r < origins_.size(); ++r) {
        bool any = false;
        for (std::size_t s = 0; s < sites_.size(); ++s) {
            const double d = distance(r, s);
            if (d == kAbsent) continue;
            if (!(d >= 0.0) || !std::isfinite(d))
                throw DataError("negative distance for origin " + origins_[r].id + ", site " +
                                sites_[s].id);
            any = true;
            ++entry_count_;
            max_distance_ = std::max(max_distance_, d);
        }
        if (!any)
            throw DataError("origin " + origins_[r].id + " has no distance entries");
    }
}

bool Instance::has_distance(std::size_t origin, std::size_t site) const {
    return distance(origin, site) != kAbsent;
}

std::size_t Instance::origin_index(const std::string& id) const {
    auto it = origin_idx_.find(id);
    if (it == origin_idx_.end()) throw DataError("unknown origin id " + id);
    return it->second;
}

std::size_t Instance::site_index(const std::string& id) const {
    auto it = site_idx_.find(id);
    if (it == site_idx_.end()) throw DataError("unknown site id " + id);
    return it->second;
}

namespace {

Instance assemble(std::vector<Origin> origins, std::vector<Site> sites,
                  const std::vector<std::tuple<std::string, std::string, double>>& entries,
                  std::vector<std::string> warnings) {
    // Canonical order: lexicographic by id.
    std::sort(origins.begin(), origins.end(),
              [](const Origin& a, const Origin& b) { return a.id < b.id; });
    std::sort(sites.begin(), sites.end(),
              [](const Site& a, const Site& b) { return a.id < b.id; });

    std::unordered_map<std::string, std::size_t> oidx, sidx;
    for (std::size_t i = 0; i < origins.size(); ++i) oidx.emplace(origins[i].id, i);
    for (std::size_t i = 0; i < sites.size(); ++i) sidx.emplace(sites[i].id, i);
    if (oidx.size() != origins.size())
        throw DataError("duplicate origin id in origins file");
    if (sidx.size() != sites.size()) throw DataError("duplicate site id in sites file");

    std::vector<double> dist(origins.size() * sites.size(), kAbsent);
    for (const auto& [oid, sid, meters] : entries) {
        auto oit = oidx.find(oid);
        if (oit == oidx.end()) continue;  // origin dropped (zero population) or unknown below
        auto sit = sidx.find(sid);
        if (sit == sidx.end()) throw DataError("distances reference unknown site id " + sid);
        if (!(meters >= 0.0) || !std::isfinite(meters))
            throw DataError("negative distance for origin " + oid + ", site " + sid);
        double& cell = dist[sit->second * origins.size() + oit->second];
        if (cell != kAbsent)
            throw DataError("duplicate distance entry for origin " + oid + ", site " + sid);
        cell = meters;
    }
    return Instance(std::move(origins), std::move(sites), std::move(dist), std::nullopt,
                    std::move(warnings));
}

}  // namespace

Instance build_instance(std::vector<Origin> origins, std::vector<Site> sites,
                        const std::vector<std::tuple<std::string, std::string, double>>& entries) {
    std::vector<std::string> warnings;
    std::vector<Origin> kept;
    std::set<std::string> dropped;
    for (Origin& o : origins) {
        check_id(o.id, "origin");
        if (o.population < 0) throw DataError("origin " + o.id + " has negative population");
        if (o.population == 0) {
            warnings.push_back("origin " + o.id + " dropped: zero population");
            dropped.insert(o.id);
            continue;
        }
        kept.push_back(std::move(o));
    }
    for (const Site& s : sites) check_id(s.id, "site");
    // Entries naming a dropped origin are discarded; entries naming an id that
    // never existed are an error (checked in assemble for sites, here for origins).
    std::set<std::string> known;
    for (const Origin& o : kept) known.insert(o.id);
    for (const auto& [oid, sid, meters] : entries) {
        (void)sid;
        (void)meters;
        if (!known.count(oid) && !dropped.count(oid))
            throw DataError("distances reference unknown origin id " + oid);
    }
    return assemble(std::move(kept), std::move(sites), entries, std::move(warnings));
}

Instance load_instance(const std::string& origins_path, const std::string& sites_path,
                       const std::string& distances_path) {
    csv::Table ot = csv::read_file(origins_path);
    const std::vector<std::string> plain = {"id", "population"};
    const std::vector<std::string> with_coords = {"id", "population", "lat", "lon"};
    const bool coords = ot.header == with_coords;
    if (!coords && ot.header != plain)
        throw DataError(origins_path + ": expected header 'id,population[,lat,lon]'");
    std::vector<Origin> origins;
    origins.reserve(ot.rows.size());
    for (std::size_t i = 0; i < ot.rows.size(); ++i) {
        const std::string where = origins_path + " row " + std::to_string(i + 1);
        Origin o;
        o.id = ot.rows[i][0];
        o.population = csv::parse_integer(ot.rows[i][1], where + " population");
        if (coords) {
            o.coords = {{csv::parse_double(ot.rows[i][2], where + " lat"),
                         csv::parse_double(ot.rows[i][3], where + " lon")}};
        }
        origins.push_back(std::move(o));
    }

    csv::Table st = csv::read_file(sites_path);
    if (st.header != std::vector<std::string>{"id", "existing", "capacity", "penalty"})
        throw DataError(sites_path + ": expected header 'id,existing,capacity,penalty'");
    std::vector<Site> sites;
    sites.reserve(st.rows.size());
    for (std::size_t i = 0; i < st.rows.size(); ++i) {
        const std::string where = sites_path + " row " + std::to_string(i + 1);
        Site s;
        s.id = st.rows[i][0];
        const std::string& ex = st.rows[i][1];
        if (ex == "0")
            s.existing = false;
        else if (ex == "1")
            s.existing = true;
        else
            throw DataError(where + ": existing must be 0 or 1");
        if (!st.rows[i][2].empty())
            s.capacity = csv::parse_double(st.rows[i][2], where + " capacity");
        if (!st.rows[i][3].empty())
            s.penalty = csv::parse_double(st.rows[i][3], where + " penalty");
        sites.push_back(std::move(s));
    }

    csv::Table dt = csv::read_file(distances_path);
    if (dt.header != std::vector<std::string>{"origin_id", "site_id", "meters"})
        throw DataError(distances_path + ": expected header 'origin_id,site_id,meters'");
    std::vector<std::tuple<std::string, std::string, double>> entries;
    entries.reserve(dt.rows.size());
    for (std::size_t i = 0; i < dt.rows.size(); ++i) {
        const std::string where = distances_path + " row " + std::to_string(i + 1);
        entries.emplace_back(dt.rows[i][0], dt.rows[i][1],
                             csv::parse_double(dt.rows[i][2], where + " meters"));
    }
    return build_instance(std::move(origins), std::move(sites), entries);
}

Instance sparsify(const Instance& instance, double d_max) {
    if (!(d_max > 0.0)) throw ConfigError("d_max must be positive");
    const std::size_t R = instance.origin_count();
    const std::size_t S = instance.site_count();
    std::vector<double> dist(R * S, kAbsent);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t r = 0; r < R; ++r) {
            const double d = instance.distance(r, s);
            if (d != kAbsent && d <= d_max) dist[s * R + r] = d;
        }
    }
    // Retain the nearest existing-site entry per origin even above d_max:
    // existing sites are fixed open, so this keeps every model feasible and
    // the alpha-seeding distribution computable.
    const auto& existing = instance.existing_indices();
    for (std::size_t r = 0; r < R; ++r) {
        bool kept_existing = false;
        double best = kAbsent;
        std::size_t best_site = 0;
        for (std::size_t s : existing) {
            const double d = instance.distance(r, s);
            if (d == kAbsent) continue;
            if (dist[s * R + r] != kAbsent) kept_existing = true;
            if (d < best) {
                best = d;
                best_site = s;
            }
        }
        if (!kept_existing && best != kAbsent) dist[best_site * R + r] = best;
    }
    for (std::size_t r = 0; r < R; ++r) {
        bool any = false;
        for (std::size_t s = 0; s < S && !any; ++s) any = dist[s * R + r] != kAbsent;
        if (!any)
            throw ConfigError("sparsify: origin " + instance.origins()[r].id +
                              " retains no distance entries at d_max=" + std::to_string(d_max));
    }
    std::vector<std::string> warnings = instance.warnings();
    std::optional<double> recorded =
        std::isfinite(d_max) ? std::optional<double>(d_max) : instance.d_max();
    return Instance(instance.origins(), instance.sites(), std::move(dist), recorded,
                    std::move(warnings));
}

std::vector<std::size_t> nearest_assignment_sites(const Instance& instance, SiteFilter filter) {
    std::vector<std::size_t> pool;
    for (std::size_t s = 0; s < instance.site_count(); ++s) {
        if (filter == SiteFilter::all || instance.sites()[s].existing) pool.push_back(s);
    }
    if (pool.empty()) throw DataError("no sites match the requested filter (existing-only?)");
    std::vector<std::size_t> chosen(instance.origin_count());
    for (std::size_t r = 0; r < instance.origin_count(); ++r) {
        double best = kAbsent;
        std::size_t best_site = 0;
        bool found = false;
        for (std::size_t s : pool) {  // pool is in id order; first strict win = lex tie-break
            const double d = instance.distance(r, s);
            if (d == kAbsent) continue;
            if (!found || d < best) {
                best = d;
                best_site = s;
                found = true;
            }
        }
        if (!found)
            throw DataError("origin " + instance.origins()[r].id +
                            " has no distance entry to any filtered site");
        chosen[r] = best_site;
    }
    return chosen;
}

Distribution nearest_assignment_distribution(const Instance& instance, SiteFilter filter) {
    std::vector<std::size_t> chosen = nearest_assignment_sites(instance, filter);
    std::vector<double> values(instance.origin_count());
    std::vector<double> weights(instance.population_weights().begin(),
                                instance.population_weights().end());
    for (std::size_t r = 0; r < chosen.size(); ++r) values[r] = instance.distance(r, chosen[r]);
    return make_distribution(std::move(values), std::move(weights));
}

}  // namespace kp
