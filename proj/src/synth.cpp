#include "kp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "kp/errors.hpp"

namespace kp {

namespace {

// Platform-stable draws on top of mt19937_64 (std distributions are not
// specified bit-for-bit across standard libraries).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

double draw_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string pad_id(char prefix, int index, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, index);
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Layout {
    std::vector<std::pair<int, int>> origin_cells, site_cells;
    std::vector<long long> populations;
    std::vector<double> capacities;
};

Layout lay_out(const SynthSpec& spec) {
    if (spec.origins < 1 || spec.sites < 1) throw ConfigError("synth needs origins and sites >= 1");
    if (spec.existing < 0 || spec.existing > spec.sites)
        throw ConfigError("synth existing count out of range");
    if (spec.penalized < 0 || spec.penalized > spec.sites - spec.existing)
        throw ConfigError("synth penalized count exceeds candidate count");
    if (spec.k < 0 || spec.k > spec.sites - spec.existing)
        throw ConfigError("synth k exceeds candidate count");
    const long long cells = static_cast<long long>(spec.grid) * spec.grid;
    if (cells < spec.origins || cells < spec.sites)
        throw ConfigError("synth grid too small for the requested counts");

    std::mt19937_64 rng(spec.seed);
    Layout lay;
    auto sample_cells = [&](int count) {
        std::set<std::uint64_t> used;
        std::vector<std::pair<int, int>> out;
        while (static_cast<int>(out.size()) < count) {
            const std::uint64_t cell = draw_below(rng, static_cast<std::uint64_t>(cells));
            if (!used.insert(cell).second) continue;
            out.push_back({static_cast<int>(cell % spec.grid),
                           static_cast<int>(cell / spec.grid)});
        }
        return out;
    };
    lay.origin_cells = sample_cells(spec.origins);
    lay.site_cells = sample_cells(spec.sites);
    for (int i = 0; i < spec.origins; ++i)
        lay.populations.push_back(1 + static_cast<long long>(draw_below(rng, 100)));
    if (spec.capacitated) {
        long long T = 0;
        for (long long p : lay.populations) T += p;
        double total = 0.0;
        for (int i = 0; i < spec.sites; ++i) {
            const double u = 0.9 + 1.1 * draw_unit(rng);
            double c = std::ceil(static_cast<double>(T) * u / spec.sites);
            lay.capacities.push_back(std::max(1.0, c));
            total += lay.capacities.back();
        }
        if (total < 1.2 * static_cast<double>(T)) {
            const double scale = 1.2 * static_cast<double>(T) / total;
            for (double& c : lay.capacities) c = std::ceil(c * scale);
        }
    }
    return lay;
}

}  // namespace

SynthFiles synthesize(const SynthSpec& spec) {
    Layout lay = lay_out(spec);
    const int ow = static_cast<int>(std::to_string(spec.origins).size());
    const int sw = static_cast<int>(std::to_string(spec.sites).size());

    std::ostringstream origins;
    origins << "id,population\n";
    for (int i = 0; i < spec.origins; ++i)
        origins << pad_id('r', i + 1, ow) << "," << lay.populations[i] << "\n";

    std::ostringstream sites;
    sites << "id,existing,capacity,penalty\n";
    for (int i = 0; i < spec.sites; ++i) {
        const bool existing = i < spec.existing;
        const bool penalized = !existing && i >= spec.sites - spec.penalized;
        sites << pad_id('s', i + 1, sw) << "," << (existing ? 1 : 0) << ",";
        if (spec.capacitated) sites << fmt(lay.capacities[i]);
        sites << ",";
        if (penalized) sites << "0";
        sites << "\n";
    }

    std::ostringstream distances;
    distances << "origin_id,site_id,meters\n";
    for (int r = 0; r < spec.origins; ++r) {
        for (int s = 0; s < spec.sites; ++s) {
            const double dx = lay.origin_cells[r].first - lay.site_cells[s].first;
            const double dy = lay.origin_cells[r].second - lay.site_cells[s].second;
            const double d = std::hypot(dx, dy) * spec.cell_m;
            distances << pad_id('r', r + 1, ow) << "," << pad_id('s', s + 1, sw) << "," << fmt(d)
                      << "\n";
        }
    }
    return SynthFiles{origins.str(), sites.str(), distances.str()};
}

Instance synthesize_instance(const SynthSpec& spec) {
    Layout lay = lay_out(spec);
    const int ow = static_cast<int>(std::to_string(spec.origins).size());
    const int sw = static_cast<int>(std::to_string(spec.sites).size());
    std::vector<Origin> origins;
    for (int i = 0; i < spec.origins; ++i)
        origins.push_back(Origin{pad_id('r', i + 1, ow), lay.populations[i], std::nullopt});
    std::vector<Site> sites;
    for (int i = 0; i < spec.sites; ++i) {
        Site s;
        s.id = pad_id('s', i + 1, sw);
        s.existing = i < spec.existing;
        if (spec.capacitated) s.capacity = lay.capacities[i];
        if (!s.existing && i >= spec.sites - spec.penalized) s.penalty = 0.0;
        sites.push_back(std::move(s));
    }
    std::vector<std::tuple<std::string, std::string, double>> entries;
    for (int r = 0; r < spec.origins; ++r)
        for (int s = 0; s < spec.sites; ++s) {
            const double dx = lay.origin_cells[r].first - lay.site_cells[s].first;
            const double dy = lay.origin_cells[r].second - lay.site_cells[s].second;
            entries.emplace_back(pad_id('r', r + 1, ow), pad_id('s', s + 1, sw),
                                 std::hypot(dx, dy) * spec.cell_m);
        }
    return build_instance(std::move(origins), std::move(sites), entries);
}

}  // namespace kp
