#include "fixtures.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "kp/errors.hpp"

namespace kpt {

const std::vector<std::tuple<std::string, std::string, double>>& tiny_entries() {
    static const std::vector<std::tuple<std::string, std::string, double>> entries = {
        {"r1", "s1", 100}, {"r1", "s2", 50},  {"r1", "s3", 0},
        {"r2", "s1", 100}, {"r2", "s2", 75},  {"r2", "s3", 0},
        {"r3", "s1", 100}, {"r3", "s2", 125}, {"r3", "s3", 200},
        {"r4", "s1", 100}, {"r4", "s2", 150}, {"r4", "s3", 200},
    };
    return entries;
}

kp::Instance tiny() {
    return tiny_with_sites({kp::Site{"s1", false, {}, {}}, kp::Site{"s2", false, {}, {}},
                            kp::Site{"s3", false, {}, {}}});
}

kp::Instance tiny_with_sites(std::vector<kp::Site> sites) {
    std::vector<kp::Origin> origins = {
        {"r1", 1, {}}, {"r2", 1, {}}, {"r3", 1, {}}, {"r4", 1, {}}};
    return kp::build_instance(std::move(origins), std::move(sites), tiny_entries());
}

TempDir::TempDir() {
    namespace fs = std::filesystem;
    static int counter = 0;
    path = (fs::temp_directory_path() /
            ("kpfl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++)))
               .string();
    fs::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
}

std::string TempDir::file(const std::string& name, const std::string& content) const {
    const std::string full = path + "/" + name;
    std::ofstream out(full, std::ios::binary);
    out << content;
    out.close();
    return full;
}

kp::Instance random_instance(std::uint64_t seed, int origins, int sites, int existing,
                             bool capacitated) {
    kp::SynthSpec spec;
    spec.seed = seed;
    spec.origins = origins;
    spec.sites = sites;
    spec.existing = existing;
    spec.capacitated = capacitated;
    spec.k = 0;
    return kp::synthesize_instance(spec);
}

}  // namespace kpt
