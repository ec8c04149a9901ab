#ifndef DABP_GENERATORS_HPP
#define DABP_GENERATORS_HPP

#include <cstdint>
#include <string>

#include "dabp/cop.hpp"

namespace dabp {

enum class Family { RandomCop, Wgcp, ScaleFree, SmallWorld };

std::string family_name(Family f);
Family family_from_name(const std::string& name); // throws on unknown name

// Benchmark generator configuration. Every output is a deterministic
// function of (config, seed). Fields left at their sentinel take the family
// default: domain 15 (WGCP: 5), costs uniform on [0,100] (WGCP: a single
// uniform [1,100] weight per constraint on the equal-assignment diagonal).
struct GeneratorConfig {
    Family family = Family::RandomCop;
    int num_variables = 0;
    int domain_size = 0;  // 0 -> family default
    double p1 = 0.25;     // random-cop / wgcp: pairwise constraint probability
    int m0 = 10;          // scale-free: seed ring size
    int m1 = 10;          // scale-free: attachments per new vertex
    int k = 10;           // small-world: ring-lattice neighbors (even)
    double p = 0.3;       // small-world: shortcut probability
    double cost_min = -1; // negative -> family default
    double cost_max = -1;
    std::uint64_t seed = 0;
};

COPInstance gen_random_cop(const GeneratorConfig& cfg);
COPInstance gen_wgcp(const GeneratorConfig& cfg);
COPInstance gen_scale_free(const GeneratorConfig& cfg);
COPInstance gen_small_world(const GeneratorConfig& cfg);

// Dispatch on cfg.family.
COPInstance generate(const GeneratorConfig& cfg);

} // namespace dabp

#endif
