#include "dabp/generators.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

#include "dabp/rng.hpp"

namespace dabp {

std::string family_name(Family f) {
    switch (f) {
    case Family::RandomCop: return "random-cop";
    case Family::Wgcp: return "wgcp";
    case Family::ScaleFree: return "scale-free";
    case Family::SmallWorld: return "small-world";
    }
    return "unknown";
}

Family family_from_name(const std::string& name) {
    if (name == "random-cop") return Family::RandomCop;
    if (name == "wgcp") return Family::Wgcp;
    if (name == "scale-free") return Family::ScaleFree;
    if (name == "small-world") return Family::SmallWorld;
    throw std::invalid_argument("unknown benchmark family: " + name);
}

namespace {

struct Resolved {
    int domain;
    double lo;
    double hi;
};

Resolved resolve(const GeneratorConfig& cfg) {
    Resolved r;
    r.domain = cfg.domain_size > 0 ? cfg.domain_size
                                   : (cfg.family == Family::Wgcp ? 5 : 15);
    r.lo = cfg.cost_min >= 0 ? cfg.cost_min
                             : (cfg.family == Family::Wgcp ? 1.0 : 0.0);
    r.hi = cfg.cost_max >= 0 ? cfg.cost_max : 100.0;
    if (r.hi <= r.lo)
        throw std::invalid_argument("cost range is empty");
    return r;
}

using EdgeList = std::vector<std::pair<int, int>>; // (u, v) with u < v

// Phase 2: attach cost tables to a fixed topology. All table entries are
// drawn from the stream after the topology draws, so topology and costs stay
// independently reproducible.
COPInstance finish_binary(const GeneratorConfig& cfg, const Resolved& r,
                          const EdgeList& edges, Rng& rng, bool wgcp) {
    COPInstance inst;
    inst.domains.assign(cfg.num_variables, r.domain);
    inst.meta.family = family_name(cfg.family);
    inst.meta.seed = cfg.seed;
    inst.meta.params["domain"] = r.domain;
    inst.meta.params["cost_min"] = r.lo;
    inst.meta.params["cost_max"] = r.hi;
    const std::size_t cells = static_cast<std::size_t>(r.domain) * r.domain;
    for (const auto& [u, v] : edges) {
        CostFunction fn;
        fn.scope = {u, v};
        fn.table.resize(cells);
        if (wgcp) {
            const double w = rng.uniform(r.lo, r.hi);
            for (int a = 0; a < r.domain; ++a)
                for (int b = 0; b < r.domain; ++b)
                    fn.table[static_cast<std::size_t>(a) * r.domain + b] =
                        (a == b) ? w : 0.0;
        } else {
            for (std::size_t c = 0; c < cells; ++c)
                fn.table[c] = rng.uniform(r.lo, r.hi);
        }
        inst.functions.push_back(std::move(fn));
    }
    return inst;
}

EdgeList pairwise_topology(const GeneratorConfig& cfg, Rng& rng) {
    if (!(cfg.p1 > 0.0 && cfg.p1 <= 1.0))
        throw std::invalid_argument("p1 must lie in (0,1]");
    EdgeList edges;
    for (int i = 0; i < cfg.num_variables; ++i)
        for (int j = i + 1; j < cfg.num_variables; ++j)
            if (rng.bernoulli(cfg.p1)) edges.emplace_back(i, j);
    return edges;
}

} // namespace

COPInstance gen_random_cop(const GeneratorConfig& cfg) {
    if (cfg.num_variables < 1)
        throw std::invalid_argument("need at least one variable");
    Rng rng(cfg.seed);
    const Resolved r = resolve(cfg);
    EdgeList edges = pairwise_topology(cfg, rng);
    COPInstance inst = finish_binary(cfg, r, edges, rng, false);
    inst.meta.params["p1"] = cfg.p1;
    return inst;
}

COPInstance gen_wgcp(const GeneratorConfig& cfg) {
    if (cfg.num_variables < 1)
        throw std::invalid_argument("need at least one variable");
    Rng rng(cfg.seed);
    const Resolved r = resolve(cfg);
    EdgeList edges = pairwise_topology(cfg, rng);
    COPInstance inst = finish_binary(cfg, r, edges, rng, true);
    inst.meta.params["p1"] = cfg.p1;
    return inst;
}

COPInstance gen_scale_free(const GeneratorConfig& cfg) {
    const int n = cfg.num_variables;
    if (cfg.m1 < 1 || cfg.m0 < cfg.m1)
        throw std::invalid_argument("scale-free needs m0 >= m1 >= 1");
    if (n <= cfg.m0)
        throw std::invalid_argument("scale-free needs more variables than m0");
    Rng rng(cfg.seed);
    const Resolved r = resolve(cfg);

    EdgeList edges;
    std::vector<int> degree(n, 0);
    auto add_edge = [&](int u, int v) {
        if (u > v) std::swap(u, v);
        edges.emplace_back(u, v);
        ++degree[u];
        ++degree[v];
    };

    // seed graph: a ring over the first m0 vertices (connected, deterministic)
    if (cfg.m0 == 2) add_edge(0, 1);
    if (cfg.m0 >= 3)
        for (int i = 0; i < cfg.m0; ++i) add_edge(i, (i + 1) % cfg.m0);

    for (int v = cfg.m0; v < n; ++v) {
        // m1 distinct targets, degree-proportional, degrees frozen while this
        // vertex attaches; duplicate draws are rejected
        std::vector<int> chosen;
        long long total = 0;
        for (int u = 0; u < v; ++u) total += degree[u];
        while (static_cast<int>(chosen.size()) < cfg.m1) {
            int pick = -1;
            if (total == 0) {
                pick = rng.uniform_int(v);
            } else {
                double x = rng.uniform(0.0, static_cast<double>(total));
                double cum = 0;
                for (int u = 0; u < v; ++u) {
                    cum += degree[u];
                    if (x < cum) { pick = u; break; }
                }
                if (pick < 0) pick = v - 1; // numeric edge of the last bucket
            }
            if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end())
                chosen.push_back(pick);
        }
        for (int u : chosen) add_edge(u, v);
    }

    COPInstance inst = finish_binary(cfg, r, edges, rng, false);
    inst.meta.params["m0"] = cfg.m0;
    inst.meta.params["m1"] = cfg.m1;
    return inst;
}

COPInstance gen_small_world(const GeneratorConfig& cfg) {
    const int n = cfg.num_variables;
    if (cfg.k < 2 || cfg.k % 2 != 0)
        throw std::invalid_argument("small-world needs an even k >= 2");
    if (cfg.k >= n)
        throw std::invalid_argument("small-world needs k < number of variables");
    if (!(cfg.p >= 0.0 && cfg.p <= 1.0))
        throw std::invalid_argument("shortcut probability must lie in [0,1]");
    Rng rng(cfg.seed);
    const Resolved r = resolve(cfg);

    EdgeList edges;
    std::set<std::pair<int, int>> present;
    auto add_edge = [&](int u, int v) {
        if (u > v) std::swap(u, v);
        if (!present.insert({u, v}).second) return false;
        edges.emplace_back(u, v);
        return true;
    };

    // ring lattice: each vertex connected to its k nearest neighbors
    for (int d = 1; d <= cfg.k / 2; ++d)
        for (int i = 0; i < n; ++i) add_edge(i, (i + d) % n);
    const std::size_t lattice_count = edges.size();

    // one shortcut chance per lattice edge; edges are only added, never removed
    for (std::size_t e = 0; e < lattice_count; ++e) {
        if (!rng.bernoulli(cfg.p)) continue;
        const int u = edges[e].first;
        for (int attempt = 0; attempt < 4 * n; ++attempt) {
            const int w = rng.uniform_int(n);
            if (w == u) continue;
            if (add_edge(u, w)) break;
        }
    }

    COPInstance inst = finish_binary(cfg, r, edges, rng, false);
    inst.meta.params["k"] = cfg.k;
    inst.meta.params["p"] = cfg.p;
    return inst;
}

COPInstance generate(const GeneratorConfig& cfg) {
    switch (cfg.family) {
    case Family::RandomCop: return gen_random_cop(cfg);
    case Family::Wgcp: return gen_wgcp(cfg);
    case Family::ScaleFree: return gen_scale_free(cfg);
    case Family::SmallWorld: return gen_small_world(cfg);
    }
    throw std::invalid_argument("unknown family");
}

} // namespace dabp
