#ifndef DABP_TEST_UTIL_HPP
#define DABP_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dabp/bp.hpp"
#include "dabp/cop.hpp"
#include "dabp/factor_graph.hpp"
#include "dabp/rng.hpp"

namespace dabp::testutil {

inline CostFunction random_binary(int u, int v, int du, int dv, Rng& rng,
                                  double lo = 0.0, double hi = 100.0) {
    CostFunction fn;
    fn.scope = {u, v};
    fn.table.resize(static_cast<std::size_t>(du) * dv);
    for (double& c : fn.table) c = rng.uniform(lo, hi);
    return fn;
}

// random tree-shaped instance: variable i>0 attaches to a uniform parent
inline COPInstance random_tree(int n, int domain, Rng& rng, double lo = 0.0,
                               double hi = 100.0) {
    COPInstance inst;
    inst.domains.assign(n, domain);
    for (int v = 1; v < n; ++v) {
        const int parent = rng.uniform_int(v);
        inst.functions.push_back(random_binary(parent, v, domain, domain, rng, lo, hi));
    }
    return inst;
}

// random cyclic instance: a tree plus extra chords
inline COPInstance random_cyclic(int n, int domain, int extra_edges, Rng& rng,
                                 double lo = 0.0, double hi = 100.0) {
    COPInstance inst = random_tree(n, domain, rng, lo, hi);
    extra_edges = std::min(extra_edges, n * (n - 1) / 2 - (n - 1));
    int added = 0;
    while (added < extra_edges) {
        const int u = rng.uniform_int(n);
        const int v = rng.uniform_int(n);
        if (u == v) continue;
        const int a = std::min(u, v), b = std::max(u, v);
        bool exists = false;
        for (const auto& fn : inst.functions)
            if ((fn.scope[0] == a && fn.scope[1] == b)) exists = true;
        if (exists) continue;
        inst.functions.push_back(random_binary(a, b, domain, domain, rng, lo, hi));
        ++added;
    }
    return inst;
}

inline bp::MessageSet random_messages(const FactorGraph& g, Rng& rng, double lo = 0.0,
                                      double hi = 100.0) {
    bp::MessageSet m = bp::zero_messages(g);
    for (auto& v : m.v2f)
        for (double& x : v) x = rng.uniform(lo, hi);
    for (auto& v : m.f2v)
        for (double& x : v) x = rng.uniform(lo, hi);
    return m;
}

inline bp::BeliefTable random_beliefs(const COPInstance& inst, Rng& rng, double lo = -20.0,
                                      double hi = 20.0) {
    bp::BeliefTable b(inst.domains.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i].resize(inst.domains[i]);
        for (double& x : b[i]) x = rng.uniform(lo, hi);
    }
    return b;
}

// BFS diameter of the bipartite factor graph (in factor-graph hops)
inline int factor_graph_diameter(const FactorGraph& g) {
    const int n = g.num_vars + g.num_funcs;
    auto neighbors = [&](int node) {
        std::vector<int> out;
        if (node < g.num_vars) {
            for (int e : g.var_edges[node]) out.push_back(g.num_vars + g.edge_func[e]);
        } else {
            for (int e : g.func_edges[node - g.num_vars]) out.push_back(g.edge_var[e]);
        }
        return out;
    };
    int diameter = 0;
    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::vector<int> queue{s};
        dist[s] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int u = queue[qi];
            for (int w : neighbors(u))
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
        }
        for (int d : dist) diameter = std::max(diameter, d);
    }
    return diameter;
}

// exact optimum on tree instances by leaf elimination over binary functions;
// independent of the enumeration oracle
inline double tree_dp_optimum(const COPInstance& inst) {
    const int n = inst.num_variables();
    std::vector<std::vector<double>> unary(n);
    for (int i = 0; i < n; ++i) unary[i].assign(inst.domains[i], 0.0);

    std::vector<CostFunction> pending = inst.functions;
    std::vector<bool> removed(n, false);
    std::vector<int> degree(n, 0);
    for (const auto& fn : pending) {
        if (fn.scope.size() != 2) throw std::invalid_argument("tree dp wants binary scopes");
        ++degree[fn.scope[0]];
        ++degree[fn.scope[1]];
    }

    // repeatedly absorb a leaf variable into its neighbor's unary costs
    while (!pending.empty()) {
        bool progress = false;
        for (std::size_t f = 0; f < pending.size(); ++f) {
            const CostFunction& fn = pending[f];
            const int a = fn.scope[0], b = fn.scope[1];
            int leaf = -1, keep = -1;
            if (degree[a] == 1) { leaf = a; keep = b; }
            else if (degree[b] == 1) { leaf = b; keep = a; }
            if (leaf < 0) continue;

            const int dl = inst.domains[leaf], dk = inst.domains[keep];
            for (int kv = 0; kv < dk; ++kv) {
                double best = std::numeric_limits<double>::infinity();
                for (int lv = 0; lv < dl; ++lv) {
                    const std::size_t idx =
                        (leaf == fn.scope[0])
                            ? static_cast<std::size_t>(lv) * dk + kv
                            : static_cast<std::size_t>(kv) * dl + lv;
                    best = std::min(best, fn.table[idx] + unary[leaf][lv]);
                }
                unary[keep][kv] += best;
            }
            removed[leaf] = true;
            --degree[a];
            --degree[b];
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(f));
            progress = true;
            break;
        }
        if (!progress) throw std::invalid_argument("instance is not a tree");
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        if (!removed[i]) total += *std::min_element(unary[i].begin(), unary[i].end());
    return total;
}

} // namespace dabp::testutil

#endif
