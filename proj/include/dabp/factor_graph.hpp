#ifndef DABP_FACTOR_GRAPH_HPP
#define DABP_FACTOR_GRAPH_HPP

#include <vector>

#include "dabp/cop.hpp"

namespace dabp {

// Bipartite graph of variable-nodes and function-nodes. Each undirected
// (variable, function) incidence gets one dense edge id; the same id indexes
// the variable-to-function and the function-to-variable message for that
// incidence. Ids are assigned by function index, then scope position, so
// they are stable across runs for equal instances.
struct FactorGraph {
    int num_vars = 0;
    int num_funcs = 0;
    int num_edges = 0; // r: directed edges per direction

    std::vector<int> edge_var;  // edge id -> variable
    std::vector<int> edge_func; // edge id -> function

    std::vector<std::vector<int>> var_edges;  // per variable, edge ids ascending
    std::vector<std::vector<int>> func_edges; // per function, edge ids in scope order

    std::vector<int> domains; // per variable, for message sizing

    int degree(int var) const { return static_cast<int>(var_edges[var].size()); }
    int arity(int func) const { return static_cast<int>(func_edges[func].size()); }

    // functions adjacent to a variable, in edge-id order
    std::vector<int> var_neighbors(int var) const {
        std::vector<int> out;
        out.reserve(var_edges[var].size());
        for (int e : var_edges[var]) out.push_back(edge_func[e]);
        return out;
    }
};

FactorGraph build_factor_graph(const COPInstance& instance);

} // namespace dabp

#endif
