#include "dabp/factor_graph.hpp"

namespace dabp {

FactorGraph build_factor_graph(const COPInstance& instance) {
    validate_instance(instance);
    FactorGraph g;
    g.num_vars = instance.num_variables();
    g.num_funcs = instance.num_functions();
    g.domains = instance.domains;
    g.var_edges.resize(g.num_vars);
    g.func_edges.resize(g.num_funcs);

    int next = 0;
    for (int l = 0; l < g.num_funcs; ++l) {
        for (int v : instance.functions[l].scope) {
            g.edge_var.push_back(v);
            g.edge_func.push_back(l);
            g.var_edges[v].push_back(next);
            g.func_edges[l].push_back(next);
            ++next;
        }
    }
    g.num_edges = next;
    return g;
}

} // namespace dabp
