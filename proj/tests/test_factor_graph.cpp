#include <doctest.h>

#include "dabp/factor_graph.hpp"
#include "dabp/rng.hpp"
#include "test_util.hpp"

using namespace dabp;

TEST_CASE("factor graph of one binary function") {
    COPInstance inst;
    inst.domains = {2, 3};
    inst.functions.push_back({{0, 1}, std::vector<double>(6, 0.0)});
    const FactorGraph g = build_factor_graph(inst);
    CHECK(g.num_vars == 2);
    CHECK(g.num_funcs == 1);
    CHECK(g.num_edges == 2);
    CHECK(g.edge_var == std::vector<int>{0, 1});
    CHECK(g.edge_func == std::vector<int>{0, 0});
}

TEST_CASE("adjacency follows scope membership") {
    COPInstance inst;
    inst.domains = {2, 2, 2};
    inst.functions.push_back({{0, 1}, {0, 0, 0, 0}});
    inst.functions.push_back({{1, 2}, {0, 0, 0, 0}});
    const FactorGraph g = build_factor_graph(inst);
    CHECK(g.var_neighbors(1) == std::vector<int>{0, 1});
    CHECK(g.var_neighbors(0) == std::vector<int>{0});
    CHECK(g.var_neighbors(2) == std::vector<int>{1});
    CHECK(g.degree(1) == 2);
}

TEST_CASE("edge count is the sum of scope sizes") {
    Rng rng(11);
    const COPInstance inst = testutil::random_cyclic(9, 3, 5, rng);
    const FactorGraph g = build_factor_graph(inst);
    int expect = 0;
    for (const auto& fn : inst.functions) expect += static_cast<int>(fn.scope.size());
    CHECK(g.num_edges == expect);
}

TEST_CASE("edge ids are dense, function-major, and stable") {
    Rng rng(12);
    const COPInstance inst = testutil::random_cyclic(7, 3, 4, rng);
    const FactorGraph a = build_factor_graph(inst);
    const FactorGraph b = build_factor_graph(inst);
    CHECK(a.edge_var == b.edge_var);
    CHECK(a.edge_func == b.edge_func);
    CHECK(a.var_edges == b.var_edges);
    CHECK(a.func_edges == b.func_edges);

    // function-major: ids within a function are consecutive in scope order
    int next = 0;
    for (int l = 0; l < a.num_funcs; ++l)
        for (std::size_t p = 0; p < a.func_edges[l].size(); ++p) {
            CHECK(a.func_edges[l][p] == next);
            CHECK(a.edge_var[next] == inst.functions[l].scope[p]);
            ++next;
        }
}
