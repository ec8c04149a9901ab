#ifndef DABP_COP_HPP
#define DABP_COP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dabp {

// A complete assignment: one value index per variable.
using Assignment = std::vector<int>;

// One cost function over an ordered scope of variables. The table is dense
// and row-major in scope order: the first scope variable is the slowest
// index.
struct CostFunction {
    std::vector<int> scope;
    std::vector<double> table;
};

struct InstanceMeta {
    std::string family; // empty when unknown / hand built
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

// A constraint optimization problem: finite-domain variables 0..n-1 and a
// set of cost functions to be minimized jointly.
struct COPInstance {
    std::vector<int> domains;
    std::vector<CostFunction> functions;
    InstanceMeta meta;

    int num_variables() const { return static_cast<int>(domains.size()); }
    int num_functions() const { return static_cast<int>(functions.size()); }
};

// Throws std::invalid_argument describing the first violation (bad scope
// reference, duplicate scope variable, wrong table length, non-finite cost).
void validate_instance(const COPInstance& instance);

// Product of the scope's domain sizes.
std::size_t table_size(const COPInstance& instance, const CostFunction& fn);

// Flat table index of the assignment's projection onto the scope.
std::size_t table_index(const COPInstance& instance, const CostFunction& fn,
                        const Assignment& a);

// Sum of all function costs under a complete assignment.
double total_cost(const COPInstance& instance, const Assignment& a);

// Replaces every function f by two functions with the same scope and tables
// rho*f and (1-rho)*f. Total cost of every assignment is preserved; the
// function count doubles. The two halves of function l land at indices 2l
// and 2l+1.
COPInstance split_scfg(const COPInstance& instance, double rho);

} // namespace dabp

#endif
