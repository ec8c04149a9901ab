#include "dabp/cop.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dabp {

void validate_instance(const COPInstance& instance) {
    const int n = instance.num_variables();
    for (int i = 0; i < n; ++i) {
        if (instance.domains[i] <= 0)
            throw std::invalid_argument("variable " + std::to_string(i) +
                                        ": domain size must be positive");
    }
    for (int l = 0; l < instance.num_functions(); ++l) {
        const CostFunction& fn = instance.functions[l];
        const std::string where = "function " + std::to_string(l);
        if (fn.scope.empty())
            throw std::invalid_argument(where + ": empty scope");
        std::unordered_set<int> seen;
        std::size_t expect = 1;
        for (int v : fn.scope) {
            if (v < 0 || v >= n)
                throw std::invalid_argument(where + ": scope refers to variable " +
                                            std::to_string(v) + " but instance has " +
                                            std::to_string(n) + " variables");
            if (!seen.insert(v).second)
                throw std::invalid_argument(where + ": duplicate variable " +
                                            std::to_string(v) + " in scope");
            expect *= static_cast<std::size_t>(instance.domains[v]);
        }
        if (fn.table.size() != expect)
            throw std::invalid_argument(where + ": table has " +
                                        std::to_string(fn.table.size()) +
                                        " entries, expected " + std::to_string(expect));
        for (double c : fn.table) {
            if (!std::isfinite(c))
                throw std::invalid_argument(where + ": non-finite cost entry");
        }
    }
}

std::size_t table_size(const COPInstance& instance, const CostFunction& fn) {
    std::size_t s = 1;
    for (int v : fn.scope) s *= static_cast<std::size_t>(instance.domains[v]);
    return s;
}

std::size_t table_index(const COPInstance& instance, const CostFunction& fn,
                        const Assignment& a) {
    std::size_t idx = 0;
    for (int v : fn.scope) {
        idx = idx * static_cast<std::size_t>(instance.domains[v]) +
              static_cast<std::size_t>(a[v]);
    }
    return idx;
}

static void check_assignment(const COPInstance& instance, const Assignment& a) {
    if (a.size() != instance.domains.size())
        throw std::invalid_argument("assignment has " + std::to_string(a.size()) +
                                    " values, instance has " +
                                    std::to_string(instance.domains.size()) +
                                    " variables");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || a[i] >= instance.domains[i])
            throw std::invalid_argument("assignment value " + std::to_string(a[i]) +
                                        " out of range for variable " +
                                        std::to_string(i));
    }
}

double total_cost(const COPInstance& instance, const Assignment& a) {
    check_assignment(instance, a);
    double cost = 0.0;
    for (const CostFunction& fn : instance.functions)
        cost += fn.table[table_index(instance, fn, a)];
    return cost;
}

COPInstance split_scfg(const COPInstance& instance, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("split ratio must lie in (0,1), got " +
                                    std::to_string(rho));
    COPInstance out;
    out.domains = instance.domains;
    out.meta = instance.meta;
    out.functions.reserve(instance.functions.size() * 2);
    for (const CostFunction& fn : instance.functions) {
        CostFunction hi{fn.scope, fn.table};
        CostFunction lo{fn.scope, fn.table};
        for (double& c : hi.table) c *= rho;
        for (double& c : lo.table) c *= (1.0 - rho);
        out.functions.push_back(std::move(hi));
        out.functions.push_back(std::move(lo));
    }
    return out;
}

} // namespace dabp
