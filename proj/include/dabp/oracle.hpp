#ifndef DABP_ORACLE_HPP
#define DABP_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "dabp/cop.hpp"

namespace dabp::oracle {

struct OracleResult {
    Assignment assignment; // lexicographically first optimum
    double cost = 0.0;
    std::uint64_t enumerated = 0;
};

// Exact minimum by full enumeration in lexicographic order. Throws
// std::runtime_error when the joint space exceeds cap.
OracleResult solve_exact(const COPInstance& instance,
                         std::uint64_t cap = 10'000'000);

// Expectation of total cost when each variable is drawn independently from
// its probability vector; brute force over all joint assignments.
double enumerate_expected_cost(const COPInstance& instance,
                               const std::vector<std::vector<double>>& probs,
                               std::uint64_t cap = 10'000'000);

} // namespace dabp::oracle

#endif
