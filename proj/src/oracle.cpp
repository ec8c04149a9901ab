#include "dabp/oracle.hpp"

#include <stdexcept>
#include <string>

namespace dabp::oracle {

namespace {

std::uint64_t joint_count(const COPInstance& instance, std::uint64_t cap) {
    std::uint64_t count = 1;
    for (int d : instance.domains) {
        count *= static_cast<std::uint64_t>(d);
        if (count > cap)
            throw std::runtime_error("joint assignment space exceeds cap of " +
                                     std::to_string(cap));
    }
    return count;
}

// advances a in lexicographic order (last variable fastest); false at wrap
bool advance(const COPInstance& instance, Assignment& a) {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
        if (++a[i] < instance.domains[i]) return true;
        a[i] = 0;
    }
    return false;
}

} // namespace

OracleResult solve_exact(const COPInstance& instance, std::uint64_t cap) {
    validate_instance(instance);
    const std::uint64_t count = joint_count(instance, cap);

    OracleResult res;
    Assignment a(instance.num_variables(), 0);
    res.assignment = a;
    res.cost = total_cost(instance, a);
    res.enumerated = count;
    if (instance.num_variables() == 0) return res;

    while (advance(instance, a)) {
        const double c = total_cost(instance, a);
        if (c < res.cost) { // strict: first minimum is lexicographically least
            res.cost = c;
            res.assignment = a;
        }
    }
    return res;
}

double enumerate_expected_cost(const COPInstance& instance,
                               const std::vector<std::vector<double>>& probs,
                               std::uint64_t cap) {
    validate_instance(instance);
    if (probs.size() != instance.domains.size())
        throw std::invalid_argument("need one probability vector per variable");
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (static_cast<int>(probs[i].size()) != instance.domains[i])
            throw std::invalid_argument("probability vector length mismatch at variable " +
                                        std::to_string(i));
    joint_count(instance, cap);

    if (instance.num_variables() == 0) return 0.0;
    double expected = 0.0;
    Assignment a(instance.num_variables(), 0);
    do {
        double p = 1.0;
        for (std::size_t i = 0; i < a.size(); ++i) p *= probs[i][a[i]];
        expected += p * total_cost(instance, a);
    } while (advance(instance, a));
    return expected;
}

} // namespace dabp::oracle
