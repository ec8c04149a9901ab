#ifndef DABP_BP_HPP
#define DABP_BP_HPP

#include <vector>

#include "dabp/cop.hpp"
#include "dabp/factor_graph.hpp"

namespace dabp::bp {

// One real vector per directed edge and direction; entry count equals the
// edge's variable domain size.
struct MessageSet {
    std::vector<std::vector<double>> v2f;
    std::vector<std::vector<double>> f2v;
    int iteration = 0;
};

MessageSet zero_messages(const FactorGraph& g);

// Per-edge damping factors and, for each (variable, target function) edge,
// a weight vector over the variable's other neighbors in edge-id order.
// Weight vectors sum to 1; degree-1 variables carry an empty vector.
struct HyperParams {
    std::vector<double> lambda;                  // per edge, in [0,1]
    std::vector<std::vector<double>> weights;    // per edge, size degree-1
};

HyperParams uniform_hyperparams(const FactorGraph& g, double lambda);

// Throws std::invalid_argument if shapes don't cover the graph, a lambda is
// outside [0,1], or a weight vector does not sum to 1 within 1e-6.
void validate_hyperparams(const FactorGraph& g, const HyperParams& hp);

using BeliefTable = std::vector<std::vector<double>>;

// Weighted damped variable-to-function update: for edge (i -> l),
//   lambda * prev + (1-lambda) * (deg(i)-1) * sum_m w_m * f2v[m]
// over the other neighbors m of i. When normalize is set (the default), the
// minimum entry is subtracted from each output vector afterwards, which
// bounds message growth and never changes the decision rule's argmin.
std::vector<std::vector<double>> v2f_step(const FactorGraph& g,
                                          const MessageSet& prev,
                                          const HyperParams& hp,
                                          bool normalize = true);

// Plain min-sum update: the sum of the other neighbors' incoming messages.
// Equals v2f_step with lambda = 0 and uniform weights.
std::vector<std::vector<double>> v2f_step_vanilla(const FactorGraph& g,
                                                  const MessageSet& prev,
                                                  bool normalize = true);

// Homogeneous damping: lambda * prev + (1-lambda) * plain sum.
std::vector<std::vector<double>> v2f_step_damped(const FactorGraph& g,
                                                 const MessageSet& prev,
                                                 double lambda,
                                                 bool normalize = true);

// Function-to-variable update: for each value of the target variable, the
// minimum over the other scope variables' joint assignments of the table
// entry plus their incoming messages. Min ties resolve to the lowest joint
// index. Left unnormalized.
std::vector<std::vector<double>> f2v_step(const FactorGraph& g,
                                          const COPInstance& instance,
                                          const std::vector<std::vector<double>>& v2f);

// Per-variable sum of incoming function-to-variable messages.
BeliefTable beliefs(const FactorGraph& g,
                    const std::vector<std::vector<double>>& f2v);

// Per-variable argmin of beliefs; ties resolve to the lowest value index.
Assignment decide(const BeliefTable& b);

// True iff every entry of both directions moved by at most eps.
bool converged(const MessageSet& curr, const MessageSet& prev, double eps);

} // namespace dabp::bp

#endif
