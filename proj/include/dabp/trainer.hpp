#ifndef DABP_TRAINER_HPP
#define DABP_TRAINER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dabp/bp.hpp"
#include "dabp/cop.hpp"
#include "dabp/model.hpp"

namespace dabp::train {

struct TrainConfig {
    int restarts = 20;        // R
    int t_max = 1000;         // iteration limit per restart
    int t_upd = 20;           // model update interval
    int t_eff = 2;            // effective iterations averaged into the loss
    double lr = 1e-4;
    double weight_decay = 5e-5;
    double eps = 1e-5;        // message convergence tolerance
    std::uint64_t seed = 0;   // model initialization
};

void validate_config(const TrainConfig& cfg);

struct TraceRecord {
    int restart;
    int iteration;
    double cost;      // solution cost this iteration
    double loss;      // smoothed cost this iteration
    double best_cost; // running best across the whole run
    bool converged;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    Assignment best_assignment;
    double best_cost = 0.0;
    std::optional<int> convergence_iteration; // earliest across restarts
    double wall_time_sec = 0.0;
    std::vector<std::string> notes; // diagnostics (aborted restarts etc.)
};

// Per-variable softmax of negated beliefs, stabilized by shifting each
// belief vector to a zero minimum before exponentiation.
std::vector<std::vector<double>> assignment_probs(const bp::BeliefTable& beliefs);

// Exact expectation of the total cost when variables are drawn independently
// from the given probability vectors; binary scopes go through a
// vector-matrix-vector product, wider scopes through enumeration.
double smoothed_loss(const COPInstance& instance,
                     const std::vector<std::vector<double>>& probs);

// How far the smoothed cost may sit from the decided solution's cost:
//   gap   = |smoothed_loss - total_cost(decide(beliefs))|
//   bound = sum over functions of range(f) * (1 - prod of 1/|domain|)
// gap <= bound holds for every belief state; a violation is a bug.
struct GapBound {
    double gap;
    double bound;
};
GapBound smoothing_gap(const COPInstance& instance, const bp::BeliefTable& beliefs);

// Indices (0-based within the window) of the t_eff lowest-cost iterations,
// ties to the earlier iteration. A t_eff larger than the window selects the
// whole window.
std::vector<int> select_effective(const std::vector<double>& window_costs, int t_eff);

// Online-learning solve: restarts reset messages and encoder state but keep
// model parameters; every t_upd iterations the mean smoothed cost of the
// best t_eff iterations in the window is backpropagated into the model and
// the message history is detached. Messages converging ends the restart
// early (after a final update when the partial window is non-empty).
// A non-finite loss aborts the restart and is noted in the trace.
// Deterministic given (instance, model state, config).
RunTrace run_online(const COPInstance& instance, model::Model& m, const TrainConfig& cfg);

enum class Baseline { Bp, Dbp, DbpScfg };

// Same loop without the model or learning. DbpScfg splits the instance
// first (costs are invariant under the split). Baselines are deterministic
// and restarts would replay the same trajectory, so a single pass runs.
RunTrace run_baseline(const COPInstance& instance, Baseline algo, double lambda,
                      double rho, const TrainConfig& cfg);

// One training window (t_upd iterations from zero messages) without a
// parameter update; used to validate gradients end to end.
double window_loss(const COPInstance& instance, model::Model& m, const TrainConfig& cfg);

struct WindowProbe {
    double loss;
    std::map<std::string, std::vector<double>> grads;
};
WindowProbe window_gradient(const COPInstance& instance, model::Model& m,
                            const TrainConfig& cfg);

} // namespace dabp::train

#endif
