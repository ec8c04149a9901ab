#ifndef DABP_BENCH_HPP
#define DABP_BENCH_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dabp/cop.hpp"
#include "dabp/model.hpp"
#include "dabp/trainer.hpp"

namespace dabp::bench {

inline const std::vector<std::string> kAlgorithms = {
    "bp", "dbp", "dbp-scfg", "dabp", "dabp-heter", "dabp-homo", "exact"};

struct SolveOptions {
    std::string algo = "bp";
    double lambda = 0.9; // dbp / dbp-scfg damping
    double rho = 0.95;   // split ratio (dbp-scfg and the dabp variants)
    bool split = true;   // apply the constraint split for dabp variants
    train::TrainConfig train;
    model::ModelConfig model;
    std::uint64_t exact_cap = 10'000'000;
    std::string checkpoint_in;  // load model parameters before an online run
    std::string checkpoint_out; // save them afterwards
};

struct SolveResult {
    train::RunTrace trace; // no per-iteration records for "exact"
    Assignment best_assignment;
    double best_cost = 0.0;
    double normalized_cost = 0.0; // best cost / |F| of the pre-split instance
    std::optional<int> convergence_iteration;
    double wall_time_sec = 0.0;
};

// Runs one algorithm on one instance. The dabp variants split the instance
// internally; costs and the normalization always refer to the instance as
// given.
SolveResult solve_instance(const COPInstance& instance, const SolveOptions& opt);

struct BenchRow {
    std::string instance_id;
    std::string algo;
    double best_cost = 0.0;
    double normalized_cost = 0.0;
    std::optional<int> convergence_iteration;
    double wall_time_sec = 0.0;
    bool failed = false;
    std::string error;
};

struct BenchAggregate {
    std::string algo;
    double mean_normalized = 0.0;
    double gap = 0.0; // (mean - best mean) / best mean over the compared algos
    std::vector<double> convergence_rate; // one fraction per iteration limit
};

struct BenchReport {
    std::vector<int> limits;
    std::vector<BenchRow> rows;           // instance-major, manifest order
    std::vector<BenchAggregate> aggregates;
    bool any_failure = false;
};

struct BenchOptions {
    std::vector<std::string> algos;
    SolveOptions solve;
    std::vector<int> limits = {125, 250, 500, 1000};
    int workers = 1;
    std::uint64_t seed = 0; // per-instance train seeds are derived from this
};

BenchReport run_bench(const std::vector<std::pair<std::string, COPInstance>>& instances,
                      const BenchOptions& opt);

std::string rows_csv(const BenchReport& report);
std::string aggregates_csv(const BenchReport& report);

// One instance path per line; blank lines and #-comments are skipped.
// Relative paths resolve against the manifest's directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);

} // namespace dabp::bench

#endif
