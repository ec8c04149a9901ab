#include "dabp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dabp/oracle.hpp"
#include "dabp/rng.hpp"

namespace dabp::bench {

namespace {

int max_domain(const COPInstance& instance) {
    int d = 1;
    for (int x : instance.domains) d = std::max(d, x);
    return d;
}

double normalize(const COPInstance& instance, double cost) {
    return instance.num_functions() > 0 ? cost / instance.num_functions() : cost;
}

} // namespace

SolveResult solve_instance(const COPInstance& instance, const SolveOptions& opt) {
    SolveResult res;
    if (opt.algo == "exact") {
        const auto t0 = std::chrono::steady_clock::now();
        oracle::OracleResult e = oracle::solve_exact(instance, opt.exact_cap);
        res.wall_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.best_assignment = e.assignment;
        res.best_cost = e.cost;
    } else if (opt.algo == "bp" || opt.algo == "dbp" || opt.algo == "dbp-scfg") {
        const train::Baseline algo = opt.algo == "bp"      ? train::Baseline::Bp
                                     : opt.algo == "dbp"   ? train::Baseline::Dbp
                                                           : train::Baseline::DbpScfg;
        res.trace = train::run_baseline(instance, algo, opt.lambda, opt.rho, opt.train);
    } else if (opt.algo == "dabp" || opt.algo == "dabp-heter" || opt.algo == "dabp-homo") {
        model::ModelConfig mc = opt.model;
        mc.mode = opt.algo == "dabp"         ? model::Mode::Full
                  : opt.algo == "dabp-heter" ? model::Mode::HeterLambda
                                             : model::Mode::HomoLambda;
        const COPInstance work =
            opt.split ? split_scfg(instance, opt.rho) : instance;
        model::Model m(mc, max_domain(work), opt.train.seed);
        if (!opt.checkpoint_in.empty()) m.params().load(opt.checkpoint_in);
        res.trace = train::run_online(work, m, opt.train);
        if (!opt.checkpoint_out.empty()) m.params().save(opt.checkpoint_out);
    } else {
        throw std::invalid_argument("unknown algorithm: " + opt.algo);
    }

    if (opt.algo != "exact") {
        res.best_assignment = res.trace.best_assignment;
        res.best_cost = res.trace.best_cost;
        res.convergence_iteration = res.trace.convergence_iteration;
        res.wall_time_sec = res.trace.wall_time_sec;
    }
    res.normalized_cost = normalize(instance, res.best_cost);
    return res;
}

BenchReport run_bench(const std::vector<std::pair<std::string, COPInstance>>& instances,
                      const BenchOptions& opt) {
    if (opt.algos.empty())
        throw std::invalid_argument("no algorithms selected");
    BenchReport report;
    report.limits = opt.limits;
    report.rows.resize(instances.size() * opt.algos.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            const auto& [id, instance] = instances[i];
            for (std::size_t a = 0; a < opt.algos.size(); ++a) {
                BenchRow& row = report.rows[i * opt.algos.size() + a];
                row.instance_id = id;
                row.algo = opt.algos[a];
                try {
                    SolveOptions so = opt.solve;
                    so.algo = opt.algos[a];
                    so.train.seed = derive_seed(opt.seed, i);
                    const SolveResult r = solve_instance(instance, so);
                    row.best_cost = r.best_cost;
                    row.normalized_cost = r.normalized_cost;
                    row.convergence_iteration = r.convergence_iteration;
                    row.wall_time_sec = r.wall_time_sec;
                } catch (const std::exception& e) {
                    row.failed = true;
                    row.error = e.what();
                }
            }
        }
    };

    const int workers = std::max(1, opt.workers);
    if (workers == 1 || instances.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const BenchRow& row : report.rows) report.any_failure |= row.failed;

    // aggregates in algo order; gap is relative to the best mean
    double best_mean = std::numeric_limits<double>::infinity();
    for (const std::string& algo : opt.algos) {
        BenchAggregate agg;
        agg.algo = algo;
        int n = 0;
        for (const BenchRow& row : report.rows) {
            if (row.algo != algo || row.failed) continue;
            agg.mean_normalized += row.normalized_cost;
            ++n;
        }
        if (n > 0) agg.mean_normalized /= n;
        agg.convergence_rate.assign(opt.limits.size(), 0.0);
        if (n > 0) {
            for (std::size_t li = 0; li < opt.limits.size(); ++li) {
                int conv = 0;
                for (const BenchRow& row : report.rows) {
                    if (row.algo != algo || row.failed) continue;
                    if (row.convergence_iteration &&
                        *row.convergence_iteration <= opt.limits[li])
                        ++conv;
                }
                agg.convergence_rate[li] = static_cast<double>(conv) / n;
            }
        }
        if (n > 0) best_mean = std::min(best_mean, agg.mean_normalized);
        report.aggregates.push_back(std::move(agg));
    }
    for (BenchAggregate& agg : report.aggregates)
        agg.gap = best_mean > 0 ? (agg.mean_normalized - best_mean) / best_mean : 0.0;

    return report;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

std::string rows_csv(const BenchReport& report) {
    std::string out =
        "instance,algo,best_cost,normalized_cost,convergence_iteration,wall_time_sec,error\n";
    for (const BenchRow& row : report.rows) {
        out += row.instance_id + "," + row.algo + ",";
        if (row.failed) {
            out += ",,,," + row.error;
        } else {
            out += fmt(row.best_cost) + "," + fmt(row.normalized_cost) + ",";
            if (row.convergence_iteration)
                out += std::to_string(*row.convergence_iteration);
            out += "," + fmt(row.wall_time_sec) + ",";
        }
        out += "\n";
    }
    return out;
}

std::string aggregates_csv(const BenchReport& report) {
    std::string out = "algo,mean_normalized_cost,gap";
    for (int limit : report.limits) out += ",conv@" + std::to_string(limit);
    out += "\n";
    for (const BenchAggregate& agg : report.aggregates) {
        out += agg.algo + "," + fmt(agg.mean_normalized) + "," + fmt(agg.gap);
        for (double r : agg.convergence_rate) out += "," + fmt(r);
        out += "\n";
    }
    return out;
}

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    std::vector<std::filesystem::path> out;
    const std::filesystem::path base = path.parent_path();
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::filesystem::path p(line);
        out.push_back(p.is_absolute() ? p : base / p);
    }
    return out;
}

} // namespace dabp::bench
