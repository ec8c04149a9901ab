// Command-line front end: instance generation, solver runs, and batch
// benchmarking with machine-readable reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dabp/bench.hpp"
#include "dabp/generators.hpp"
#include "dabp/instance_io.hpp"
#include "dabp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GenArgs {
    std::string family;
    int n = 60;
    int domain = 0; // 0: family default
    double p1 = 0.25;
    int m0 = 10, m1 = 10;
    int k = 10;
    double p = 0.3;
    double cost_min = -1, cost_max = -1;
    int count = 1;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int run_gen(const GenArgs& a) {
    dabp::GeneratorConfig cfg;
    cfg.family = dabp::family_from_name(a.family);
    cfg.num_variables = a.n;
    cfg.domain_size = a.domain;
    cfg.p1 = a.p1;
    cfg.m0 = a.m0;
    cfg.m1 = a.m1;
    cfg.k = a.k;
    cfg.p = a.p;
    cfg.cost_min = a.cost_min;
    cfg.cost_max = a.cost_max;

    fs::create_directories(a.out_dir);
    std::string manifest;
    for (int i = 0; i < a.count; ++i) {
        cfg.seed = dabp::derive_seed(a.seed, static_cast<std::uint64_t>(i));
        const dabp::COPInstance inst = dabp::generate(cfg);
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%03d.json", a.family.c_str(), i);
        dabp::save_instance(inst, fs::path(a.out_dir) / name);
        manifest += name;
        manifest += '\n';
    }
    std::ofstream mf(fs::path(a.out_dir) / "manifest.txt", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write manifest");
    mf << manifest;
    std::cout << "wrote " << a.count << " instance(s) and manifest.txt to "
              << a.out_dir << "\n";
    return 0;
}

void add_solver_flags(CLI::App* cmd, dabp::bench::SolveOptions& so) {
    cmd->add_option("--lambda", so.lambda, "damping factor for dbp / dbp-scfg");
    cmd->add_option("--rho", so.rho, "constraint split ratio");
    cmd->add_flag_callback("--no-split", [&so] { so.split = false; },
                           "run the dabp variants without constraint splitting");
    cmd->add_option("--restarts", so.train.restarts, "online-learning restarts");
    cmd->add_option("--tmax", so.train.t_max, "iteration limit per restart");
    cmd->add_option("--tupd", so.train.t_upd, "model update interval");
    cmd->add_option("--teff", so.train.t_eff, "effective iterations per update");
    cmd->add_option("--lr", so.train.lr, "learning rate");
    cmd->add_option("--wd", so.train.weight_decay, "weight decay");
    cmd->add_option("--eps", so.train.eps, "message convergence tolerance");
    cmd->add_option("--seed", so.train.seed, "model initialization seed");
    cmd->add_option("--hidden", so.model.hidden, "message hidden width");
    cmd->add_option("--gat-layers", so.model.gat_layers, "graph attention layers");
    cmd->add_option("--gat-heads", so.model.gat_heads, "heads per graph attention layer");
    cmd->add_option("--gat-channels", so.model.gat_channels, "channels per head");
    cmd->add_option("--att-heads", so.model.att_heads, "hyperparameter attention heads");
    cmd->add_option("--cap", so.exact_cap, "joint-space cap for the exact solver");
}

json summary_json(const std::string& instance_id, const std::string& algo,
                  const dabp::bench::SolveResult& res) {
    json s;
    s["instance"] = instance_id;
    s["algo"] = algo;
    s["best_cost"] = res.best_cost;
    s["normalized_cost"] = res.normalized_cost;
    if (res.convergence_iteration)
        s["convergence_iteration"] = *res.convergence_iteration;
    else
        s["convergence_iteration"] = nullptr;
    s["wall_time_sec"] = res.wall_time_sec;
    s["best_assignment"] = res.best_assignment;
    return s;
}

void write_trace(const fs::path& path, const dabp::train::RunTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file " + path.string());
    for (const auto& rec : trace.records) {
        json j;
        j["restart"] = rec.restart;
        j["iteration"] = rec.iteration;
        j["cost"] = rec.cost;
        j["loss"] = rec.loss;
        j["best_cost"] = rec.best_cost;
        j["converged"] = rec.converged;
        out << j.dump() << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"min-sum belief propagation toolkit for constraint optimization"};
    app.require_subcommand(1);

    // ---- gen ----
    GenArgs ga;
    CLI::App* gen = app.add_subcommand("gen", "generate benchmark instances");
    gen->set_config("--config");
    gen->add_option("family", ga.family, "random-cop | wgcp | scale-free | small-world")
        ->required();
    gen->add_option("--n", ga.n, "number of variables");
    gen->add_option("--domain", ga.domain, "domain size (0: family default)");
    gen->add_option("--p1", ga.p1, "pairwise constraint probability");
    gen->add_option("--m0", ga.m0, "scale-free seed ring size");
    gen->add_option("--m1", ga.m1, "scale-free attachments per vertex");
    gen->add_option("--k", ga.k, "small-world lattice neighbors (even)");
    gen->add_option("--p", ga.p, "small-world shortcut probability");
    gen->add_option("--cost-min", ga.cost_min, "cost range lower bound");
    gen->add_option("--cost-max", ga.cost_max, "cost range upper bound");
    gen->add_option("--count", ga.count, "instances to generate");
    gen->add_option("--seed", ga.seed, "base seed; per-instance seeds derive from it");
    gen->add_option("--out-dir", ga.out_dir, "output directory");

    // ---- solve ----
    dabp::bench::SolveOptions so;
    std::string solve_instance_path, trace_path, summary_path;
    CLI::App* solve = app.add_subcommand("solve", "run one solver on one instance");
    solve->set_config("--config");
    solve->add_option("--instance", solve_instance_path, "instance file")->required();
    solve->add_option("--algo", so.algo, "bp | dbp | dbp-scfg | dabp | dabp-heter | dabp-homo | exact")
        ->check(CLI::IsMember(dabp::bench::kAlgorithms));
    add_solver_flags(solve, so);
    solve->add_option("--trace", trace_path, "write per-iteration records (JSON lines)");
    solve->add_option("--summary", summary_path, "write the run summary to a file");
    solve->add_option("--checkpoint-in", so.checkpoint_in, "load model parameters");
    solve->add_option("--checkpoint-out", so.checkpoint_out, "save model parameters");

    // ---- bench ----
    dabp::bench::BenchOptions bo;
    std::string manifest_path, rows_path, agg_path, algos_csv = "bp,dbp,dbp-scfg,dabp";
    std::vector<int> limits;
    CLI::App* bench = app.add_subcommand("bench", "run algorithms over a manifest");
    bench->set_config("--config");
    bench->add_option("--manifest", manifest_path, "manifest of instance files")->required();
    bench->add_option("--algos", algos_csv, "comma-separated algorithm list");
    bench->add_option("--out", rows_path, "per-instance rows CSV")->required();
    bench->add_option("--aggregate-out", agg_path,
                      "aggregates CSV (default: <out>.aggregates.csv)");
    bench->add_option("--limits", limits, "iteration limits for convergence rates");
    bench->add_option("--bench-seed", bo.seed, "base seed for per-instance model seeds");
    add_solver_flags(bench, bo.solve);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return run_gen(ga);

        if (*solve) {
            const dabp::COPInstance inst = dabp::load_instance(solve_instance_path);
            const dabp::bench::SolveResult res = dabp::bench::solve_instance(inst, so);
            const json summary =
                summary_json(fs::path(solve_instance_path).stem().string(), so.algo, res);
            std::cout << summary.dump(2) << "\n";
            if (!summary_path.empty()) {
                std::ofstream out(summary_path, std::ios::binary);
                out << summary.dump(2) << "\n";
            }
            if (!trace_path.empty()) write_trace(trace_path, res.trace);
            for (const std::string& note : res.trace.notes)
                std::cerr << "note: " << note << "\n";
            return 0;
        }

        if (*bench) {
            for (std::size_t pos = 0; pos < algos_csv.size();) {
                const std::size_t comma = algos_csv.find(',', pos);
                bo.algos.push_back(algos_csv.substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            if (!limits.empty()) bo.limits = limits;
            if (const char* env = std::getenv("DABP_WORKERS"))
                bo.workers = std::max(1, std::atoi(env));

            std::vector<std::pair<std::string, dabp::COPInstance>> instances;
            for (const fs::path& p : dabp::bench::read_manifest(manifest_path))
                instances.emplace_back(p.stem().string(), dabp::load_instance(p));

            const dabp::bench::BenchReport report = dabp::bench::run_bench(instances, bo);
            {
                std::ofstream out(rows_path, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + rows_path);
                out << dabp::bench::rows_csv(report);
            }
            const std::string agg_file =
                agg_path.empty() ? rows_path + ".aggregates.csv" : agg_path;
            {
                std::ofstream out(agg_file, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + agg_file);
                out << dabp::bench::aggregates_csv(report);
            }
            std::cout << dabp::bench::aggregates_csv(report);
            if (report.any_failure) {
                for (const auto& row : report.rows)
                    if (row.failed)
                        std::cerr << row.instance_id << " / " << row.algo << ": "
                                  << row.error << "\n";
                return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
