#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dabp/bench.hpp"
#include "dabp/bp.hpp"
#include "dabp/factor_graph.hpp"
#include "dabp/generators.hpp"
#include "dabp/instance_io.hpp"
#include "dabp/oracle.hpp"
#include "dabp/trainer.hpp"

namespace py = pybind11;
using namespace dabp;

namespace {

py::dict run_summary(const bench::SolveResult& res, bool with_trace) {
    py::dict out;
    out["best_cost"] = res.best_cost;
    out["normalized_cost"] = res.normalized_cost;
    out["best_assignment"] = res.best_assignment;
    out["wall_time_sec"] = res.wall_time_sec;
    if (res.convergence_iteration)
        out["convergence_iteration"] = *res.convergence_iteration;
    else
        out["convergence_iteration"] = py::none();
    if (with_trace) {
        py::list records;
        for (const auto& rec : res.trace.records) {
            py::dict r;
            r["restart"] = rec.restart;
            r["iteration"] = rec.iteration;
            r["cost"] = rec.cost;
            r["loss"] = rec.loss;
            r["best_cost"] = rec.best_cost;
            r["converged"] = rec.converged;
            records.append(std::move(r));
        }
        out["trace"] = std::move(records);
        out["notes"] = res.trace.notes;
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "min-sum belief propagation toolkit for constraint optimization";

    py::class_<CostFunction>(m, "CostFunction")
        .def(py::init([](std::vector<int> scope, std::vector<double> table) {
                 return CostFunction{std::move(scope), std::move(table)};
             }),
             py::arg("scope"), py::arg("table"))
        .def_readwrite("scope", &CostFunction::scope)
        .def_readwrite("table", &CostFunction::table);

    py::class_<COPInstance>(m, "Instance")
        .def(py::init([](std::vector<int> domains,
                         std::vector<std::pair<std::vector<int>, std::vector<double>>> fns) {
                 COPInstance inst;
                 inst.domains = std::move(domains);
                 for (auto& [scope, table] : fns)
                     inst.functions.push_back({std::move(scope), std::move(table)});
                 validate_instance(inst);
                 return inst;
             }),
             py::arg("domains"), py::arg("functions") =
                 std::vector<std::pair<std::vector<int>, std::vector<double>>>{})
        .def_readonly("domains", &COPInstance::domains)
        .def_property_readonly("functions",
                               [](const COPInstance& inst) {
                                   std::vector<std::pair<std::vector<int>, std::vector<double>>> out;
                                   for (const auto& fn : inst.functions)
                                       out.emplace_back(fn.scope, fn.table);
                                   return out;
                               })
        .def_property_readonly("num_variables", &COPInstance::num_variables)
        .def_property_readonly("num_functions", &COPInstance::num_functions)
        .def("__repr__", [](const COPInstance& inst) {
            return "<Instance vars=" + std::to_string(inst.num_variables()) +
                   " functions=" + std::to_string(inst.num_functions()) + ">";
        });

    m.def(
        "generate",
        [](const std::string& family, int n, int domain, double p1, int m0, int m1,
           int k, double p, double cost_min, double cost_max, std::uint64_t seed) {
            GeneratorConfig cfg;
            cfg.family = family_from_name(family);
            cfg.num_variables = n;
            cfg.domain_size = domain;
            cfg.p1 = p1;
            cfg.m0 = m0;
            cfg.m1 = m1;
            cfg.k = k;
            cfg.p = p;
            cfg.cost_min = cost_min;
            cfg.cost_max = cost_max;
            cfg.seed = seed;
            return generate(cfg);
        },
        py::arg("family"), py::arg("n"), py::arg("domain") = 0, py::arg("p1") = 0.25,
        py::arg("m0") = 10, py::arg("m1") = 10, py::arg("k") = 10, py::arg("p") = 0.3,
        py::arg("cost_min") = -1.0, py::arg("cost_max") = -1.0, py::arg("seed") = 0,
        "Generate a benchmark instance (random-cop | wgcp | scale-free | small-world).");

    m.def("total_cost", &total_cost, py::arg("instance"), py::arg("assignment"));
    m.def("split_scfg", &split_scfg, py::arg("instance"), py::arg("rho"),
          "Split every cost function into rho- and (1-rho)-scaled copies.");

    m.def("loads", &from_text, py::arg("text"));
    m.def("dumps", &to_text, py::arg("instance"));
    m.def("load", [](const std::string& path) { return load_instance(path); },
          py::arg("path"));
    m.def("save",
          [](const COPInstance& inst, const std::string& path) {
              save_instance(inst, path);
          },
          py::arg("instance"), py::arg("path"));

    m.def(
        "graph_info",
        [](const COPInstance& inst) {
            const FactorGraph g = build_factor_graph(inst);
            py::dict out;
            out["num_vars"] = g.num_vars;
            out["num_funcs"] = g.num_funcs;
            out["num_edges"] = g.num_edges;
            return out;
        },
        py::arg("instance"));

    m.def(
        "solve_exact",
        [](const COPInstance& inst, std::uint64_t cap) {
            const oracle::OracleResult res = oracle::solve_exact(inst, cap);
            py::dict out;
            out["assignment"] = res.assignment;
            out["cost"] = res.cost;
            out["enumerated"] = res.enumerated;
            return out;
        },
        py::arg("instance"), py::arg("cap") = std::uint64_t{10'000'000});

    m.def(
        "solve",
        [](const COPInstance& inst, const std::string& algo, double lambda_, double rho,
           bool split, int restarts, int t_max, int t_upd, int t_eff, double lr,
           double weight_decay, double eps, std::uint64_t seed, bool with_trace) {
            bench::SolveOptions so;
            so.algo = algo;
            so.lambda = lambda_;
            so.rho = rho;
            so.split = split;
            so.train.restarts = restarts;
            so.train.t_max = t_max;
            so.train.t_upd = t_upd;
            so.train.t_eff = t_eff;
            so.train.lr = lr;
            so.train.weight_decay = weight_decay;
            so.train.eps = eps;
            so.train.seed = seed;
            return run_summary(bench::solve_instance(inst, so), with_trace);
        },
        py::arg("instance"), py::arg("algo") = "bp", py::arg("lambda_") = 0.9,
        py::arg("rho") = 0.95, py::arg("split") = true, py::arg("restarts") = 1,
        py::arg("t_max") = 1000, py::arg("t_upd") = 20, py::arg("t_eff") = 2,
        py::arg("lr") = 1e-4, py::arg("weight_decay") = 5e-5, py::arg("eps") = 1e-5,
        py::arg("seed") = 0, py::arg("with_trace") = false,
        "Run a solver (bp | dbp | dbp-scfg | dabp | dabp-heter | dabp-homo | exact).");

    m.def("assignment_probs", &train::assignment_probs, py::arg("beliefs"));
    m.def("smoothed_loss", &train::smoothed_loss, py::arg("instance"), py::arg("probs"));
    m.def(
        "smoothing_gap",
        [](const COPInstance& inst, const bp::BeliefTable& beliefs) {
            const train::GapBound gb = train::smoothing_gap(inst, beliefs);
            return py::make_tuple(gb.gap, gb.bound);
        },
        py::arg("instance"), py::arg("beliefs"),
        "(gap, bound): |smoothed cost - decided cost| and its worst-case bound.");
}
