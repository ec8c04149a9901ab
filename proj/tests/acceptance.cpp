// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion carries its tolerance inline; seeds are fixed so the whole
// run is reproducible.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dabp/bench.hpp"
#include "dabp/bp.hpp"
#include "dabp/generators.hpp"
#include "dabp/model.hpp"
#include "dabp/oracle.hpp"
#include "dabp/rng.hpp"
#include "dabp/trainer.hpp"
#include "test_util.hpp"

using namespace dabp;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %2d. %-26s %s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string num(const char* pattern, double a) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), pattern, a);
    return buf;
}

// --- 1: vanilla BP is exact and converges quickly on trees --------------------

void criterion_tree_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    int exact = 0, converged_in_time = 0;
    const int runs = 50;
    for (int s = 0; s < runs; ++s) {
        Rng rng(5000 + s);
        const COPInstance inst = testutil::random_tree(10, 4, rng);
        const FactorGraph g = build_factor_graph(inst);
        const int diameter = testutil::factor_graph_diameter(g);

        bp::MessageSet prev = bp::zero_messages(g);
        bool conv = false;
        for (int t = 1; t <= diameter + 2 && !conv; ++t) {
            bp::MessageSet cur;
            cur.v2f = bp::v2f_step_vanilla(g, prev);
            cur.f2v = bp::f2v_step(g, inst, cur.v2f);
            conv = bp::converged(cur, prev, 1e-9);
            prev = std::move(cur);
        }
        if (conv) ++converged_in_time;
        const double got = total_cost(inst, bp::decide(bp::beliefs(g, prev.f2v)));
        if (std::abs(got - oracle::solve_exact(inst).cost) <= 1e-9) ++exact;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, "tree exactness",
           exact == runs && converged_in_time == runs && secs < 5.0,
           "exact " + std::to_string(exact) + "/50, converged " +
               std::to_string(converged_in_time) + "/50 within diameter+2, " +
               num("%.2f s", secs));
}

// --- 2: update-rule reduction identities --------------------------------------

void criterion_reductions() {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        GeneratorConfig cfg;
        cfg.family = Family::RandomCop;
        cfg.num_variables = 12;
        cfg.domain_size = 5;
        cfg.p1 = 0.4;
        cfg.cost_min = 0.0;
        cfg.cost_max = 10.0;
        cfg.seed = 6000 + static_cast<std::uint64_t>(s);
        const COPInstance inst = gen_random_cop(cfg);
        const FactorGraph g = build_factor_graph(inst);

        // a short warm-up from zero produces realistic message magnitudes
        bp::MessageSet prev = bp::zero_messages(g);
        for (int t = 0; t < 3; ++t) {
            bp::MessageSet cur;
            cur.v2f = bp::v2f_step_damped(g, prev, 0.5);
            cur.f2v = bp::f2v_step(g, inst, cur.v2f);
            prev = std::move(cur);
        }

        for (double lambda : {0.0, 0.35, 0.9}) {
            const auto general =
                bp::v2f_step(g, prev, bp::uniform_hyperparams(g, lambda), false);
            const auto damped = bp::v2f_step_damped(g, prev, lambda, false);
            for (int e = 0; e < g.num_edges; ++e)
                for (std::size_t k = 0; k < general[e].size(); ++k)
                    worst = std::max(worst, std::abs(general[e][k] - damped[e][k]));
        }
        const auto general0 =
            bp::v2f_step(g, prev, bp::uniform_hyperparams(g, 0.0), false);
        const auto vanilla = bp::v2f_step_vanilla(g, prev, false);
        for (int e = 0; e < g.num_edges; ++e)
            for (std::size_t k = 0; k < general0[e].size(); ++k)
                worst = std::max(worst, std::abs(general0[e][k] - vanilla[e][k]));
    }
    report(2, "reduction identities", worst <= 1e-12,
           num("max elementwise deviation %.3g (tol 1e-12)", worst));
}

// --- 3: constraint splitting preserves totals ----------------------------------

void criterion_split_invariance() {
    double worst = 0.0;
    bool counts_ok = true;
    for (int s = 0; s < 10; ++s) {
        Rng rng(7000 + s);
        const COPInstance inst = testutil::random_cyclic(9, 4, 8, rng);
        const COPInstance split = split_scfg(inst, 0.95);
        counts_ok = counts_ok && split.num_functions() == 2 * inst.num_functions();
        Rng arng(7100 + s);
        for (int rep = 0; rep < 100; ++rep) {
            Assignment a(9);
            for (int i = 0; i < 9; ++i) a[i] = arng.uniform_int(4);
            const double c0 = total_cost(inst, a);
            const double c1 = total_cost(split, a);
            worst = std::max(worst, std::abs(c1 - c0) / std::max(1.0, std::abs(c0)));
        }
    }
    report(3, "split invariance", worst <= 1e-9 && counts_ok,
           num("max relative drift %.3g (tol 1e-9), ", worst) +
               (counts_ok ? "function counts doubled" : "function counts WRONG"));
}

// --- 4: smoothed loss equals the enumeration oracle ---------------------------

void criterion_loss_oracle() {
    double worst = 0.0;
    Rng rng(8000);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 3 + rep % 4;      // up to 6 variables
        const int domain = 2 + rep % 3; // up to 4
        const COPInstance inst = testutil::random_cyclic(n, domain, rep % 5, rng);
        const bp::BeliefTable b = testutil::random_beliefs(inst, rng);
        const auto probs = train::assignment_probs(b);
        const double fast = train::smoothed_loss(inst, probs);
        const double slow = oracle::enumerate_expected_cost(inst, probs);
        worst = std::max(worst, std::abs(fast - slow) / std::max(1.0, std::abs(slow)));
    }
    report(4, "loss oracle equivalence", worst <= 1e-9,
           num("max relative deviation %.3g over 100 instances (tol 1e-9)", worst));
}

// --- 5: the smoothing error bound holds ----------------------------------------

void criterion_gap_bound() {
    int violations = 0;
    Rng rng(9000);
    const int pairs = 1200;
    for (int rep = 0; rep < pairs; ++rep) {
        const int n = 3 + rep % 5;
        const int domain = 2 + rep % 4;
        const COPInstance inst = testutil::random_cyclic(n, domain, rep % 6, rng);
        const bp::BeliefTable b = testutil::random_beliefs(inst, rng, -30.0, 30.0);
        const train::GapBound gb = train::smoothing_gap(inst, b);
        if (gb.gap > gb.bound) ++violations;
    }
    report(5, "smoothing gap bound", violations == 0,
           std::to_string(violations) + " violations over " + std::to_string(pairs) +
               " (instance, belief) pairs");
}

// --- 6: end-to-end gradients ----------------------------------------------------

void criterion_gradient_fidelity() {
    COPInstance inst;
    inst.domains = {2, 2, 2};
    Rng rng(10000);
    inst.functions.push_back(testutil::random_binary(0, 1, 2, 2, rng, 0.0, 5.0));
    inst.functions.push_back(testutil::random_binary(1, 2, 2, 2, rng, 0.0, 5.0));
    inst.functions.push_back(testutil::random_binary(0, 2, 2, 2, rng, 0.0, 5.0));

    model::ModelConfig mc;
    mc.hidden = 2;
    mc.gat_layers = 1;
    mc.gat_heads = 1;
    mc.gat_channels = 2;
    mc.att_heads = 1;
    mc.att_width = 2;

    train::TrainConfig cfg;
    cfg.restarts = 1;
    cfg.t_max = 20;
    cfg.t_upd = 20; // one full update window
    cfg.t_eff = 2;
    cfg.seed = 10001;

    model::Model m(mc, 2, cfg.seed);
    const train::WindowProbe probe = train::window_gradient(inst, m, cfg);

    double worst = 0.0;
    std::size_t components = 0;
    for (const auto& [name, analytic] : probe.grads) {
        diff::Value p = m.params().find(name);
        for (std::size_t i = 0; i < analytic.size(); ++i, ++components) {
            const double keep = p->val[i];
            p->val[i] = keep + 1e-5;
            const double up = train::window_loss(inst, m, cfg);
            p->val[i] = keep - 1e-5;
            const double dn = train::window_loss(inst, m, cfg);
            p->val[i] = keep;
            const double fd = (up - dn) / 2e-5;
            const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
            worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
        }
    }
    report(6, "gradient fidelity", worst <= 1e-4,
           num("max relative error %.3g ", worst) + "over " +
               std::to_string(components) + " components (tol 1e-4)");
}

// --- 7: inferred hyperparameters are always valid -------------------------------

void criterion_hyperparam_validity() {
    long long edge_sets = 0, bad = 0;
    for (int s = 0; s < 48 && edge_sets < 10000; ++s) {
        GeneratorConfig gcfg;
        gcfg.family = Family::RandomCop;
        gcfg.num_variables = 16;
        gcfg.domain_size = 3 + s % 3;
        gcfg.p1 = 0.45;
        gcfg.seed = 11000 + static_cast<std::uint64_t>(s);
        const COPInstance inst = gen_random_cop(gcfg);
        const FactorGraph fg = build_factor_graph(inst);
        const model::GraphLayout lay = model::build_layout(fg);

        model::ModelConfig mc;
        mc.mode = (s % 3 == 0)   ? model::Mode::Full
                  : (s % 3 == 1) ? model::Mode::HeterLambda
                                 : model::Mode::HomoLambda;
        model::Model m(mc, gcfg.domain_size, 11100 + s);

        Rng mrng(11200 + s);
        diff::Graph g;
        model::EncoderState state = m.initial_state(g, fg);
        for (int t = 0; t < 3; ++t) {
            const bp::MessageSet msgs = testutil::random_messages(fg, mrng, 0.0, 50.0);
            auto step = m.step(g, state, msgs, fg, lay);
            state = step.state;
            const bp::HyperParams hp = step.hyper.values();
            for (int e = 0; e < fg.num_edges; ++e) {
                ++edge_sets;
                if (!(hp.lambda[e] >= 0.0 && hp.lambda[e] <= 1.0)) ++bad;
                if (!hp.weights[e].empty()) {
                    double sum = 0.0;
                    for (double w : hp.weights[e]) {
                        sum += w;
                        if (!(w >= 0.0 && w <= 1.0)) ++bad;
                    }
                    if (std::abs(sum - 1.0) > 1e-6) ++bad;
                }
            }
        }
    }
    report(7, "hyperparameter validity", edge_sets >= 10000 && bad == 0,
           std::to_string(edge_sets) + " edge sets checked, " + std::to_string(bad) +
               " invalid");
}

// --- 8 & 9: desk-scale trend and the anytime property ---------------------------

void criterion_trend_and_anytime() {
    const auto t0 = std::chrono::steady_clock::now();
    const int count = 10;
    int dabp_le_bp = 0;
    long long monotone_violations = 0;
    double mean_bp = 0, mean_dbp = 0, mean_scfg = 0, mean_dabp = 0;

    for (int i = 0; i < count; ++i) {
        GeneratorConfig gcfg;
        gcfg.family = Family::RandomCop;
        gcfg.num_variables = 20;
        gcfg.domain_size = 5;
        gcfg.p1 = 0.25;
        gcfg.seed = derive_seed(12000, static_cast<std::uint64_t>(i));
        const COPInstance inst = gen_random_cop(gcfg);

        bench::SolveOptions base;
        base.train.restarts = 1;
        base.train.t_max = 200;
        base.train.seed = derive_seed(12100, static_cast<std::uint64_t>(i));

        bench::SolveOptions bp_opt = base;
        bp_opt.algo = "bp";
        bench::SolveOptions dbp_opt = base;
        dbp_opt.algo = "dbp";
        dbp_opt.lambda = 0.9;
        bench::SolveOptions scfg_opt = base;
        scfg_opt.algo = "dbp-scfg";
        scfg_opt.lambda = 0.9;
        scfg_opt.rho = 0.95;
        bench::SolveOptions dabp_opt = base;
        dabp_opt.algo = "dabp";
        dabp_opt.train.restarts = 5;
        dabp_opt.train.t_upd = 20;
        dabp_opt.train.t_eff = 2;

        const bench::SolveResult r_bp = bench::solve_instance(inst, bp_opt);
        const bench::SolveResult r_dbp = bench::solve_instance(inst, dbp_opt);
        const bench::SolveResult r_scfg = bench::solve_instance(inst, scfg_opt);
        const bench::SolveResult r_dabp = bench::solve_instance(inst, dabp_opt);

        mean_bp += r_bp.best_cost / count;
        mean_dbp += r_dbp.best_cost / count;
        mean_scfg += r_scfg.best_cost / count;
        mean_dabp += r_dabp.best_cost / count;
        if (r_dabp.best_cost <= r_bp.best_cost + 1e-9) ++dabp_le_bp;

        for (const auto* trace :
             {&r_bp.trace, &r_dbp.trace, &r_scfg.trace, &r_dabp.trace}) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& rec : trace->records) {
                best = std::min(best, rec.cost);
                if (rec.best_cost != best) ++monotone_violations;
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool pass8 = dabp_le_bp >= 8 && mean_dabp <= mean_dbp + 1e-9 && secs < 900.0;
    report(8, "desk-scale trend", pass8,
           "dabp<=bp on " + std::to_string(dabp_le_bp) + "/10; mean best cost: " +
               num("dabp %.2f", mean_dabp) + num(", dbp %.2f", mean_dbp) +
               num(", bp %.2f", mean_bp) + num(", dbp-scfg %.2f", mean_scfg) +
               num("; %.0f s", secs));
    report(9, "anytime property", monotone_violations == 0,
           std::to_string(monotone_violations) + " monotonicity violations");
}

// --- 10: generator structure over many seeds ------------------------------------

void criterion_generators() {
    std::string why;
    bool ok = true;

    for (int s = 0; s < 100 && ok; ++s) {
        GeneratorConfig cfg;
        cfg.family = Family::Wgcp;
        cfg.num_variables = 12;
        cfg.p1 = 0.4;
        cfg.seed = 13000 + static_cast<std::uint64_t>(s);
        const COPInstance inst = gen_wgcp(cfg);
        for (const auto& fn : inst.functions) {
            const int d = inst.domains[fn.scope[0]];
            for (int a = 0; a < d && ok; ++a)
                for (int b = 0; b < d && ok; ++b) {
                    const double c = fn.table[static_cast<std::size_t>(a) * d + b];
                    if (a == b ? !(c >= 1.0 && c <= 100.0) : c != 0.0) {
                        ok = false;
                        why = "wgcp table structure";
                    }
                }
        }
    }

    for (int s = 0; s < 100 && ok; ++s) {
        GeneratorConfig cfg;
        cfg.family = Family::ScaleFree;
        cfg.num_variables = 40;
        cfg.m0 = 8;
        cfg.m1 = 4;
        cfg.seed = 13100 + static_cast<std::uint64_t>(s);
        if (gen_scale_free(cfg).num_functions() != 8 + (40 - 8) * 4) {
            ok = false;
            why = "scale-free edge count";
        }
    }

    for (int s = 0; s < 100 && ok; ++s) {
        GeneratorConfig cfg;
        cfg.family = Family::SmallWorld;
        cfg.num_variables = 30;
        cfg.k = 6;
        cfg.p = 0.0;
        cfg.seed = 13200 + static_cast<std::uint64_t>(s);
        if (gen_small_world(cfg).num_functions() != 30 * 6 / 2) {
            ok = false;
            why = "small-world lattice count";
        }
    }

    const double pairs = 40.0 * 39.0 / 2.0;
    const double mean = pairs * 0.3;
    const double sigma = std::sqrt(pairs * 0.3 * 0.7);
    for (int s = 0; s < 100 && ok; ++s) {
        GeneratorConfig cfg;
        cfg.family = Family::RandomCop;
        cfg.num_variables = 40;
        cfg.p1 = 0.3;
        cfg.seed = 13300 + static_cast<std::uint64_t>(s);
        const int f = gen_random_cop(cfg).num_functions();
        if (std::abs(f - mean) > 4.0 * sigma) {
            ok = false;
            why = "random-cop binomial count";
        }
    }

    report(10, "generator properties", ok,
           ok ? "wgcp, scale-free, small-world, random-cop: 100 seeds each"
              : "violated: " + why);
}

// --- 11: convergence-rate report ------------------------------------------------

void criterion_convergence_report() {
    std::vector<std::pair<std::string, COPInstance>> instances;
    for (int i = 0; i < 8; ++i) {
        GeneratorConfig cfg;
        cfg.family = Family::RandomCop;
        cfg.num_variables = 12;
        cfg.domain_size = 4;
        cfg.p1 = 0.3;
        cfg.seed = 14000 + static_cast<std::uint64_t>(i);
        instances.emplace_back("i" + std::to_string(i), gen_random_cop(cfg));
    }
    bench::BenchOptions opt;
    opt.algos = {"bp", "dbp"};
    opt.solve.train.t_max = 1000;
    opt.limits = {125, 250, 500, 1000};
    const bench::BenchReport rep = bench::run_bench(instances, opt);

    bool monotone = true;
    const bool have_limits = rep.limits == std::vector<int>{125, 250, 500, 1000};
    for (const auto& agg : rep.aggregates)
        for (std::size_t i = 1; i < agg.convergence_rate.size(); ++i)
            monotone = monotone && agg.convergence_rate[i] >= agg.convergence_rate[i - 1];
    const std::string csv = bench::aggregates_csv(rep);
    const bool header_ok = csv.find("conv@125") != std::string::npos &&
                           csv.find("conv@1000") != std::string::npos;

    report(11, "convergence-rate report", monotone && have_limits && header_ok,
           std::string("fractions at {125,250,500,1000} ") +
               (monotone ? "monotone" : "NOT monotone") + ", csv columns " +
               (header_ok ? "emitted" : "MISSING"));
}

} // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_tree_exactness();
    criterion_reductions();
    criterion_split_invariance();
    criterion_loss_oracle();
    criterion_gap_bound();
    criterion_gradient_fidelity();
    criterion_hyperparam_validity();
    criterion_trend_and_anytime();
    criterion_generators();
    criterion_convergence_report();
    std::printf("================\n%s (%d failure%s)\n",
                g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
