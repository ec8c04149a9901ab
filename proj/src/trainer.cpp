#include "dabp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dabp/factor_graph.hpp"

namespace dabp::train {

void validate_config(const TrainConfig& cfg) {
    if (cfg.restarts < 1) throw std::invalid_argument("need at least one restart");
    if (cfg.t_max < 1) throw std::invalid_argument("iteration limit must be positive");
    if (cfg.t_upd < 1 || cfg.t_upd > cfg.t_max)
        throw std::invalid_argument("update interval must lie in [1, t_max]");
    if (cfg.t_eff < 1 || cfg.t_eff > cfg.t_upd)
        throw std::invalid_argument("effective iterations must lie in [1, t_upd]");
    if (cfg.lr <= 0) throw std::invalid_argument("learning rate must be positive");
    if (cfg.weight_decay < 0) throw std::invalid_argument("weight decay must be nonnegative");
    if (cfg.eps < 0) throw std::invalid_argument("convergence tolerance must be nonnegative");
}

std::vector<std::vector<double>> assignment_probs(const bp::BeliefTable& beliefs) {
    std::vector<std::vector<double>> probs(beliefs.size());
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        const auto& b = beliefs[i];
        probs[i].resize(b.size());
        // max of -b; the shift keeps the largest exponent at zero
        const double mx = -*std::min_element(b.begin(), b.end());
        double denom = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            probs[i][k] = std::exp(-b[k] - mx);
            denom += probs[i][k];
        }
        for (double& p : probs[i]) p /= denom;
    }
    return probs;
}

double smoothed_loss(const COPInstance& instance,
                     const std::vector<std::vector<double>>& probs) {
    if (probs.size() != instance.domains.size())
        throw std::invalid_argument("need one probability vector per variable");
    double total = 0.0;
    for (const CostFunction& fn : instance.functions) {
        if (fn.scope.size() == 1) {
            const auto& p = probs[fn.scope[0]];
            double acc = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) acc += fn.table[k] * p[k];
            total += acc;
        } else if (fn.scope.size() == 2) {
            const auto& p0 = probs[fn.scope[0]];
            const auto& p1 = probs[fn.scope[1]];
            double acc = 0.0;
            for (std::size_t a = 0; a < p0.size(); ++a) {
                double inner = 0.0;
                for (std::size_t b = 0; b < p1.size(); ++b)
                    inner += fn.table[a * p1.size() + b] * p1[b];
                acc += p0[a] * inner;
            }
            total += acc;
        } else {
            const int arity = static_cast<int>(fn.scope.size());
            std::vector<int> idx(arity, 0);
            double acc = 0.0;
            for (std::size_t c = 0; c < fn.table.size(); ++c) {
                double prod = 1.0;
                for (int p = 0; p < arity; ++p) prod *= probs[fn.scope[p]][idx[p]];
                acc += fn.table[c] * prod;
                for (int p = arity - 1; p >= 0; --p) {
                    if (++idx[p] < instance.domains[fn.scope[p]]) break;
                    idx[p] = 0;
                }
            }
            total += acc;
        }
    }
    return total;
}

GapBound smoothing_gap(const COPInstance& instance, const bp::BeliefTable& beliefs) {
    const Assignment tau = bp::decide(beliefs);
    const double loss = smoothed_loss(instance, assignment_probs(beliefs));
    GapBound gb;
    gb.gap = std::abs(loss - total_cost(instance, tau));
    gb.bound = 0.0;
    for (const CostFunction& fn : instance.functions) {
        const auto [mn, mx] = std::minmax_element(fn.table.begin(), fn.table.end());
        double inv_prod = 1.0;
        for (int v : fn.scope) inv_prod /= instance.domains[v];
        gb.bound += (*mx - *mn) * (1.0 - inv_prod);
    }
    return gb;
}

std::vector<int> select_effective(const std::vector<double>& window_costs, int t_eff) {
    if (t_eff < 1) throw std::invalid_argument("need at least one effective iteration");
    std::vector<int> idx(window_costs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return window_costs[a] < window_costs[b];
    });
    if (static_cast<int>(idx.size()) > t_eff) idx.resize(t_eff);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// ---------------------------------------------------------------------------
// differentiable BP steps
// ---------------------------------------------------------------------------

namespace {

diff::Value normalize_min(diff::Graph& g, diff::Value v) {
    return g.sub_scalar(v, g.reduce_min(v));
}

std::vector<diff::Value> tape_v2f(diff::Graph& g, const FactorGraph& fg,
                                  const model::TapeMessages& prev,
                                  const model::TapeHyperParams& hp) {
    std::vector<diff::Value> out(fg.num_edges);
    for (int e = 0; e < fg.num_edges; ++e) {
        const int var = fg.edge_var[e];
        const auto& neighbors = fg.var_edges[var];
        const int deg = static_cast<int>(neighbors.size());
        diff::Value lam = hp.lambda[e];
        diff::Value damped = g.mul_scalar(lam, prev.v2f[e]);
        if (deg <= 1) {
            out[e] = normalize_min(g, damped);
            continue;
        }
        diff::Value agg = nullptr;
        int w_idx = 0;
        for (int other : neighbors) {
            if (other == e) continue;
            diff::Value term = g.mul_scalar(hp.weights[e][w_idx++], prev.f2v[other]);
            agg = agg ? g.add(agg, term) : term;
        }
        diff::Value mixed = g.add(
            damped, g.mul_scalar(g.affine(lam, -1.0, 1.0),
                                 g.scale(agg, static_cast<double>(deg - 1))));
        out[e] = normalize_min(g, mixed);
    }
    return out;
}

std::vector<diff::Value> tape_f2v(diff::Graph& g, const FactorGraph& fg,
                                  const COPInstance& instance,
                                  const std::vector<diff::Value>& v2f) {
    std::vector<diff::Value> out(fg.num_edges);
    for (int l = 0; l < fg.num_funcs; ++l) {
        const CostFunction& fn = instance.functions[l];
        const auto& edges = fg.func_edges[l];
        const int arity = static_cast<int>(edges.size());
        std::vector<int> dims(arity);
        std::vector<diff::Value> msgs(arity);
        for (int p = 0; p < arity; ++p) {
            dims[p] = instance.domains[fn.scope[p]];
            msgs[p] = v2f[edges[p]];
        }
        for (int p = 0; p < arity; ++p)
            out[edges[p]] = g.min_marginal(fn.table, dims, msgs, p);
    }
    return out;
}

std::vector<diff::Value> tape_beliefs(diff::Graph& g, const FactorGraph& fg,
                                      const std::vector<diff::Value>& f2v) {
    std::vector<diff::Value> b(fg.num_vars);
    for (int i = 0; i < fg.num_vars; ++i) {
        diff::Value acc = nullptr;
        for (int e : fg.var_edges[i]) acc = acc ? g.add(acc, f2v[e]) : f2v[e];
        b[i] = acc ? acc : g.zeros(fg.domains[i], 1);
    }
    return b;
}

diff::Value tape_loss(diff::Graph& g, const COPInstance& instance, const FactorGraph& fg,
                      const std::vector<diff::Value>& belief_nodes) {
    std::vector<diff::Value> probs(belief_nodes.size());
    for (std::size_t i = 0; i < belief_nodes.size(); ++i)
        probs[i] = g.softmax(g.affine(belief_nodes[i], -1.0, 0.0));

    diff::Value total = nullptr;
    for (int l = 0; l < fg.num_funcs; ++l) {
        const CostFunction& fn = instance.functions[l];
        diff::Value term = nullptr;
        if (fn.scope.size() == 1) {
            term = g.dot(g.constant(fg.domains[fn.scope[0]], 1, fn.table),
                         probs[fn.scope[0]]);
        } else if (fn.scope.size() == 2) {
            const int d0 = fg.domains[fn.scope[0]];
            const int d1 = fg.domains[fn.scope[1]];
            diff::Value inner = g.matmul(g.constant(d0, d1, fn.table), probs[fn.scope[1]]);
            term = g.dot(probs[fn.scope[0]], inner);
        } else {
            std::vector<int> dims;
            std::vector<diff::Value> ps;
            for (int v : fn.scope) {
                dims.push_back(fg.domains[v]);
                ps.push_back(probs[v]);
            }
            term = g.expected_cost(fn.table, dims, ps);
        }
        total = total ? g.add(total, term) : term;
    }
    return total ? total : g.scalar(0.0);
}

std::vector<std::vector<double>> values_of(const std::vector<diff::Value>& vs) {
    std::vector<std::vector<double>> out(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) out[i] = vs[i]->val;
    return out;
}

// one restart's tape, messages, and window bookkeeping
struct RestartRun {
    const COPInstance& instance;
    const FactorGraph& fg;
    const model::GraphLayout& layout;
    model::Model& m;
    const TrainConfig& cfg;

    diff::Graph g;
    model::EncoderState state;
    model::TapeMessages msgs;
    bp::MessageSet plain_prev;
    std::vector<double> win_costs;
    std::vector<diff::Value> win_losses;
    int since_update = 0;

    RestartRun(const COPInstance& inst, const FactorGraph& graph,
               const model::GraphLayout& lay, model::Model& mdl, const TrainConfig& c)
        : instance(inst), fg(graph), layout(lay), m(mdl), cfg(c) {
        state = m.initial_state(g, fg);
        plain_prev = bp::zero_messages(fg);
        msgs.v2f.resize(fg.num_edges);
        msgs.f2v.resize(fg.num_edges);
        for (int e = 0; e < fg.num_edges; ++e) {
            const int d = fg.domains[fg.edge_var[e]];
            msgs.v2f[e] = g.zeros(d, 1);
            msgs.f2v[e] = g.zeros(d, 1);
        }
    }

    struct IterOut {
        Assignment tau;
        double cost;
        double loss;
        bool converged;
    };

    IterOut iterate() {
        auto step = m.step(g, state, msgs, fg, layout);
        state = step.state;
        msgs.v2f = tape_v2f(g, fg, msgs, step.hyper);
        msgs.f2v = tape_f2v(g, fg, instance, msgs.v2f);
        std::vector<diff::Value> belief_nodes = tape_beliefs(g, fg, msgs.f2v);
        diff::Value loss_node = tape_loss(g, instance, fg, belief_nodes);

        IterOut out;
        bp::BeliefTable b(belief_nodes.size());
        for (std::size_t i = 0; i < belief_nodes.size(); ++i) b[i] = belief_nodes[i]->val;
        out.tau = bp::decide(b);
        out.cost = total_cost(instance, out.tau);
        out.loss = loss_node->scalar();

        bp::MessageSet plain_cur;
        plain_cur.v2f = values_of(msgs.v2f);
        plain_cur.f2v = values_of(msgs.f2v);
        out.converged = bp::converged(plain_cur, plain_prev, cfg.eps);
        plain_prev = std::move(plain_cur);

        win_costs.push_back(out.cost);
        win_losses.push_back(loss_node);
        ++since_update;
        return out;
    }

    diff::Value effective_loss() {
        const std::vector<int> chosen = select_effective(win_costs, cfg.t_eff);
        diff::Value acc = nullptr;
        for (int t : chosen) {
            diff::Value l = win_losses[t];
            acc = acc ? g.add(acc, l) : l;
        }
        return g.scale(acc, 1.0 / static_cast<double>(chosen.size()));
    }

    // detaches messages and encoder state, then drops the window's tape
    void truncate() {
        std::vector<std::vector<double>> v2f = values_of(msgs.v2f);
        std::vector<std::vector<double>> f2v = values_of(msgs.f2v);
        std::vector<double> hv = state.h_v2f->val;
        std::vector<double> hf = state.h_f2v->val;
        const int hr = state.h_v2f->rows, hc = state.h_v2f->cols;
        g.clear();
        for (int e = 0; e < fg.num_edges; ++e) {
            const int dv = static_cast<int>(v2f[e].size());
            const int df = static_cast<int>(f2v[e].size());
            msgs.v2f[e] = g.constant(dv, 1, std::move(v2f[e]));
            msgs.f2v[e] = g.constant(df, 1, std::move(f2v[e]));
        }
        state.h_v2f = g.leaf(hr, hc, std::move(hv));
        state.h_f2v = g.leaf(hr, hc, std::move(hf));
        win_costs.clear();
        win_losses.clear();
        since_update = 0;
        plain_prev.v2f = values_of(msgs.v2f);
        plain_prev.f2v = values_of(msgs.f2v);
    }
};

} // namespace

RunTrace run_online(const COPInstance& instance, model::Model& m, const TrainConfig& cfg) {
    validate_config(cfg);
    validate_instance(instance);
    const FactorGraph fg = build_factor_graph(instance);
    const model::GraphLayout layout = model::build_layout(fg);

    RunTrace trace;
    trace.best_cost = std::numeric_limits<double>::infinity();
    const auto t0 = std::chrono::steady_clock::now();

    for (int rs = 1; rs <= cfg.restarts; ++rs) {
        RestartRun run(instance, fg, layout, m, cfg);

        // non-finite loss: abort this restart, keep the best so far
        auto update = [&]() -> bool {
            diff::Value loss = run.effective_loss();
            if (!std::isfinite(loss->scalar())) {
                trace.notes.push_back("restart " + std::to_string(rs) +
                                      ": non-finite loss, restart aborted");
                return false;
            }
            run.g.backward(loss);
            m.params().fill_missing_grads(); // disconnected parameters: zero grad
            diff::adam_step(m.params(), cfg.lr, cfg.weight_decay);
            run.truncate();
            return true;
        };

        for (int t = 1; t <= cfg.t_max; ++t) {
            RestartRun::IterOut it = run.iterate();
            if (it.cost < trace.best_cost) {
                trace.best_cost = it.cost;
                trace.best_assignment = it.tau;
            }
            trace.records.push_back(
                {rs, t, it.cost, it.loss, trace.best_cost, it.converged});

            bool aborted = false;
            bool updated = false;
            if (t % cfg.t_upd == 0) {
                updated = true;
                if (!update()) aborted = true;
            }
            if (aborted) break;
            if (it.converged) {
                if (!updated && run.since_update > 0 && !update()) {
                    // aborted on the final partial window; nothing else to do
                }
                if (!trace.convergence_iteration || t < *trace.convergence_iteration)
                    trace.convergence_iteration = t;
                break;
            }
        }
    }

    trace.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

RunTrace run_baseline(const COPInstance& instance, Baseline algo, double lambda,
                      double rho, const TrainConfig& cfg) {
    validate_config(cfg);
    validate_instance(instance);
    if (algo != Baseline::Bp && !(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("damping factor must lie in [0,1]");

    const COPInstance work =
        (algo == Baseline::DbpScfg) ? split_scfg(instance, rho) : instance;
    const FactorGraph fg = build_factor_graph(work);

    RunTrace trace;
    trace.best_cost = std::numeric_limits<double>::infinity();
    const auto t0 = std::chrono::steady_clock::now();

    bp::MessageSet prev = bp::zero_messages(fg);
    for (int t = 1; t <= cfg.t_max; ++t) {
        bp::MessageSet cur;
        cur.v2f = (algo == Baseline::Bp)
                      ? bp::v2f_step_vanilla(fg, prev)
                      : bp::v2f_step_damped(fg, prev, lambda);
        cur.f2v = bp::f2v_step(fg, work, cur.v2f);
        cur.iteration = t;

        const bp::BeliefTable b = bp::beliefs(fg, cur.f2v);
        const Assignment tau = bp::decide(b);
        const double cost = total_cost(work, tau);
        const double loss = smoothed_loss(work, assignment_probs(b));
        const bool conv = bp::converged(cur, prev, cfg.eps);

        if (cost < trace.best_cost) {
            trace.best_cost = cost;
            trace.best_assignment = tau;
        }
        trace.records.push_back({1, t, cost, loss, trace.best_cost, conv});
        prev = std::move(cur);
        if (conv) {
            trace.convergence_iteration = t;
            break;
        }
    }

    trace.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

namespace {

diff::Value run_one_window(RestartRun& run, const TrainConfig& cfg) {
    for (int t = 1; t <= cfg.t_upd; ++t) run.iterate();
    return run.effective_loss();
}

} // namespace

double window_loss(const COPInstance& instance, model::Model& m, const TrainConfig& cfg) {
    validate_config(cfg);
    const FactorGraph fg = build_factor_graph(instance);
    const model::GraphLayout layout = model::build_layout(fg);
    RestartRun run(instance, fg, layout, m, cfg);
    return run_one_window(run, cfg)->scalar();
}

WindowProbe window_gradient(const COPInstance& instance, model::Model& m,
                            const TrainConfig& cfg) {
    validate_config(cfg);
    const FactorGraph fg = build_factor_graph(instance);
    const model::GraphLayout layout = model::build_layout(fg);
    RestartRun run(instance, fg, layout, m, cfg);
    diff::Value loss = run_one_window(run, cfg);
    run.g.backward(loss);

    WindowProbe probe;
    probe.loss = loss->scalar();
    for (const std::string& name : m.params().names()) {
        diff::Value p = m.params().find(name);
        probe.grads[name] = p->grad.empty() ? std::vector<double>(p->size(), 0.0)
                                            : p->grad;
    }
    m.params().zero_grads();
    return probe;
}

} // namespace dabp::train
