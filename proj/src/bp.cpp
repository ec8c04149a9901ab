#include "dabp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dabp::bp {

MessageSet zero_messages(const FactorGraph& g) {
    MessageSet m;
    m.v2f.resize(g.num_edges);
    m.f2v.resize(g.num_edges);
    for (int e = 0; e < g.num_edges; ++e) {
        const int d = g.domains[g.edge_var[e]];
        m.v2f[e].assign(d, 0.0);
        m.f2v[e].assign(d, 0.0);
    }
    return m;
}

HyperParams uniform_hyperparams(const FactorGraph& g, double lambda) {
    HyperParams hp;
    hp.lambda.assign(g.num_edges, lambda);
    hp.weights.resize(g.num_edges);
    for (int e = 0; e < g.num_edges; ++e) {
        const int deg = g.degree(g.edge_var[e]);
        if (deg > 1) hp.weights[e].assign(deg - 1, 1.0 / (deg - 1));
    }
    return hp;
}

void validate_hyperparams(const FactorGraph& g, const HyperParams& hp) {
    if (static_cast<int>(hp.lambda.size()) != g.num_edges ||
        static_cast<int>(hp.weights.size()) != g.num_edges)
        throw std::invalid_argument("hyperparameters do not cover every edge");
    for (int e = 0; e < g.num_edges; ++e) {
        const double l = hp.lambda[e];
        if (!(l >= 0.0 && l <= 1.0))
            throw std::invalid_argument("damping factor out of [0,1] on edge " +
                                        std::to_string(e));
        const int deg = g.degree(g.edge_var[e]);
        if (static_cast<int>(hp.weights[e].size()) != deg - 1)
            throw std::invalid_argument("weight vector missing or mis-sized on edge " +
                                        std::to_string(e));
        if (deg > 1) {
            double sum = 0.0;
            for (double w : hp.weights[e]) sum += w;
            if (std::abs(sum - 1.0) > 1e-6)
                throw std::invalid_argument("weights on edge " + std::to_string(e) +
                                            " sum to " + std::to_string(sum));
        }
    }
}

namespace {

void check_finite(const std::vector<std::vector<double>>& msgs, const char* what) {
    for (const auto& v : msgs)
        for (double x : v)
            if (!std::isfinite(x))
                throw std::invalid_argument(std::string("non-finite entry in ") + what);
}

void subtract_min(std::vector<double>& v) {
    const double m = *std::min_element(v.begin(), v.end());
    for (double& x : v) x -= m;
}

} // namespace

std::vector<std::vector<double>> v2f_step(const FactorGraph& g,
                                          const MessageSet& prev,
                                          const HyperParams& hp,
                                          bool normalize) {
    validate_hyperparams(g, hp);
    check_finite(prev.v2f, "previous variable-to-function messages");
    check_finite(prev.f2v, "previous function-to-variable messages");

    std::vector<std::vector<double>> out(g.num_edges);
    for (int e = 0; e < g.num_edges; ++e) {
        const int var = g.edge_var[e];
        const int d = g.domains[var];
        const auto& neighbors = g.var_edges[var];
        const int deg = static_cast<int>(neighbors.size());
        const double lam = hp.lambda[e];

        std::vector<double> agg(d, 0.0);
        int w_idx = 0;
        for (int other : neighbors) {
            if (other == e) continue;
            const double w = hp.weights[e][w_idx++];
            const auto& msg = prev.f2v[other];
            for (int k = 0; k < d; ++k) agg[k] += w * msg[k];
        }

        std::vector<double>& res = out[e];
        res.resize(d);
        const auto& p = prev.v2f[e];
        for (int k = 0; k < d; ++k)
            res[k] = lam * p[k] + (1.0 - lam) * ((deg - 1) * agg[k]);
        if (normalize) subtract_min(res);
    }
    return out;
}

std::vector<std::vector<double>> v2f_step_vanilla(const FactorGraph& g,
                                                  const MessageSet& prev,
                                                  bool normalize) {
    check_finite(prev.f2v, "previous function-to-variable messages");
    std::vector<std::vector<double>> out(g.num_edges);
    for (int e = 0; e < g.num_edges; ++e) {
        const int var = g.edge_var[e];
        const int d = g.domains[var];
        std::vector<double>& res = out[e];
        res.assign(d, 0.0);
        for (int other : g.var_edges[var]) {
            if (other == e) continue;
            const auto& msg = prev.f2v[other];
            for (int k = 0; k < d; ++k) res[k] += msg[k];
        }
        if (normalize) subtract_min(res);
    }
    return out;
}

std::vector<std::vector<double>> v2f_step_damped(const FactorGraph& g,
                                                 const MessageSet& prev,
                                                 double lambda,
                                                 bool normalize) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("damping factor must lie in [0,1]");
    check_finite(prev.v2f, "previous variable-to-function messages");
    check_finite(prev.f2v, "previous function-to-variable messages");
    std::vector<std::vector<double>> out(g.num_edges);
    for (int e = 0; e < g.num_edges; ++e) {
        const int var = g.edge_var[e];
        const int d = g.domains[var];
        std::vector<double> sum(d, 0.0);
        for (int other : g.var_edges[var]) {
            if (other == e) continue;
            const auto& msg = prev.f2v[other];
            for (int k = 0; k < d; ++k) sum[k] += msg[k];
        }
        std::vector<double>& res = out[e];
        res.resize(d);
        const auto& p = prev.v2f[e];
        for (int k = 0; k < d; ++k)
            res[k] = lambda * p[k] + (1.0 - lambda) * sum[k];
        if (normalize) subtract_min(res);
    }
    return out;
}

std::vector<std::vector<double>> f2v_step(const FactorGraph& g,
                                          const COPInstance& instance,
                                          const std::vector<std::vector<double>>& v2f) {
    if (static_cast<int>(v2f.size()) != g.num_edges)
        throw std::invalid_argument("variable-to-function messages missing for some edges");
    check_finite(v2f, "variable-to-function messages");

    std::vector<std::vector<double>> out(g.num_edges);
    std::vector<int> idx;
    for (int l = 0; l < g.num_funcs; ++l) {
        const CostFunction& fn = instance.functions[l];
        const auto& edges = g.func_edges[l];
        const int arity = static_cast<int>(edges.size());

        for (int p = 0; p < arity; ++p)
            out[edges[p]].assign(g.domains[fn.scope[p]],
                                 std::numeric_limits<double>::infinity());

        // one pass over the table: every entry is a candidate for each
        // target position, with the target's own incoming message excluded
        idx.assign(arity, 0);
        const std::size_t cells = fn.table.size();
        for (std::size_t c = 0; c < cells; ++c) {
            for (int p = 0; p < arity; ++p) {
                double cand = fn.table[c];
                for (int q = 0; q < arity; ++q)
                    if (q != p) cand += v2f[edges[q]][idx[q]];
                double& slot = out[edges[p]][idx[p]];
                if (cand < slot) slot = cand; // strict: ties keep the lowest joint index
            }
            for (int p = arity - 1; p >= 0; --p) {
                if (++idx[p] < instance.domains[fn.scope[p]]) break;
                idx[p] = 0;
            }
        }
    }
    return out;
}

BeliefTable beliefs(const FactorGraph& g,
                    const std::vector<std::vector<double>>& f2v) {
    BeliefTable b(g.num_vars);
    for (int i = 0; i < g.num_vars; ++i) {
        b[i].assign(g.domains[i], 0.0);
        for (int e : g.var_edges[i])
            for (int k = 0; k < g.domains[i]; ++k) b[i][k] += f2v[e][k];
    }
    return b;
}

Assignment decide(const BeliefTable& b) {
    Assignment a(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        int best = 0;
        for (int k = 1; k < static_cast<int>(b[i].size()); ++k)
            if (b[i][k] < b[i][best]) best = k;
        a[i] = best;
    }
    return a;
}

bool converged(const MessageSet& curr, const MessageSet& prev, double eps) {
    auto max_diff = [](const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& b) {
        if (a.size() != b.size())
            throw std::invalid_argument("message sets have different edge counts");
        double m = 0.0;
        for (std::size_t e = 0; e < a.size(); ++e) {
            if (a[e].size() != b[e].size())
                throw std::invalid_argument("message vectors have different lengths");
            for (std::size_t k = 0; k < a[e].size(); ++k)
                m = std::max(m, std::abs(a[e][k] - b[e][k]));
        }
        return m;
    };
    return max_diff(curr.v2f, prev.v2f) <= eps && max_diff(curr.f2v, prev.f2v) <= eps;
}

} // namespace dabp::bp
