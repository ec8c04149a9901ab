#include "dabp/model.hpp"

#include <stdexcept>

namespace dabp::model {

Mode mode_from_name(const std::string& name) {
    if (name == "full") return Mode::Full;
    if (name == "heter") return Mode::HeterLambda;
    if (name == "homo") return Mode::HomoLambda;
    throw std::invalid_argument("unknown model mode: " + name);
}

GraphLayout build_layout(const FactorGraph& fg) {
    GraphLayout lay;
    lay.num_vars = fg.num_vars;
    lay.num_funcs = fg.num_funcs;
    lay.num_edges = fg.num_edges;
    lay.aug_nodes = fg.num_vars + fg.num_funcs + 2 * fg.num_edges;

    lay.edge_src.reserve(4 * fg.num_edges + lay.aug_nodes);
    lay.edge_dst.reserve(4 * fg.num_edges + lay.aug_nodes);
    auto link = [&](int src, int dst) {
        lay.edge_src.push_back(src);
        lay.edge_dst.push_back(dst);
    };
    for (int e = 0; e < fg.num_edges; ++e) {
        const int v = lay.var_node(fg.edge_var[e]);
        const int f = lay.func_node(fg.edge_func[e]);
        link(v, lay.v2f_node(e));
        link(lay.v2f_node(e), f);
        link(f, lay.f2v_node(e));
        link(lay.f2v_node(e), v);
    }
    for (int n = 0; n < lay.aug_nodes; ++n) link(n, n);

    lay.edge_pair.assign(fg.num_edges, -1);
    for (int i = 0; i < fg.num_vars; ++i) {
        const auto& edges = fg.var_edges[i];
        const int deg = static_cast<int>(edges.size());
        for (int ti = 0; ti < deg; ++ti) {
            const int pair = static_cast<int>(lay.pair_edge.size());
            lay.pair_edge.push_back(edges[ti]);
            lay.edge_pair[edges[ti]] = pair;
            lay.self_rows.push_back(-1);
            lay.nonself_offset.push_back(static_cast<int>(lay.nonself_rows.size()));
            for (int mi = 0; mi < deg; ++mi) {
                const int row = static_cast<int>(lay.trip_target.size());
                lay.trip_target.push_back(fg.edge_func[edges[ti]]);
                lay.trip_neighbor.push_back(fg.edge_func[edges[mi]]);
                if (mi == ti) {
                    lay.self_rows[pair] = row;
                } else {
                    lay.nonself_rows.push_back(row);
                    lay.nonself_pair.push_back(pair);
                }
            }
        }
    }
    return lay;
}

bp::HyperParams TapeHyperParams::values() const {
    bp::HyperParams hp;
    hp.lambda.reserve(lambda.size());
    for (diff::Value l : lambda) hp.lambda.push_back(l->scalar());
    hp.weights.resize(weights.size());
    for (std::size_t e = 0; e < weights.size(); ++e) {
        hp.weights[e].reserve(weights[e].size());
        for (diff::Value w : weights[e]) hp.weights[e].push_back(w->scalar());
    }
    return hp;
}

Model::Model(const ModelConfig& cfg, int max_domain, std::uint64_t seed)
    : cfg_(cfg), pad_(max_domain) {
    if (cfg.hidden < 1 || cfg.gat_layers < 1 || cfg.gat_heads < 1 ||
        cfg.gat_channels < 1 || cfg.att_heads < 1 || cfg.att_width < 1)
        throw std::invalid_argument("model configuration values must be positive");
    if (max_domain < 1)
        throw std::invalid_argument("max domain must be positive");

    Rng rng(seed);
    enc_v2f_ = nn::make_gru(store_, "enc_v2f", pad_, cfg.hidden, rng);
    enc_f2v_ = nn::make_gru(store_, "enc_f2v", pad_, cfg.hidden, rng);
    var_embed_ = store_.create_uniform("embed/var", 1, cfg.hidden, rng);
    func_embed_ = store_.create_uniform("embed/func", 1, cfg.hidden, rng);

    int width = cfg.hidden;
    for (int l = 0; l < cfg.gat_layers; ++l) {
        gat_.push_back(nn::make_gat_layer(store_, "gat" + std::to_string(l), width,
                                          cfg.gat_channels, cfg.gat_heads, rng));
        const bool last = (l == cfg.gat_layers - 1);
        width = last ? cfg.gat_channels : cfg.gat_channels * cfg.gat_heads;
    }

    for (int k = 0; k < cfg.att_heads; ++k) {
        AttHead head;
        const std::string prefix = "att" + std::to_string(k);
        head.w2 = store_.create_uniform(prefix + "/w2", width, cfg.att_width, rng);
        head.w3 = store_.create_uniform(prefix + "/w3", width, cfg.att_width, rng);
        head.w1 = store_.create_uniform(prefix + "/w1", 2 * cfg.att_width, 1, rng);
        att_.push_back(head);
    }
}

EncoderState Model::initial_state(diff::Graph& g, const FactorGraph& fg) const {
    EncoderState s;
    s.h_v2f = g.zeros(fg.num_edges, cfg_.hidden);
    s.h_f2v = g.zeros(fg.num_edges, cfg_.hidden);
    return s;
}

TapeMessages Model::lift(diff::Graph& g, const bp::MessageSet& msgs) const {
    TapeMessages tm;
    tm.v2f.reserve(msgs.v2f.size());
    tm.f2v.reserve(msgs.f2v.size());
    for (const auto& v : msgs.v2f)
        tm.v2f.push_back(g.constant(static_cast<int>(v.size()), 1, v));
    for (const auto& v : msgs.f2v)
        tm.f2v.push_back(g.constant(static_cast<int>(v.size()), 1, v));
    return tm;
}

EncoderState Model::encode_messages(diff::Graph& g, const EncoderState& state,
                                    const TapeMessages& msgs) const {
    EncoderState next;
    next.h_v2f = nn::gru_cell(g, enc_v2f_, state.h_v2f,
                              g.stack_rows_padded(msgs.v2f, pad_));
    next.h_f2v = nn::gru_cell(g, enc_f2v_, state.h_f2v,
                              g.stack_rows_padded(msgs.f2v, pad_));
    return next;
}

EncoderState Model::encode_messages(diff::Graph& g, const EncoderState& state,
                                    const bp::MessageSet& msgs) const {
    return encode_messages(g, state, lift(g, msgs));
}

diff::Value Model::embed_graph(diff::Graph& g, const GraphLayout& layout,
                               const EncoderState& state) const {
    diff::Value feats = g.concat_rows({
        g.repeat_row(var_embed_, layout.num_vars),
        g.repeat_row(func_embed_, layout.num_funcs),
        state.h_v2f,
        state.h_f2v,
    });
    for (std::size_t l = 0; l < gat_.size(); ++l) {
        const bool last = (l + 1 == gat_.size());
        feats = nn::gat_layer(g, gat_[l], feats, layout.edge_src, layout.edge_dst, last).out;
    }
    return g.slice_rows(feats, layout.num_vars, layout.num_funcs);
}

TapeHyperParams Model::infer_hyperparams(diff::Graph& g, diff::Value func_embeds,
                                         const FactorGraph& fg,
                                         const GraphLayout& layout) const {
    if (func_embeds->rows != fg.num_funcs)
        throw std::invalid_argument("need one embedding per function node");
    const int pairs = static_cast<int>(layout.pair_edge.size());
    const double inv_heads = 1.0 / static_cast<double>(att_.size());

    diff::Value lam = nullptr; // pairs x 1
    diff::Value wts = nullptr; // nonself rows x 1
    for (const AttHead& head : att_) {
        diff::Value q = g.matmul(g.gather_rows(func_embeds, layout.trip_target), head.w2);
        diff::Value k = g.matmul(g.gather_rows(func_embeds, layout.trip_neighbor), head.w3);
        diff::Value score = g.sigmoid(g.matmul(g.concat_cols(q, k), head.w1));

        diff::Value others = g.gather_rows(score, layout.nonself_rows);
        diff::Value self = g.gather_rows(score, layout.self_rows);
        // two-way softmax of the target's own score against the mean of the
        // others; with no others the mean term is zero
        diff::Value head_lam =
            g.sigmoid(g.sub(self, g.segment_mean_rows(others, layout.nonself_pair, pairs)));
        lam = lam ? g.add(lam, head_lam) : head_lam;

        if (cfg_.mode == Mode::Full) {
            diff::Value head_w = g.segment_softmax(others, layout.nonself_pair, pairs);
            wts = wts ? g.add(wts, head_w) : head_w;
        }
    }
    lam = g.scale(lam, inv_heads);
    if (wts) wts = g.scale(wts, inv_heads);

    diff::Value shared_lam = nullptr;
    if (cfg_.mode == Mode::HomoLambda) shared_lam = g.mean(lam);

    TapeHyperParams hp;
    hp.lambda.resize(fg.num_edges);
    hp.weights.resize(fg.num_edges);
    for (int e = 0; e < fg.num_edges; ++e) {
        const int pair = layout.edge_pair[e];
        hp.lambda[e] = shared_lam ? shared_lam : g.element(lam, pair);
        const int deg = fg.degree(fg.edge_var[e]);
        if (deg <= 1) continue;
        hp.weights[e].reserve(deg - 1);
        if (cfg_.mode == Mode::Full) {
            const int off = layout.nonself_offset[pair];
            for (int j = 0; j < deg - 1; ++j)
                hp.weights[e].push_back(g.element(wts, off + j));
        } else {
            diff::Value u = g.scalar(1.0 / static_cast<double>(deg - 1));
            for (int j = 0; j < deg - 1; ++j) hp.weights[e].push_back(u);
        }
    }
    return hp;
}

Model::StepResult Model::step(diff::Graph& g, const EncoderState& state,
                              const TapeMessages& msgs, const FactorGraph& fg,
                              const GraphLayout& layout) const {
    StepResult res;
    res.state = encode_messages(g, state, msgs);
    diff::Value embeds = embed_graph(g, layout, res.state);
    res.hyper = infer_hyperparams(g, embeds, fg, layout);
    return res;
}

Model::StepResult Model::step(diff::Graph& g, const EncoderState& state,
                              const bp::MessageSet& msgs, const FactorGraph& fg,
                              const GraphLayout& layout) const {
    return step(g, state, lift(g, msgs), fg, layout);
}

} // namespace dabp::model
