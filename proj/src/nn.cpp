#include "dabp/nn.hpp"

#include <stdexcept>

namespace dabp::nn {

GruParams make_gru(diff::ParameterStore& store, const std::string& prefix,
                   int in_width, int hidden, Rng& rng) {
    GruParams p;
    p.wz = store.create_uniform(prefix + "/wz", in_width, hidden, rng);
    p.wr = store.create_uniform(prefix + "/wr", in_width, hidden, rng);
    p.wh = store.create_uniform(prefix + "/wh", in_width, hidden, rng);
    p.uz = store.create_uniform(prefix + "/uz", hidden, hidden, rng);
    p.ur = store.create_uniform(prefix + "/ur", hidden, hidden, rng);
    p.uh = store.create_uniform(prefix + "/uh", hidden, hidden, rng);
    p.bz = store.create_zeros(prefix + "/bz", 1, hidden);
    p.br = store.create_zeros(prefix + "/br", 1, hidden);
    p.bh = store.create_zeros(prefix + "/bh", 1, hidden);
    return p;
}

diff::Value gru_cell(diff::Graph& g, const GruParams& p, diff::Value h, diff::Value x) {
    diff::Value z = g.sigmoid(g.add_rowvec(g.add(g.matmul(x, p.wz), g.matmul(h, p.uz)), p.bz));
    diff::Value r = g.sigmoid(g.add_rowvec(g.add(g.matmul(x, p.wr), g.matmul(h, p.ur)), p.br));
    diff::Value c = g.tanh(
        g.add_rowvec(g.add(g.matmul(x, p.wh), g.matmul(g.mul(r, h), p.uh)), p.bh));
    return g.add(g.mul(g.affine(z, -1.0, 1.0), h), g.mul(z, c));
}

GatLayerParams make_gat_layer(diff::ParameterStore& store, const std::string& prefix,
                              int in_width, int out_channels, int heads, Rng& rng) {
    GatLayerParams p;
    for (int h = 0; h < heads; ++h) {
        GatHead head;
        const std::string hp = prefix + "/h" + std::to_string(h);
        head.w = store.create_uniform(hp + "/w", in_width, out_channels, rng);
        head.a = store.create_uniform(hp + "/a", 2 * out_channels, 1, rng);
        p.heads.push_back(head);
    }
    return p;
}

GatResult gat_layer(diff::Graph& g, const GatLayerParams& p, diff::Value feats,
                    const std::vector<int>& edge_src, const std::vector<int>& edge_dst,
                    bool average_heads) {
    if (edge_src.size() != edge_dst.size())
        throw std::invalid_argument("gat_layer: edge endpoint lists differ in length");
    const int n = feats->rows;

    GatResult res;
    std::vector<diff::Value> aggregates;
    for (const GatHead& head : p.heads) {
        diff::Value wh = g.matmul(feats, head.w);
        diff::Value src = g.gather_rows(wh, edge_src);
        diff::Value dst = g.gather_rows(wh, edge_dst);
        diff::Value score =
            g.leaky_relu(g.matmul(g.concat_cols(dst, src), head.a), kScoreSlope);
        diff::Value alpha = g.segment_softmax(score, edge_dst, n);
        diff::Value agg = g.segment_sum_rows(g.mul_colvec(src, alpha), edge_dst, n);
        res.head_alphas.push_back(alpha);
        aggregates.push_back(agg);
    }

    if (average_heads) {
        diff::Value acc = aggregates[0];
        for (std::size_t h = 1; h < aggregates.size(); ++h)
            acc = g.add(acc, aggregates[h]);
        res.out = g.leaky_relu(g.scale(acc, 1.0 / static_cast<double>(aggregates.size())),
                               kFeatureSlope);
    } else {
        diff::Value acc = nullptr;
        for (diff::Value a : aggregates) {
            diff::Value activated = g.leaky_relu(a, kFeatureSlope);
            acc = acc ? g.concat_cols(acc, activated) : activated;
        }
        res.out = acc;
    }
    return res;
}

} // namespace dabp::nn
