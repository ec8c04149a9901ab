#ifndef DABP_NN_HPP
#define DABP_NN_HPP

#include <string>
#include <vector>

#include "dabp/diff.hpp"
#include "dabp/rng.hpp"

namespace dabp::nn {

// Gated recurrent unit with the reset gate applied inside the candidate:
//   z = sigmoid(x Wz + h Uz + bz)
//   r = sigmoid(x Wr + h Ur + br)
//   c = tanh(x Wh + (r . h) Uh + bh)
//   h' = (1 - z) . h + z . c
struct GruParams {
    diff::Value wz, wr, wh; // in x hidden
    diff::Value uz, ur, uh; // hidden x hidden
    diff::Value bz, br, bh; // 1 x hidden
};

GruParams make_gru(diff::ParameterStore& store, const std::string& prefix,
                   int in_width, int hidden, Rng& rng);

// batched over rows: h (n x hidden), x (n x in) -> (n x hidden)
diff::Value gru_cell(diff::Graph& g, const GruParams& p, diff::Value h, diff::Value x);

// One attention head: feature transform plus additive scoring vector over
// the concatenated transformed endpoint features.
struct GatHead {
    diff::Value w; // in x out
    diff::Value a; // 2*out x 1
};

struct GatLayerParams {
    std::vector<GatHead> heads;
};

GatLayerParams make_gat_layer(diff::ParameterStore& store, const std::string& prefix,
                              int in_width, int out_channels, int heads, Rng& rng);

struct GatResult {
    diff::Value out;                      // n x (heads*out) or n x out when averaged
    std::vector<diff::Value> head_alphas; // per head, one weight per edge
};

// Attention over in-neighbors: edge (src -> dst) lets dst attend to src.
// Callers include self-loops in the edge list so every node has at least one
// in-neighbor. Hidden layers concatenate head outputs after the activation;
// with average_heads set (the final layer) head aggregates are averaged
// before a single activation.
GatResult gat_layer(diff::Graph& g, const GatLayerParams& p, diff::Value feats,
                    const std::vector<int>& edge_src, const std::vector<int>& edge_dst,
                    bool average_heads);

// activation slopes: scoring uses the steeper slope as usual for attention
// scores, features the shallow one
inline constexpr double kScoreSlope = 0.2;
inline constexpr double kFeatureSlope = 0.01;

} // namespace dabp::nn

#endif
