#ifndef DABP_MODEL_HPP
#define DABP_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dabp/bp.hpp"
#include "dabp/diff.hpp"
#include "dabp/factor_graph.hpp"
#include "dabp/nn.hpp"

namespace dabp::model {

enum class Mode {
    Full,        // per-edge damping factors and neighbor weights
    HeterLambda, // weights fixed uniform, per-edge damping factors
    HomoLambda,  // weights fixed uniform, one shared damping factor (mean)
};

Mode mode_from_name(const std::string& name);

struct ModelConfig {
    int hidden = 8;       // message hidden width q
    int gat_layers = 4;   // G
    int gat_heads = 4;    // heads per GAT layer
    int gat_channels = 8; // output channels per GAT head
    int att_heads = 4;    // K, hyperparameter attention heads
    int att_width = 8;    // query/key projection width
    Mode mode = Mode::Full;
};

// Per-edge message hiddens, one row per directed edge and direction.
struct EncoderState {
    diff::Value h_v2f = nullptr; // r x hidden
    diff::Value h_f2v = nullptr; // r x hidden
};

// BP messages living on the tape: one column vector per edge, per direction.
struct TapeMessages {
    std::vector<diff::Value> v2f;
    std::vector<diff::Value> f2v;
};

// Factor graph augmented with one message node per directed edge: directed
// edges x -> m(x->f) -> f and f -> m(f->x) -> x plus a self-loop per node,
// so attention always has an in-neighbor. Nodes are ordered
// [variables | functions | v2f messages | f2v messages]. Also carries the
// flattened (variable, target, neighbor) index triples the attention module
// scores, grouped by (variable, target) pair in edge order.
struct GraphLayout {
    int num_vars = 0;
    int num_funcs = 0;
    int num_edges = 0;

    int aug_nodes = 0;
    std::vector<int> edge_src;
    std::vector<int> edge_dst;

    // pair p <-> directed v2f edge, variable-major enumeration
    std::vector<int> pair_edge; // pair -> edge id
    std::vector<int> edge_pair; // edge id -> pair

    std::vector<int> trip_target;   // per triple row: target function index
    std::vector<int> trip_neighbor; // per triple row: neighbor function index
    std::vector<int> self_rows;     // per pair: triple row with neighbor == target
    std::vector<int> nonself_rows;  // triple rows with neighbor != target
    std::vector<int> nonself_pair;  // pair id per nonself row
    std::vector<int> nonself_offset; // per pair: first index into nonself rows

    int var_node(int i) const { return i; }
    int func_node(int l) const { return num_vars + l; }
    int v2f_node(int e) const { return num_vars + num_funcs + e; }
    int f2v_node(int e) const { return num_vars + num_funcs + num_edges + e; }
};

GraphLayout build_layout(const FactorGraph& fg);

// Damping factors and neighbor weights as tape values, one scalar node per
// edge (and per non-target neighbor), so the BP update can consume them
// differentiably.
struct TapeHyperParams {
    std::vector<diff::Value> lambda;
    std::vector<std::vector<diff::Value>> weights;

    bp::HyperParams values() const;
};

// The hyperparameter-inference model: two GRUs encode the message history
// per edge, the augmented factor graph is embedded with stacked GAT layers,
// and a multi-head attention block over each variable's neighboring
// function embeddings yields per-edge damping factors and neighbor weights.
class Model {
public:
    Model(const ModelConfig& cfg, int max_domain, std::uint64_t seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const ModelConfig& config() const { return cfg_; }
    int pad_width() const { return pad_; }
    diff::ParameterStore& params() { return store_; }
    const diff::ParameterStore& params() const { return store_; }

    EncoderState initial_state(diff::Graph& g, const FactorGraph& fg) const;

    EncoderState encode_messages(diff::Graph& g, const EncoderState& state,
                                 const TapeMessages& msgs) const;
    EncoderState encode_messages(diff::Graph& g, const EncoderState& state,
                                 const bp::MessageSet& msgs) const;

    // final-layer embeddings of the function nodes (num_funcs x width)
    diff::Value embed_graph(diff::Graph& g, const GraphLayout& layout,
                            const EncoderState& state) const;

    TapeHyperParams infer_hyperparams(diff::Graph& g, diff::Value func_embeds,
                                      const FactorGraph& fg,
                                      const GraphLayout& layout) const;

    struct StepResult {
        TapeHyperParams hyper;
        EncoderState state;
    };
    StepResult step(diff::Graph& g, const EncoderState& state, const TapeMessages& msgs,
                    const FactorGraph& fg, const GraphLayout& layout) const;
    StepResult step(diff::Graph& g, const EncoderState& state, const bp::MessageSet& msgs,
                    const FactorGraph& fg, const GraphLayout& layout) const;

private:
    TapeMessages lift(diff::Graph& g, const bp::MessageSet& msgs) const;

    ModelConfig cfg_;
    int pad_;
    diff::ParameterStore store_;

    nn::GruParams enc_v2f_;
    nn::GruParams enc_f2v_;
    diff::Value var_embed_ = nullptr;  // 1 x hidden
    diff::Value func_embed_ = nullptr; // 1 x hidden
    std::vector<nn::GatLayerParams> gat_;
    struct AttHead {
        diff::Value w1; // 2*att_width x 1
        diff::Value w2; // gat output width x att_width
        diff::Value w3;
    };
    std::vector<AttHead> att_;
};

} // namespace dabp::model

#endif
