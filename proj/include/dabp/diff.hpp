#ifndef DABP_DIFF_HPP
#define DABP_DIFF_HPP

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dabp/rng.hpp"

namespace dabp::diff {

// One value in a reverse-mode computation graph. Shapes are (rows, cols),
// row-major; column vectors use cols == 1. Gradient buffers exist only for
// nodes reached by the latest backward sweep.
struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    bool needs_grad = false;
    std::uint64_t visit = 0;
    std::vector<Node*> parents;
    std::function<void(Node&)> backprop;

    std::size_t size() const { return val.size(); }
    double scalar() const { return val[0]; }
};

using Value = Node*;

// Arena-owned dynamic computation graph. Nodes live until clear(); values
// handed out are raw pointers into the arena. Parameter nodes owned by a
// ParameterStore may be used as inputs; they outlive the graph. A graph is
// single-threaded; independent graphs may run on separate threads.
class Graph {
public:
    Value leaf(int rows, int cols, std::vector<double> v, bool needs_grad = false);
    Value constant(int rows, int cols, std::vector<double> v);
    Value scalar(double v);
    Value zeros(int rows, int cols);

    // forward-value copy that blocks gradient flow
    Value detach(Value a);

    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b); // elementwise
    Value scale(Value a, double c);
    Value affine(Value a, double k, double c); // k*a + c elementwise
    Value matmul(Value a, Value b);
    Value dot(Value a, Value b);        // column vectors -> scalar
    Value mul_scalar(Value s, Value a); // s: 1x1
    Value sub_scalar(Value a, Value s); // a - s broadcast

    Value sigmoid(Value a);
    Value tanh(Value a);
    Value exp(Value a);
    Value leaky_relu(Value a, double slope);
    Value softmax(Value a); // column vector -> probability vector

    Value sum(Value a);
    Value mean(Value a);
    // scalar minimum; records the argmin (lowest flat index on ties) and
    // routes the gradient only through it
    Value reduce_min(Value a);

    Value concat_cols(Value a, Value b);
    Value concat_rows(const std::vector<Value>& parts);
    Value repeat_row(Value row, int n);    // 1xN -> nxN
    Value add_rowvec(Value m, Value row);  // broadcast row over rows of m
    Value mul_colvec(Value m, Value col);  // scale row i of m by col[i]

    Value gather_rows(Value m, std::vector<int> idx);
    Value slice_rows(Value m, int first, int count);
    Value element(Value v, int index); // column vector entry -> 1x1

    // stacks column vectors as rows, zero-padded to width
    Value stack_rows_padded(const std::vector<Value>& vecs, int width);

    Value segment_sum_rows(Value m, std::vector<int> seg, int nseg);
    Value segment_mean_rows(Value m, std::vector<int> seg, int nseg); // empty segment -> zero row
    Value segment_softmax(Value scores, std::vector<int> seg, int nseg);

    // function-to-variable min marginal: output k -> min over the other
    // scope positions' joint values of table + sum of their messages.
    // msgs[target] is ignored. Index-taking: gradient flows only to the
    // recorded argmin entries.
    Value min_marginal(const std::vector<double>& table, const std::vector<int>& dims,
                       const std::vector<Value>& msgs, int target);

    // expectation of a dense cost table under independent per-position
    // probability vectors -> scalar
    Value expected_cost(const std::vector<double>& table, const std::vector<int>& dims,
                        const std::vector<Value>& probs);

    // Reverse sweep from a scalar root. Allocates and fills grad for every
    // node reached through needs_grad parents; earlier sweeps' buffers on
    // untouched nodes are left as-is.
    void backward(Value root);

    void clear();
    std::size_t num_nodes() const { return nodes_.size(); }

private:
    Node* make(int rows, int cols);
    std::deque<Node> nodes_;
};

// Named parameter arrays with Adam moment estimates. Parameters are graph
// leaves with stable addresses; they survive Graph::clear().
class ParameterStore {
public:
    Value create(const std::string& name, int rows, int cols, std::vector<double> init);
    // uniform in [-1/sqrt(rows), 1/sqrt(rows)]
    Value create_uniform(const std::string& name, int rows, int cols, Rng& rng);
    Value create_zeros(const std::string& name, int rows, int cols);

    Value find(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const; // insertion order
    long long step() const { return step_; }
    std::size_t total_size() const;

    void zero_grads(); // drops gradient buffers

    // allocates zero gradients for parameters the last backward sweep never
    // reached (their gradient is mathematically zero)
    void fill_missing_grads();

    // Checkpoint layout (little-endian):
    //   magic "DABPPS01" | i64 step | u64 count |
    //   per entry: u32 name length | name bytes | u32 rows | u32 cols |
    //              rows*cols doubles each for value, first moment, second moment
    void save(const std::filesystem::path& path) const;
    // fills an existing store; names and shapes must match
    void load(const std::filesystem::path& path);

    friend void adam_step(ParameterStore& store, double lr, double weight_decay);

private:
    struct Entry {
        std::string name;
        Node node;
        std::vector<double> m;
        std::vector<double> v;
    };
    Entry& entry_at(const std::string& name);
    const Entry& entry_at(const std::string& name) const;

    std::deque<Entry> entries_;
    long long step_ = 0;
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) on the gradients left by
// the latest backward sweep, with weight decay applied as an additive
// grad + wd * theta term. Throws if any parameter is missing its gradient.
// Consumes the gradients and increments the step counter.
void adam_step(ParameterStore& store, double lr, double weight_decay);

} // namespace dabp::diff

#endif
