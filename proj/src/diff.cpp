#include "dabp/diff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dabp::diff {

namespace {

std::atomic<std::uint64_t> g_epoch{0};

std::string shape_of(const Node* n) {
    return std::to_string(n->rows) + "x" + std::to_string(n->cols);
}

[[noreturn]] void shape_error(const std::string& op, const Node* a, const Node* b = nullptr) {
    std::string msg = op + ": incompatible shape " + shape_of(a);
    if (b) msg += " vs " + shape_of(b);
    throw std::invalid_argument(msg);
}

// gradient writes are skipped for nodes without a live buffer (constants,
// nodes outside the current sweep)
inline bool live(const Node* n) { return !n->grad.empty(); }

} // namespace

Node* Graph::make(int rows, int cols) {
    Node& n = nodes_.emplace_back();
    n.rows = rows;
    n.cols = cols;
    n.val.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return &n;
}

Value Graph::leaf(int rows, int cols, std::vector<double> v, bool needs_grad) {
    if (v.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("leaf: data has " + std::to_string(v.size()) +
                                    " entries for shape " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    Node* n = make(rows, cols);
    n->val = std::move(v);
    n->needs_grad = needs_grad;
    return n;
}

Value Graph::constant(int rows, int cols, std::vector<double> v) {
    return leaf(rows, cols, std::move(v), false);
}

Value Graph::scalar(double v) { return leaf(1, 1, {v}, false); }

Value Graph::zeros(int rows, int cols) {
    Node* n = make(rows, cols);
    return n;
}

Value Graph::detach(Value a) {
    Node* n = make(a->rows, a->cols);
    n->val = a->val;
    return n;
}

namespace {

// wires parents and the closure only when gradient can actually flow
template <typename F>
void attach(Node* out, std::vector<Node*> parents, F&& fn) {
    bool ng = false;
    for (Node* p : parents) ng = ng || p->needs_grad;
    if (!ng) return;
    out->needs_grad = true;
    out->parents = std::move(parents);
    out->backprop = std::forward<F>(fn);
}

} // namespace

// ---------------------------------------------------------------------------
// elementwise and linear ops
// ---------------------------------------------------------------------------

Value Graph::add(Value a, Value b) {
    if (a->rows != b->rows || a->cols != b->cols) shape_error("add", a, b);
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = a->val[i] + b->val[i];
    attach(n, {a, b}, [a, b](Node& out) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (live(a)) a->grad[i] += out.grad[i];
            if (live(b)) b->grad[i] += out.grad[i];
        }
    });
    return n;
}

Value Graph::sub(Value a, Value b) {
    if (a->rows != b->rows || a->cols != b->cols) shape_error("sub", a, b);
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = a->val[i] - b->val[i];
    attach(n, {a, b}, [a, b](Node& out) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (live(a)) a->grad[i] += out.grad[i];
            if (live(b)) b->grad[i] -= out.grad[i];
        }
    });
    return n;
}

Value Graph::mul(Value a, Value b) {
    if (a->rows != b->rows || a->cols != b->cols) shape_error("mul", a, b);
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = a->val[i] * b->val[i];
    attach(n, {a, b}, [a, b](Node& out) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (live(a)) a->grad[i] += out.grad[i] * b->val[i];
            if (live(b)) b->grad[i] += out.grad[i] * a->val[i];
        }
    });
    return n;
}

Value Graph::scale(Value a, double c) { return affine(a, c, 0.0); }

Value Graph::affine(Value a, double k, double c) {
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = k * a->val[i] + c;
    attach(n, {a}, [a, k](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < out.size(); ++i) a->grad[i] += k * out.grad[i];
    });
    return n;
}

Value Graph::matmul(Value a, Value b) {
    if (a->cols != b->rows) shape_error("matmul", a, b);
    const int m = a->rows, k = a->cols, p = b->cols;
    Node* n = make(m, p);
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < k; ++t) {
            const double av = a->val[static_cast<std::size_t>(i) * k + t];
            if (av == 0.0) continue;
            for (int j = 0; j < p; ++j)
                n->val[static_cast<std::size_t>(i) * p + j] +=
                    av * b->val[static_cast<std::size_t>(t) * p + j];
        }
    attach(n, {a, b}, [a, b, m, k, p](Node& out) {
        if (live(a)) {
            for (int i = 0; i < m; ++i)
                for (int t = 0; t < k; ++t) {
                    double g = 0.0;
                    for (int j = 0; j < p; ++j)
                        g += out.grad[static_cast<std::size_t>(i) * p + j] *
                             b->val[static_cast<std::size_t>(t) * p + j];
                    a->grad[static_cast<std::size_t>(i) * k + t] += g;
                }
        }
        if (live(b)) {
            for (int t = 0; t < k; ++t)
                for (int j = 0; j < p; ++j) {
                    double g = 0.0;
                    for (int i = 0; i < m; ++i)
                        g += a->val[static_cast<std::size_t>(i) * k + t] *
                             out.grad[static_cast<std::size_t>(i) * p + j];
                    b->grad[static_cast<std::size_t>(t) * p + j] += g;
                }
        }
    });
    return n;
}

Value Graph::dot(Value a, Value b) {
    if (a->cols != 1 || b->cols != 1 || a->rows != b->rows) shape_error("dot", a, b);
    Node* n = make(1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i) s += a->val[i] * b->val[i];
    n->val[0] = s;
    attach(n, {a, b}, [a, b](Node& out) {
        const double g = out.grad[0];
        for (std::size_t i = 0; i < a->size(); ++i) {
            if (live(a)) a->grad[i] += g * b->val[i];
            if (live(b)) b->grad[i] += g * a->val[i];
        }
    });
    return n;
}

Value Graph::mul_scalar(Value s, Value a) {
    if (s->size() != 1) shape_error("mul_scalar", s);
    Node* n = make(a->rows, a->cols);
    const double sv = s->val[0];
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = sv * a->val[i];
    attach(n, {s, a}, [s, a](Node& out) {
        if (live(s)) {
            double g = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) g += out.grad[i] * a->val[i];
            s->grad[0] += g;
        }
        if (live(a)) {
            const double sv = s->val[0];
            for (std::size_t i = 0; i < out.size(); ++i) a->grad[i] += sv * out.grad[i];
        }
    });
    return n;
}

Value Graph::sub_scalar(Value a, Value s) {
    if (s->size() != 1) shape_error("sub_scalar", s);
    Node* n = make(a->rows, a->cols);
    const double sv = s->val[0];
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = a->val[i] - sv;
    attach(n, {a, s}, [a, s](Node& out) {
        double g = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (live(a)) a->grad[i] += out.grad[i];
            g += out.grad[i];
        }
        if (live(s)) s->grad[0] -= g;
    });
    return n;
}

// ---------------------------------------------------------------------------
// nonlinearities
// ---------------------------------------------------------------------------

Value Graph::sigmoid(Value a) {
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i)
        n->val[i] = 1.0 / (1.0 + std::exp(-a->val[i]));
    attach(n, {a}, [a](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double y = out.val[i];
            a->grad[i] += out.grad[i] * y * (1.0 - y);
        }
    });
    return n;
}

Value Graph::tanh(Value a) {
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = std::tanh(a->val[i]);
    attach(n, {a}, [a](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double y = out.val[i];
            a->grad[i] += out.grad[i] * (1.0 - y * y);
        }
    });
    return n;
}

Value Graph::exp(Value a) {
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) n->val[i] = std::exp(a->val[i]);
    attach(n, {a}, [a](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < out.size(); ++i)
            a->grad[i] += out.grad[i] * out.val[i];
    });
    return n;
}

Value Graph::leaky_relu(Value a, double slope) {
    Node* n = make(a->rows, a->cols);
    for (std::size_t i = 0; i < n->size(); ++i) {
        const double x = a->val[i];
        n->val[i] = x >= 0.0 ? x : slope * x;
    }
    attach(n, {a}, [a, slope](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < out.size(); ++i)
            a->grad[i] += out.grad[i] * (a->val[i] >= 0.0 ? 1.0 : slope);
    });
    return n;
}

Value Graph::softmax(Value a) {
    if (a->cols != 1) shape_error("softmax", a);
    Node* n = make(a->rows, 1);
    const double mx = *std::max_element(a->val.begin(), a->val.end());
    double denom = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i) {
        n->val[i] = std::exp(a->val[i] - mx);
        denom += n->val[i];
    }
    for (double& x : n->val) x /= denom;
    attach(n, {a}, [a](Node& out) {
        if (!live(a)) return;
        double dot = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) dot += out.grad[i] * out.val[i];
        for (std::size_t i = 0; i < out.size(); ++i)
            a->grad[i] += out.val[i] * (out.grad[i] - dot);
    });
    return n;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Value Graph::sum(Value a) {
    Node* n = make(1, 1);
    double s = 0.0;
    for (double x : a->val) s += x;
    n->val[0] = s;
    attach(n, {a}, [a](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += out.grad[0];
    });
    return n;
}

Value Graph::mean(Value a) {
    if (a->size() == 0) throw std::invalid_argument("mean of empty value");
    Node* n = make(1, 1);
    double s = 0.0;
    for (double x : a->val) s += x;
    const double inv = 1.0 / static_cast<double>(a->size());
    n->val[0] = s * inv;
    attach(n, {a}, [a, inv](Node& out) {
        if (!live(a)) return;
        for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += inv * out.grad[0];
    });
    return n;
}

Value Graph::reduce_min(Value a) {
    if (a->size() == 0) throw std::invalid_argument("reduce_min of empty value");
    Node* n = make(1, 1);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < a->size(); ++i)
        if (a->val[i] < a->val[arg]) arg = i;
    n->val[0] = a->val[arg];
    attach(n, {a}, [a, arg](Node& out) {
        if (live(a)) a->grad[arg] += out.grad[0];
    });
    return n;
}

// ---------------------------------------------------------------------------
// structure ops
// ---------------------------------------------------------------------------

Value Graph::concat_cols(Value a, Value b) {
    if (a->rows != b->rows) shape_error("concat_cols", a, b);
    Node* n = make(a->rows, a->cols + b->cols);
    for (int i = 0; i < a->rows; ++i) {
        std::copy_n(a->val.begin() + static_cast<std::size_t>(i) * a->cols, a->cols,
                    n->val.begin() + static_cast<std::size_t>(i) * n->cols);
        std::copy_n(b->val.begin() + static_cast<std::size_t>(i) * b->cols, b->cols,
                    n->val.begin() + static_cast<std::size_t>(i) * n->cols + a->cols);
    }
    attach(n, {a, b}, [a, b](Node& out) {
        for (int i = 0; i < a->rows; ++i)
            for (int j = 0; j < out.cols; ++j) {
                const double g = out.grad[static_cast<std::size_t>(i) * out.cols + j];
                if (j < a->cols) {
                    if (live(a)) a->grad[static_cast<std::size_t>(i) * a->cols + j] += g;
                } else if (live(b)) {
                    b->grad[static_cast<std::size_t>(i) * b->cols + (j - a->cols)] += g;
                }
            }
    });
    return n;
}

Value Graph::concat_rows(const std::vector<Value>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    const int cols = parts[0]->cols;
    int rows = 0;
    for (Value p : parts) {
        if (p->cols != cols) shape_error("concat_rows", parts[0], p);
        rows += p->rows;
    }
    Node* n = make(rows, cols);
    std::size_t off = 0;
    for (Value p : parts) {
        std::copy(p->val.begin(), p->val.end(), n->val.begin() + off);
        off += p->size();
    }
    std::vector<Node*> parents(parts.begin(), parts.end());
    attach(n, parents, [parts](Node& out) {
        std::size_t off = 0;
        for (Node* p : parts) {
            if (live(p))
                for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += out.grad[off + i];
            off += p->size();
        }
    });
    return n;
}

Value Graph::repeat_row(Value row, int n_rows) {
    if (row->rows != 1) shape_error("repeat_row", row);
    Node* n = make(n_rows, row->cols);
    for (int i = 0; i < n_rows; ++i)
        std::copy(row->val.begin(), row->val.end(),
                  n->val.begin() + static_cast<std::size_t>(i) * row->cols);
    attach(n, {row}, [row, n_rows](Node& out) {
        if (!live(row)) return;
        for (int i = 0; i < n_rows; ++i)
            for (int j = 0; j < row->cols; ++j)
                row->grad[j] += out.grad[static_cast<std::size_t>(i) * row->cols + j];
    });
    return n;
}

Value Graph::add_rowvec(Value m, Value row) {
    if (row->rows != 1 || row->cols != m->cols) shape_error("add_rowvec", m, row);
    Node* n = make(m->rows, m->cols);
    for (int i = 0; i < m->rows; ++i)
        for (int j = 0; j < m->cols; ++j)
            n->val[static_cast<std::size_t>(i) * m->cols + j] =
                m->val[static_cast<std::size_t>(i) * m->cols + j] + row->val[j];
    attach(n, {m, row}, [m, row](Node& out) {
        for (int i = 0; i < m->rows; ++i)
            for (int j = 0; j < m->cols; ++j) {
                const double g = out.grad[static_cast<std::size_t>(i) * m->cols + j];
                if (live(m)) m->grad[static_cast<std::size_t>(i) * m->cols + j] += g;
                if (live(row)) row->grad[j] += g;
            }
    });
    return n;
}

Value Graph::mul_colvec(Value m, Value col) {
    if (col->cols != 1 || col->rows != m->rows) shape_error("mul_colvec", m, col);
    Node* n = make(m->rows, m->cols);
    for (int i = 0; i < m->rows; ++i) {
        const double c = col->val[i];
        for (int j = 0; j < m->cols; ++j)
            n->val[static_cast<std::size_t>(i) * m->cols + j] =
                c * m->val[static_cast<std::size_t>(i) * m->cols + j];
    }
    attach(n, {m, col}, [m, col](Node& out) {
        for (int i = 0; i < m->rows; ++i) {
            double gc = 0.0;
            for (int j = 0; j < m->cols; ++j) {
                const std::size_t at = static_cast<std::size_t>(i) * m->cols + j;
                if (live(m)) m->grad[at] += col->val[i] * out.grad[at];
                gc += out.grad[at] * m->val[at];
            }
            if (live(col)) col->grad[i] += gc;
        }
    });
    return n;
}

Value Graph::gather_rows(Value m, std::vector<int> idx) {
    for (int i : idx)
        if (i < 0 || i >= m->rows)
            throw std::invalid_argument("gather_rows: index " + std::to_string(i) +
                                        " out of " + std::to_string(m->rows) + " rows");
    Node* n = make(static_cast<int>(idx.size()), m->cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(m->val.begin() + static_cast<std::size_t>(idx[r]) * m->cols, m->cols,
                    n->val.begin() + r * m->cols);
    attach(n, {m}, [m, idx = std::move(idx)](Node& out) {
        if (!live(m)) return;
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < m->cols; ++j)
                m->grad[static_cast<std::size_t>(idx[r]) * m->cols + j] +=
                    out.grad[r * m->cols + j];
    });
    return n;
}

Value Graph::slice_rows(Value m, int first, int count) {
    if (first < 0 || count < 0 || first + count > m->rows)
        throw std::invalid_argument("slice_rows: range [" + std::to_string(first) + ", " +
                                    std::to_string(first + count) + ") out of " +
                                    std::to_string(m->rows) + " rows");
    Node* n = make(count, m->cols);
    std::copy_n(m->val.begin() + static_cast<std::size_t>(first) * m->cols,
                static_cast<std::size_t>(count) * m->cols, n->val.begin());
    attach(n, {m}, [m, first](Node& out) {
        if (!live(m)) return;
        const std::size_t base = static_cast<std::size_t>(first) * m->cols;
        for (std::size_t i = 0; i < out.size(); ++i) m->grad[base + i] += out.grad[i];
    });
    return n;
}

Value Graph::element(Value v, int index) {
    if (v->cols != 1) shape_error("element", v);
    if (index < 0 || index >= v->rows)
        throw std::invalid_argument("element: index " + std::to_string(index) +
                                    " out of " + std::to_string(v->rows));
    Node* n = make(1, 1);
    n->val[0] = v->val[index];
    attach(n, {v}, [v, index](Node& out) {
        if (live(v)) v->grad[index] += out.grad[0];
    });
    return n;
}

Value Graph::stack_rows_padded(const std::vector<Value>& vecs, int width) {
    for (Value v : vecs) {
        if (v->cols != 1) shape_error("stack_rows_padded", v);
        if (v->rows > width)
            throw std::invalid_argument("stack_rows_padded: vector longer than width");
    }
    Node* n = make(static_cast<int>(vecs.size()), width);
    for (std::size_t r = 0; r < vecs.size(); ++r)
        std::copy(vecs[r]->val.begin(), vecs[r]->val.end(),
                  n->val.begin() + r * width);
    std::vector<Node*> parents(vecs.begin(), vecs.end());
    attach(n, parents, [vecs, width](Node& out) {
        for (std::size_t r = 0; r < vecs.size(); ++r) {
            Node* v = vecs[r];
            if (!live(v)) continue;
            for (int k = 0; k < v->rows; ++k)
                v->grad[k] += out.grad[r * width + k];
        }
    });
    return n;
}

// ---------------------------------------------------------------------------
// segment ops
// ---------------------------------------------------------------------------

namespace {

void check_segments(const Node* m, const std::vector<int>& seg, int nseg, const char* op) {
    if (static_cast<int>(seg.size()) != m->rows)
        throw std::invalid_argument(std::string(op) + ": need one segment id per row");
    for (int s : seg)
        if (s < 0 || s >= nseg)
            throw std::invalid_argument(std::string(op) + ": segment id out of range");
}

} // namespace

Value Graph::segment_sum_rows(Value m, std::vector<int> seg, int nseg) {
    check_segments(m, seg, nseg, "segment_sum_rows");
    Node* n = make(nseg, m->cols);
    for (int i = 0; i < m->rows; ++i)
        for (int j = 0; j < m->cols; ++j)
            n->val[static_cast<std::size_t>(seg[i]) * m->cols + j] +=
                m->val[static_cast<std::size_t>(i) * m->cols + j];
    attach(n, {m}, [m, seg = std::move(seg)](Node& out) {
        if (!live(m)) return;
        for (int i = 0; i < m->rows; ++i)
            for (int j = 0; j < m->cols; ++j)
                m->grad[static_cast<std::size_t>(i) * m->cols + j] +=
                    out.grad[static_cast<std::size_t>(seg[i]) * m->cols + j];
    });
    return n;
}

Value Graph::segment_mean_rows(Value m, std::vector<int> seg, int nseg) {
    check_segments(m, seg, nseg, "segment_mean_rows");
    std::vector<int> count(nseg, 0);
    for (int s : seg) ++count[s];
    Node* n = make(nseg, m->cols);
    for (int i = 0; i < m->rows; ++i)
        for (int j = 0; j < m->cols; ++j)
            n->val[static_cast<std::size_t>(seg[i]) * m->cols + j] +=
                m->val[static_cast<std::size_t>(i) * m->cols + j];
    for (int s = 0; s < nseg; ++s) {
        if (count[s] == 0) continue;
        for (int j = 0; j < m->cols; ++j)
            n->val[static_cast<std::size_t>(s) * m->cols + j] /= count[s];
    }
    attach(n, {m}, [m, seg = std::move(seg), count = std::move(count)](Node& out) {
        if (!live(m)) return;
        for (int i = 0; i < m->rows; ++i)
            for (int j = 0; j < m->cols; ++j)
                m->grad[static_cast<std::size_t>(i) * m->cols + j] +=
                    out.grad[static_cast<std::size_t>(seg[i]) * m->cols + j] /
                    count[seg[i]];
    });
    return n;
}

Value Graph::segment_softmax(Value scores, std::vector<int> seg, int nseg) {
    if (scores->cols != 1) shape_error("segment_softmax", scores);
    check_segments(scores, seg, nseg, "segment_softmax");
    Node* n = make(scores->rows, 1);
    std::vector<double> mx(nseg, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < scores->rows; ++i)
        mx[seg[i]] = std::max(mx[seg[i]], scores->val[i]);
    std::vector<double> denom(nseg, 0.0);
    for (int i = 0; i < scores->rows; ++i) {
        n->val[i] = std::exp(scores->val[i] - mx[seg[i]]);
        denom[seg[i]] += n->val[i];
    }
    for (int i = 0; i < scores->rows; ++i) n->val[i] /= denom[seg[i]];
    attach(n, {scores}, [scores, seg = std::move(seg), nseg](Node& out) {
        if (!live(scores)) return;
        std::vector<double> dot(nseg, 0.0);
        for (int i = 0; i < out.rows; ++i) dot[seg[i]] += out.grad[i] * out.val[i];
        for (int i = 0; i < out.rows; ++i)
            scores->grad[i] += out.val[i] * (out.grad[i] - dot[seg[i]]);
    });
    return n;
}

// ---------------------------------------------------------------------------
// factor-table ops
// ---------------------------------------------------------------------------

Value Graph::min_marginal(const std::vector<double>& table, const std::vector<int>& dims,
                          const std::vector<Value>& msgs, int target) {
    const int arity = static_cast<int>(dims.size());
    if (target < 0 || target >= arity)
        throw std::invalid_argument("min_marginal: bad target position");
    if (static_cast<int>(msgs.size()) != arity)
        throw std::invalid_argument("min_marginal: need one message per scope position");
    std::size_t cells = 1;
    for (int p = 0; p < arity; ++p) {
        cells *= static_cast<std::size_t>(dims[p]);
        if (p != target && (msgs[p]->cols != 1 || msgs[p]->rows != dims[p]))
            shape_error("min_marginal", msgs[p]);
    }
    if (table.size() != cells)
        throw std::invalid_argument("min_marginal: table size mismatch");

    Node* n = make(dims[target], 1);
    std::vector<std::size_t> argmin(dims[target]);
    std::vector<double> best(dims[target], std::numeric_limits<double>::infinity());
    std::vector<int> idx(arity, 0);
    for (std::size_t c = 0; c < cells; ++c) {
        double v = table[c];
        for (int p = 0; p < arity; ++p)
            if (p != target) v += msgs[p]->val[idx[p]];
        const int t = idx[target];
        if (v < best[t]) {
            best[t] = v;
            argmin[t] = c;
        }
        for (int p = arity - 1; p >= 0; --p) {
            if (++idx[p] < dims[p]) break;
            idx[p] = 0;
        }
    }
    n->val.assign(best.begin(), best.end());

    std::vector<Node*> parents;
    for (int p = 0; p < arity; ++p)
        if (p != target) parents.push_back(msgs[p]);
    attach(n, parents,
           [msgs, dims, target, argmin = std::move(argmin), arity](Node& out) {
               for (int t = 0; t < out.rows; ++t) {
                   const double g = out.grad[t];
                   if (g == 0.0) continue;
                   std::size_t rest = argmin[t];
                   for (int p = arity - 1; p >= 0; --p) {
                       const int v = static_cast<int>(rest % dims[p]);
                       rest /= dims[p];
                       if (p != target && live(msgs[p])) msgs[p]->grad[v] += g;
                   }
               }
           });
    return n;
}

Value Graph::expected_cost(const std::vector<double>& table, const std::vector<int>& dims,
                           const std::vector<Value>& probs) {
    const int arity = static_cast<int>(dims.size());
    if (static_cast<int>(probs.size()) != arity)
        throw std::invalid_argument("expected_cost: need one probability vector per position");
    std::size_t cells = 1;
    for (int p = 0; p < arity; ++p) {
        cells *= static_cast<std::size_t>(dims[p]);
        if (probs[p]->cols != 1 || probs[p]->rows != dims[p]) shape_error("expected_cost", probs[p]);
    }
    if (table.size() != cells)
        throw std::invalid_argument("expected_cost: table size mismatch");

    Node* n = make(1, 1);
    std::vector<int> idx(arity, 0);
    double total = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        double prod = 1.0;
        for (int p = 0; p < arity; ++p) prod *= probs[p]->val[idx[p]];
        total += table[c] * prod;
        for (int p = arity - 1; p >= 0; --p) {
            if (++idx[p] < dims[p]) break;
            idx[p] = 0;
        }
    }
    n->val[0] = total;

    std::vector<Node*> parents(probs.begin(), probs.end());
    attach(n, parents, [probs, dims, table, arity, cells](Node& out) {
        const double g = out.grad[0];
        if (g == 0.0) return;
        std::vector<int> idx(arity, 0);
        for (std::size_t c = 0; c < cells; ++c) {
            for (int p = 0; p < arity; ++p) {
                if (!live(probs[p])) continue;
                double prod = table[c];
                for (int q = 0; q < arity; ++q)
                    if (q != p) prod *= probs[q]->val[idx[q]];
                probs[p]->grad[idx[p]] += g * prod;
            }
            for (int p = arity - 1; p >= 0; --p) {
                if (++idx[p] < dims[p]) break;
                idx[p] = 0;
            }
        }
    });
    return n;
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

void Graph::backward(Value root) {
    if (root->size() != 1)
        throw std::invalid_argument("backward: root must be scalar, got " + shape_of(root));

    const std::uint64_t epoch = ++g_epoch;
    std::vector<Node*> order;
    std::vector<std::pair<Node*, std::size_t>> stack;
    root->visit = epoch;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++];
            if (p->needs_grad && p->visit != epoch) {
                p->visit = epoch;
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* n : order) n->grad.assign(n->size(), 0.0);
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

void Graph::clear() { nodes_.clear(); }

// ---------------------------------------------------------------------------
// ParameterStore
// ---------------------------------------------------------------------------

Value ParameterStore::create(const std::string& name, int rows, int cols,
                             std::vector<double> init) {
    if (contains(name))
        throw std::invalid_argument("parameter already exists: " + name);
    if (init.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("parameter " + name + ": bad initializer size");
    Entry& e = entries_.emplace_back();
    e.name = name;
    e.node.rows = rows;
    e.node.cols = cols;
    e.node.val = std::move(init);
    e.node.needs_grad = true;
    e.m.assign(e.node.size(), 0.0);
    e.v.assign(e.node.size(), 0.0);
    return &e.node;
}

Value ParameterStore::create_uniform(const std::string& name, int rows, int cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::vector<double> init(static_cast<std::size_t>(rows) * cols);
    for (double& x : init) x = rng.uniform(-bound, bound);
    return create(name, rows, cols, std::move(init));
}

Value ParameterStore::create_zeros(const std::string& name, int rows, int cols) {
    return create(name, rows, cols,
                  std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0));
}

ParameterStore::Entry& ParameterStore::entry_at(const std::string& name) {
    for (Entry& e : entries_)
        if (e.name == name) return e;
    throw std::invalid_argument("no such parameter: " + name);
}

const ParameterStore::Entry& ParameterStore::entry_at(const std::string& name) const {
    for (const Entry& e : entries_)
        if (e.name == name) return e;
    throw std::invalid_argument("no such parameter: " + name);
}

Value ParameterStore::find(const std::string& name) const {
    return const_cast<Node*>(&entry_at(name).node);
}

bool ParameterStore::contains(const std::string& name) const {
    for (const Entry& e : entries_)
        if (e.name == name) return true;
    return false;
}

std::vector<std::string> ParameterStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.name);
    return out;
}

std::size_t ParameterStore::total_size() const {
    std::size_t s = 0;
    for (const Entry& e : entries_) s += e.node.size();
    return s;
}

void ParameterStore::zero_grads() {
    for (Entry& e : entries_) e.node.grad.clear();
}

void ParameterStore::fill_missing_grads() {
    for (Entry& e : entries_)
        if (e.node.grad.size() != e.node.size()) e.node.grad.assign(e.node.size(), 0.0);
}

void adam_step(ParameterStore& store, double lr, double weight_decay) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    for (const auto& e : store.entries_)
        if (e.node.grad.size() != e.node.size())
            throw std::runtime_error("adam_step: missing gradient for " + e.name);

    store.step_ += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(store.step_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(store.step_));
    for (auto& e : store.entries_) {
        for (std::size_t i = 0; i < e.node.size(); ++i) {
            const double g = e.node.grad[i] + weight_decay * e.node.val[i];
            e.m[i] = beta1 * e.m[i] + (1.0 - beta1) * g;
            e.v[i] = beta2 * e.v[i] + (1.0 - beta2) * g * g;
            const double mhat = e.m[i] / bc1;
            const double vhat = e.v[i] / bc2;
            e.node.val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        e.node.grad.clear();
    }
}

// ---------------------------------------------------------------------------
// checkpointing
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'A', 'B', 'P', 'P', 'S', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

} // namespace

void ParameterStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, static_cast<std::int64_t>(step_));
    write_raw(out, static_cast<std::uint64_t>(entries_.size()));
    for (const Entry& e : entries_) {
        write_raw(out, static_cast<std::uint32_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        write_raw(out, static_cast<std::uint32_t>(e.node.rows));
        write_raw(out, static_cast<std::uint32_t>(e.node.cols));
        write_doubles(out, e.node.val);
        write_doubles(out, e.m);
        write_doubles(out, e.v);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void ParameterStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(path.string() + ": not a parameter checkpoint");
    std::int64_t step;
    std::uint64_t count;
    read_raw(in, step);
    read_raw(in, count);
    if (count != entries_.size())
        throw std::runtime_error("checkpoint holds " + std::to_string(count) +
                                 " parameters, store has " +
                                 std::to_string(entries_.size()));
    for (Entry& e : entries_) {
        std::uint32_t name_len, rows, cols;
        read_raw(in, name_len);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        read_raw(in, rows);
        read_raw(in, cols);
        if (name != e.name || static_cast<int>(rows) != e.node.rows ||
            static_cast<int>(cols) != e.node.cols)
            throw std::runtime_error("checkpoint entry " + name +
                                     " does not match parameter " + e.name);
        read_doubles(in, e.node.val);
        read_doubles(in, e.m);
        read_doubles(in, e.v);
    }
    step_ = step;
}

} // namespace dabp::diff
