#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cfair/errors.hpp"
#include "cfair/mat.hpp"

namespace cfair::ad {

struct Var {
    int id = -1;
};

/// Reverse-mode tape over Mat-valued nodes. Nodes are created in topological
/// order, so backward() is a single reverse sweep. A node's gradient buffer
/// is only allocated when some ancestor is a grad-requiring leaf; everything
/// else is treated as a constant and skipped during the sweep.
class Tape {
public:
    Var leaf(Mat value, bool requires_grad) {
        nodes_.push_back(Node{std::move(value), Mat{}, nullptr, requires_grad, "leaf"});
        if (requires_grad) alloc_grad(static_cast<int>(nodes_.size()) - 1);
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Var constant(Mat value) { return leaf(std::move(value), false); }
    Var constant(double x) { return leaf(Mat::scalar(x), false); }

    const Mat& val(Var v) const { return nodes_[v.id].val; }
    Mat& grad(Var v) { return nodes_[v.id].grad; }
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

    // ---- elementwise binary ops; rhs may be same-shape, 1x1, or a 1xN row
    // broadcast against an MxN lhs ----

    Var add(Var a, Var b) { return binary("add", a, b,
        [](double x, double y) { return x + y; },
        [](double, double, double g) { return g; },
        [](double, double, double g) { return g; }); }

    Var sub(Var a, Var b) { return binary("sub", a, b,
        [](double x, double y) { return x - y; },
        [](double, double, double g) { return g; },
        [](double, double, double g) { return -g; }); }

    Var mul(Var a, Var b) { return binary("mul", a, b,
        [](double x, double y) { return x * y; },
        [](double, double y, double g) { return g * y; },
        [](double x, double, double g) { return g * x; }); }

    Var div(Var a, Var b) { return binary("div", a, b,
        [](double x, double y) { return x / y; },
        [](double, double y, double g) { return g / y; },
        [](double x, double y, double g) { return -g * x / (y * y); }); }

    /// k * a + c, elementwise with scalar constants.
    Var affine(Var a, double k, double c) { return unary("affine", a,
        [k, c](double x) { return k * x + c; },
        [k](double, double) { return k; }); }

    Var neg(Var a) { return affine(a, -1.0, 0.0); }

    // ---- elementwise unary ----

    Var relu(Var a) { return unary("relu", a,
        [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; }); }

    Var sigmoid(Var a) { return unary("sigmoid", a,
        [](double x) { return sigmoid_scalar(x); },
        [](double, double y) { return y * (1.0 - y); }); }

    Var exp_(Var a) { return unary("exp", a,
        [](double x) { return std::exp(x); },
        [](double, double y) { return y; }); }

    Var log_(Var a) { return unary("log", a,
        [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; }); }

    Var square(Var a) { return unary("square", a,
        [](double x) { return x * x; },
        [](double x, double) { return 2.0 * x; }); }

    Var sqrt_(Var a) { return unary("sqrt", a,
        [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; }); }

    /// log(1 + e^x), computed without overflow.
    Var softplus(Var a) { return unary("softplus", a,
        [](double x) { return softplus_scalar(x); },
        [](double x, double) { return sigmoid_scalar(x); }); }

    /// Hard clamp; gradient is zero outside [lo, hi].
    Var clamp(Var a, double lo, double hi) { return unary("clamp", a,
        [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
        [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; }); }

    // ---- affine layer: y = x * W^T + b, x: MxIn, W: OutxIn, b: 1xOut ----

    Var linear(Var x, Var w, Var b) {
        const Mat& xv = nodes_[x.id].val;
        const Mat& wv = nodes_[w.id].val;
        const Mat& bv = nodes_[b.id].val;
        if (xv.cols != wv.cols)
            throw DimensionError("linear: input width " + std::to_string(xv.cols) +
                                 " does not match weight fan-in " + std::to_string(wv.cols));
        if (bv.rows != 1 || bv.cols != wv.rows)
            throw DimensionError("linear: bias shape " + bv.shape_str() + " does not match fan-out " +
                                 std::to_string(wv.rows));
        Mat out(xv.rows, wv.rows);
        for (int i = 0; i < xv.rows; ++i) {
            const double* xr = &xv.v[static_cast<size_t>(i) * xv.cols];
            double* orow = &out.v[static_cast<size_t>(i) * out.cols];
            for (int o = 0; o < wv.rows; ++o) {
                const double* wr = &wv.v[static_cast<size_t>(o) * wv.cols];
                double acc = bv.v[o];
                for (int k = 0; k < xv.cols; ++k) acc += xr[k] * wr[k];
                orow[o] = acc;
            }
        }
        return push("linear", std::move(out), {x, w, b}, [x, w, b](Tape& t, int self) {
            const Mat& g = t.nodes_[self].grad;
            const Mat& xv = t.nodes_[x.id].val;
            const Mat& wv = t.nodes_[w.id].val;
            if (t.nodes_[x.id].needs_grad) {
                Mat& gx = t.nodes_[x.id].grad;
                for (int i = 0; i < xv.rows; ++i)
                    for (int o = 0; o < wv.rows; ++o) {
                        double go = g(i, o);
                        if (go == 0.0) continue;
                        const double* wr = &wv.v[static_cast<size_t>(o) * wv.cols];
                        double* gxr = &gx.v[static_cast<size_t>(i) * gx.cols];
                        for (int k = 0; k < wv.cols; ++k) gxr[k] += go * wr[k];
                    }
            }
            if (t.nodes_[w.id].needs_grad) {
                Mat& gw = t.nodes_[w.id].grad;
                for (int i = 0; i < xv.rows; ++i) {
                    const double* xr = &xv.v[static_cast<size_t>(i) * xv.cols];
                    for (int o = 0; o < wv.rows; ++o) {
                        double go = g(i, o);
                        if (go == 0.0) continue;
                        double* gwr = &gw.v[static_cast<size_t>(o) * gw.cols];
                        for (int k = 0; k < wv.cols; ++k) gwr[k] += go * xr[k];
                    }
                }
            }
            if (t.nodes_[b.id].needs_grad) {
                Mat& gb = t.nodes_[b.id].grad;
                for (int i = 0; i < g.rows; ++i)
                    for (int o = 0; o < g.cols; ++o) gb.v[o] += g(i, o);
            }
        });
    }

    // ---- structure ops ----

    Var concat_cols(Var a, Var b) {
        const Mat& av = nodes_[a.id].val;
        const Mat& bv = nodes_[b.id].val;
        if (av.rows != bv.rows)
            throw DimensionError("concat_cols: row mismatch " + av.shape_str() + " vs " + bv.shape_str());
        Mat out(av.rows, av.cols + bv.cols);
        for (int i = 0; i < av.rows; ++i) {
            for (int j = 0; j < av.cols; ++j) out(i, j) = av(i, j);
            for (int j = 0; j < bv.cols; ++j) out(i, av.cols + j) = bv(i, j);
        }
        return push("concat_cols", std::move(out), {a, b}, [a, b](Tape& t, int self) {
            const Mat& g = t.nodes_[self].grad;
            const Mat& av = t.nodes_[a.id].val;
            if (t.nodes_[a.id].needs_grad) {
                Mat& ga = t.nodes_[a.id].grad;
                for (int i = 0; i < ga.rows; ++i)
                    for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, j);
            }
            if (t.nodes_[b.id].needs_grad) {
                Mat& gb = t.nodes_[b.id].grad;
                for (int i = 0; i < gb.rows; ++i)
                    for (int j = 0; j < gb.cols; ++j) gb(i, j) += g(i, av.cols + j);
            }
        });
    }

    Var slice_cols(Var a, int c0, int c1) {
        const Mat& av = nodes_[a.id].val;
        if (c0 < 0 || c1 > av.cols || c0 >= c1)
            throw DimensionError("slice_cols: [" + std::to_string(c0) + ", " + std::to_string(c1) +
                                 ") out of range for " + av.shape_str());
        Mat out(av.rows, c1 - c0);
        for (int i = 0; i < av.rows; ++i)
            for (int j = c0; j < c1; ++j) out(i, j - c0) = av(i, j);
        return push("slice_cols", std::move(out), {a}, [a, c0](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            const Mat& g = t.nodes_[self].grad;
            Mat& ga = t.nodes_[a.id].grad;
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) ga(i, c0 + j) += g(i, j);
        });
    }

    Var gather_rows(Var a, std::vector<int> idx) {
        const Mat& av = nodes_[a.id].val;
        Mat out(static_cast<int>(idx.size()), av.cols);
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < av.cols; ++j) out(i, j) = av(idx[i], j);
        return push("gather_rows", std::move(out), {a},
                    [a, idx = std::move(idx)](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            const Mat& g = t.nodes_[self].grad;
            Mat& ga = t.nodes_[a.id].grad;
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) ga(idx[i], j) += g(i, j);
        });
    }

    // ---- reductions ----

    Var sum_all(Var a) {
        const Mat& av = nodes_[a.id].val;
        double s = 0.0;
        for (double x : av.v) s += x;
        return push("sum_all", Mat::scalar(s), {a}, [a](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            double g = t.nodes_[self].grad.v[0];
            for (double& x : t.nodes_[a.id].grad.v) x += g;
        });
    }

    Var mean_all(Var a) {
        const Mat& av = nodes_[a.id].val;
        double s = 0.0;
        for (double x : av.v) s += x;
        double inv = 1.0 / av.size();
        return push("mean_all", Mat::scalar(s * inv), {a}, [a, inv](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            double g = t.nodes_[self].grad.v[0] * inv;
            for (double& x : t.nodes_[a.id].grad.v) x += g;
        });
    }

    /// Sum over columns: MxN -> Mx1.
    Var row_sum(Var a) {
        const Mat& av = nodes_[a.id].val;
        Mat out(av.rows, 1);
        for (int i = 0; i < av.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < av.cols; ++j) s += av(i, j);
            out(i, 0) = s;
        }
        return push("row_sum", std::move(out), {a}, [a](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            const Mat& g = t.nodes_[self].grad;
            Mat& ga = t.nodes_[a.id].grad;
            for (int i = 0; i < ga.rows; ++i)
                for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, 0);
        });
    }

    /// Squared Euclidean distances between rows: (MxD, NxD) -> MxN.
    Var pairwise_sqdist(Var a, Var b) {
        const Mat& av = nodes_[a.id].val;
        const Mat& bv = nodes_[b.id].val;
        if (av.cols != bv.cols)
            throw DimensionError("pairwise_sqdist: dim mismatch " + av.shape_str() + " vs " +
                                 bv.shape_str());
        Mat out(av.rows, bv.rows);
        for (int i = 0; i < av.rows; ++i) {
            const double* ar = &av.v[static_cast<size_t>(i) * av.cols];
            for (int j = 0; j < bv.rows; ++j) {
                const double* br = &bv.v[static_cast<size_t>(j) * bv.cols];
                double s = 0.0;
                for (int k = 0; k < av.cols; ++k) {
                    double d = ar[k] - br[k];
                    s += d * d;
                }
                out(i, j) = s;
            }
        }
        return push("pairwise_sqdist", std::move(out), {a, b}, [a, b](Tape& t, int self) {
            const Mat& g = t.nodes_[self].grad;
            const Mat& av = t.nodes_[a.id].val;
            const Mat& bv = t.nodes_[b.id].val;
            bool na = t.nodes_[a.id].needs_grad, nb = t.nodes_[b.id].needs_grad;
            if (!na && !nb) return;
            for (int i = 0; i < av.rows; ++i) {
                const double* ar = &av.v[static_cast<size_t>(i) * av.cols];
                for (int j = 0; j < bv.rows; ++j) {
                    double gij = g(i, j);
                    if (gij == 0.0) continue;
                    const double* br = &bv.v[static_cast<size_t>(j) * bv.cols];
                    for (int k = 0; k < av.cols; ++k) {
                        double d = 2.0 * gij * (ar[k] - br[k]);
                        if (na) t.nodes_[a.id].grad(i, k) += d;
                        if (nb) t.nodes_[b.id].grad(j, k) -= d;
                    }
                }
            }
        });
    }

    /// Backpropagate from a 1x1 loss node. Throws NumericError naming the
    /// first non-finite node if the loss is not finite.
    void backward(Var loss) {
        const Mat& lv = nodes_[loss.id].val;
        if (lv.size() != 1)
            throw DimensionError("backward: loss must be scalar, got " + lv.shape_str());
        if (!std::isfinite(lv.v[0])) throw_first_nonfinite(loss.id);
        if (!nodes_[loss.id].needs_grad) return;
        nodes_[loss.id].grad.v[0] = 1.0;
        for (int i = loss.id; i >= 0; --i) {
            Node& n = nodes_[i];
            if (n.needs_grad && n.back) n.back(*this, i);
        }
    }

    size_t node_count() const { return nodes_.size(); }

    static double sigmoid_scalar(double x) {
        if (x >= 0.0) {
            double e = std::exp(-x);
            return 1.0 / (1.0 + e);
        }
        double e = std::exp(x);
        return e / (1.0 + e);
    }

    static double softplus_scalar(double x) {
        if (x > 30.0) return x;
        if (x < -30.0) return std::exp(x);
        return std::log1p(std::exp(x));
    }

private:
    struct Node {
        Mat val;
        Mat grad;
        std::function<void(Tape&, int)> back;
        bool needs_grad = false;
        const char* op = "";
    };

    void alloc_grad(int id) {
        nodes_[id].grad = Mat(nodes_[id].val.rows, nodes_[id].val.cols);
    }

    Var push(const char* op, Mat&& out, std::initializer_list<Var> inputs,
             std::function<void(Tape&, int)> back) {
        bool ng = false;
        for (Var in : inputs) ng = ng || nodes_[in.id].needs_grad;
        nodes_.push_back(Node{std::move(out), Mat{}, ng ? std::move(back) : nullptr, ng, op});
        int id = static_cast<int>(nodes_.size()) - 1;
        if (ng) alloc_grad(id);
        return Var{id};
    }

    template <class F, class DF>
    Var unary(const char* op, Var a, F f, DF df) {
        const Mat& av = nodes_[a.id].val;
        Mat out(av.rows, av.cols);
        for (int i = 0; i < av.size(); ++i) out.v[i] = f(av.v[i]);
        return push(op, std::move(out), {a}, [a, df](Tape& t, int self) {
            if (!t.nodes_[a.id].needs_grad) return;
            const Mat& g = t.nodes_[self].grad;
            const Mat& av = t.nodes_[a.id].val;
            const Mat& ov = t.nodes_[self].val;
            Mat& ga = t.nodes_[a.id].grad;
            for (int i = 0; i < av.size(); ++i) ga.v[i] += g.v[i] * df(av.v[i], ov.v[i]);
        });
    }

    enum class Bcast { Same, Scalar, Row };

    Bcast bcast_mode(const Mat& a, const Mat& b, const char* op) const {
        if (a.same_shape(b)) return Bcast::Same;
        if (b.rows == 1 && b.cols == 1) return Bcast::Scalar;
        if (b.rows == 1 && b.cols == a.cols) return Bcast::Row;
        throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_str() + " vs " +
                             b.shape_str());
    }

    // f(x, y); dfa/dfb give d(out)/dx and d(out)/dy scaled by upstream g.
    template <class F, class DA, class DB>
    Var binary(const char* op, Var a, Var b, F f, DA dfa, DB dfb) {
        const Mat& av = nodes_[a.id].val;
        const Mat& bv = nodes_[b.id].val;
        Bcast mode = bcast_mode(av, bv, op);
        Mat out(av.rows, av.cols);
        for (int i = 0; i < av.rows; ++i)
            for (int j = 0; j < av.cols; ++j) {
                double y = mode == Bcast::Same ? bv(i, j) : (mode == Bcast::Scalar ? bv.v[0] : bv(0, j));
                out(i, j) = f(av(i, j), y);
            }
        return push(op, std::move(out), {a, b}, [a, b, mode, dfa, dfb](Tape& t, int self) {
            const Mat& g = t.nodes_[self].grad;
            const Mat& av = t.nodes_[a.id].val;
            const Mat& bv = t.nodes_[b.id].val;
            bool na = t.nodes_[a.id].needs_grad, nb = t.nodes_[b.id].needs_grad;
            for (int i = 0; i < av.rows; ++i)
                for (int j = 0; j < av.cols; ++j) {
                    double y = mode == Bcast::Same ? bv(i, j) : (mode == Bcast::Scalar ? bv.v[0] : bv(0, j));
                    double gij = g(i, j);
                    if (gij == 0.0) continue;
                    if (na) t.nodes_[a.id].grad(i, j) += dfa(av(i, j), y, gij);
                    if (nb) {
                        double gb = dfb(av(i, j), y, gij);
                        if (mode == Bcast::Same)
                            t.nodes_[b.id].grad(i, j) += gb;
                        else if (mode == Bcast::Scalar)
                            t.nodes_[b.id].grad.v[0] += gb;
                        else
                            t.nodes_[b.id].grad(0, j) += gb;
                    }
                }
        });
    }

    void throw_first_nonfinite(int upto) {
        for (int i = 0; i <= upto; ++i)
            for (double x : nodes_[i].val.v)
                if (!std::isfinite(x))
                    throw NumericError("non-finite value first appears at node " + std::to_string(i) +
                                       " (op " + nodes_[i].op + ")");
        throw NumericError("non-finite loss");
    }

    std::vector<Node> nodes_;
};

}  // namespace cfair::ad
