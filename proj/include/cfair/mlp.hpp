#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cfair/errors.hpp"
#include "cfair/mat.hpp"
#include "cfair/rng.hpp"
#include "cfair/tape.hpp"

namespace cfair {

enum class OutputActivation { Linear, Sigmoid };

/// Fully connected network description: layer_widths runs input-first,
/// hidden layers use ReLU, the output layer uses `out_act`.
struct MlpSpec {
    std::vector<int> layer_widths;
    OutputActivation out_act = OutputActivation::Linear;

    MlpSpec() = default;
    MlpSpec(std::vector<int> widths, OutputActivation act = OutputActivation::Linear)
        : layer_widths(std::move(widths)), out_act(act) {
        validate();
    }

    static MlpSpec make(int in, const std::vector<int>& hidden, int out,
                        OutputActivation act = OutputActivation::Linear) {
        std::vector<int> w;
        w.push_back(in);
        for (int h : hidden) w.push_back(h);
        w.push_back(out);
        return MlpSpec(std::move(w), act);
    }

    void validate() const {
        if (layer_widths.size() < 2)
            throw ConfigError("MlpSpec needs at least input and output widths");
        for (int w : layer_widths)
            if (w < 1) throw ConfigError("MlpSpec widths must be >= 1");
    }

    int input_width() const { return layer_widths.front(); }
    int output_width() const { return layer_widths.back(); }
    int layer_count() const { return static_cast<int>(layer_widths.size()) - 1; }
};

/// Layer parameters, stored as [W0, b0, W1, b1, ...] with Wk of shape
/// (out_k x in_k) and bk a 1 x out_k row.
using ParamSet = std::vector<Mat>;

inline ParamSet init_params(const MlpSpec& spec, Rng& rng) {
    ParamSet p;
    for (int l = 0; l < spec.layer_count(); ++l) {
        int fan_in = spec.layer_widths[l];
        int fan_out = spec.layer_widths[l + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (double& x : w.v) x = rng.uniform(-bound, bound);
        p.push_back(std::move(w));
        p.emplace_back(1, fan_out);  // zero bias
    }
    return p;
}

inline void check_params(const MlpSpec& spec, const ParamSet& params) {
    if (static_cast<int>(params.size()) != 2 * spec.layer_count())
        throw DimensionError("ParamSet has " + std::to_string(params.size()) + " arrays, spec needs " +
                             std::to_string(2 * spec.layer_count()));
    for (int l = 0; l < spec.layer_count(); ++l) {
        const Mat& w = params[2 * l];
        const Mat& b = params[2 * l + 1];
        if (w.rows != spec.layer_widths[l + 1] || w.cols != spec.layer_widths[l])
            throw DimensionError("layer " + std::to_string(l) + ": weight shape " + w.shape_str() +
                                     " does not match spec " + std::to_string(spec.layer_widths[l + 1]) +
                                     "x" + std::to_string(spec.layer_widths[l]),
                                 l);
        if (b.rows != 1 || b.cols != spec.layer_widths[l + 1])
            throw DimensionError("layer " + std::to_string(l) + ": bias shape " + b.shape_str(), l);
        if (!w.all_finite() || !b.all_finite())
            throw NumericError("layer " + std::to_string(l) + ": non-finite parameter entry");
    }
}

/// Plain (non-differentiable) forward pass over a batch: input is MxIn,
/// result MxOut.
inline Mat mlp_forward(const MlpSpec& spec, const ParamSet& params, const Mat& input) {
    check_params(spec, params);
    if (input.cols != spec.input_width())
        throw DimensionError("layer 0: input width " + std::to_string(input.cols) + ", spec expects " +
                                 std::to_string(spec.input_width()),
                             0);
    Mat cur = input;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const Mat& w = params[2 * l];
        const Mat& b = params[2 * l + 1];
        Mat next(cur.rows, w.rows);
        for (int i = 0; i < cur.rows; ++i)
            for (int o = 0; o < w.rows; ++o) {
                double acc = b.v[o];
                const double* xr = &cur.v[static_cast<size_t>(i) * cur.cols];
                const double* wr = &w.v[static_cast<size_t>(o) * w.cols];
                for (int k = 0; k < cur.cols; ++k) acc += xr[k] * wr[k];
                next(i, o) = acc;
            }
        bool last = (l == spec.layer_count() - 1);
        if (!last) {
            for (double& x : next.v) x = x > 0.0 ? x : 0.0;
        } else if (spec.out_act == OutputActivation::Sigmoid) {
            for (double& x : next.v) x = ad::Tape::sigmoid_scalar(x);
        }
        cur = std::move(next);
    }
    return cur;
}

inline std::vector<double> mlp_forward_one(const MlpSpec& spec, const ParamSet& params,
                                           const std::vector<double>& input) {
    return mlp_forward(spec, params, Mat::row(input)).v;
}

/// Differentiable forward pass; `params` are tape leaves in ParamSet order.
inline ad::Var mlp_apply(ad::Tape& t, const MlpSpec& spec, const std::vector<ad::Var>& params,
                         ad::Var input) {
    if (static_cast<int>(params.size()) != 2 * spec.layer_count())
        throw DimensionError("mlp_apply: parameter count mismatch");
    ad::Var cur = input;
    for (int l = 0; l < spec.layer_count(); ++l) {
        cur = t.linear(cur, params[2 * l], params[2 * l + 1]);
        bool last = (l == spec.layer_count() - 1);
        if (!last)
            cur = t.relu(cur);
        else if (spec.out_act == OutputActivation::Sigmoid)
            cur = t.sigmoid(cur);
    }
    return cur;
}

inline std::vector<ad::Var> param_leaves(ad::Tape& t, const ParamSet& params, bool requires_grad) {
    std::vector<ad::Var> vars;
    vars.reserve(params.size());
    for (const Mat& m : params) vars.push_back(t.leaf(m, requires_grad));
    return vars;
}

}  // namespace cfair
