#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cfair/mat.hpp"
#include "cfair/mlp.hpp"
#include "cfair/rng.hpp"
#include "cfair/tape.hpp"

namespace cfair {

/// A loss builder: given a tape and leaves for the parameter arrays (in
/// ParamSet order), returns the scalar loss node. Must be deterministic in
/// the parameters — any sampling noise has to be baked into the closure.
using LossFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

/// Reverse-mode gradient of `loss` at `params`, shaped like the ParamSet.
inline ParamSet gradient(const LossFn& loss, const ParamSet& params) {
    ad::Tape t;
    std::vector<ad::Var> leaves = param_leaves(t, params, true);
    ad::Var l = loss(t, leaves);
    t.backward(l);
    ParamSet g;
    g.reserve(params.size());
    for (ad::Var v : leaves) g.push_back(t.grad(v));
    return g;
}

inline double eval_loss(const LossFn& loss, const ParamSet& params) {
    ad::Tape t;
    std::vector<ad::Var> leaves = param_leaves(t, params, false);
    return t.val(loss(t, leaves)).v[0];
}

/// Central finite difference of the loss along one parameter coordinate.
inline double finite_diff(const LossFn& loss, const ParamSet& params, size_t array, int index,
                          double step = 1e-5) {
    ParamSet p = params;
    p[array].v[index] += step;
    double up = eval_loss(loss, p);
    p[array].v[index] -= 2.0 * step;
    double down = eval_loss(loss, p);
    return (up - down) / (2.0 * step);
}

/// Probes `probe_count` random coordinates and returns the worst relative
/// disagreement between the reverse-mode gradient and central differences.
inline double grad_check(const LossFn& loss, const ParamSet& params, int probe_count, Rng& rng,
                         double step = 1e-5) {
    if (probe_count < 1) throw ConfigError("grad_check: probe_count must be >= 1");
    ParamSet analytic = gradient(loss, params);
    int total = 0;
    for (const Mat& m : params) total += m.size();
    double worst = 0.0;
    for (int probe = 0; probe < probe_count; ++probe) {
        int flat = rng.uniform_int(total);
        size_t array = 0;
        while (flat >= params[array].size()) {
            flat -= params[array].size();
            ++array;
        }
        double fd = finite_diff(loss, params, array, flat, step);
        double err = std::abs(analytic[array].v[flat] - fd) / std::max(1e-8, std::abs(fd));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace cfair
