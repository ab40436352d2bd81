#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cfair/errors.hpp"
#include "cfair/mat.hpp"
#include "cfair/mlp.hpp"

namespace cfair {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(eps > 0.0) ||
            !(lr > 0.0))
            throw ConfigError("AdamConfig: need 0 < beta < 1, eps > 0, lr > 0");
    }
};

struct AdamState {
    AdamConfig cfg;
    int64_t step = 0;
    std::vector<Mat> m;  // first moments, same shapes as the ParamSet
    std::vector<Mat> v;  // second moments

    AdamState() = default;
    explicit AdamState(const ParamSet& params, AdamConfig c = {}) : cfg(c) {
        cfg.validate();
        for (const Mat& p : params) {
            m.emplace_back(p.rows, p.cols);
            v.emplace_back(p.rows, p.cols);
        }
    }
};

/// Standard ADAM update with bias correction. Rejects non-finite gradients
/// before touching any state, so a failed call leaves params unchanged.
inline void adam_step(AdamState& st, ParamSet& params, const ParamSet& grads) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw DimensionError("adam_step: parameter/gradient/state count mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]))
            throw DimensionError("adam_step: shape mismatch at array " + std::to_string(i));
        if (!grads[i].all_finite())
            throw NumericError("adam_step: non-finite gradient entry in array " + std::to_string(i));
    }
    st.step += 1;
    double b1t = 1.0 - std::pow(st.cfg.beta1, static_cast<double>(st.step));
    double b2t = 1.0 - std::pow(st.cfg.beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < params.size(); ++i) {
        double* p = params[i].v.data();
        const double* g = grads[i].v.data();
        double* m = st.m[i].v.data();
        double* v = st.v[i].v.data();
        int n = params[i].size();
        for (int k = 0; k < n; ++k) {
            m[k] = st.cfg.beta1 * m[k] + (1.0 - st.cfg.beta1) * g[k];
            v[k] = st.cfg.beta2 * v[k] + (1.0 - st.cfg.beta2) * g[k] * g[k];
            double mhat = m[k] / b1t;
            double vhat = v[k] / b2t;
            p[k] -= st.cfg.lr * mhat / (std::sqrt(vhat) + st.cfg.eps);
        }
    }
}

}  // namespace cfair
