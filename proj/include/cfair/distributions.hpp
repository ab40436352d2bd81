#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cfair/errors.hpp"
#include "cfair/mat.hpp"
#include "cfair/tape.hpp"

namespace cfair {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Mean / log-variance pair of a diagonal Gaussian.
struct DiagGaussian {
    std::vector<double> mean;
    std::vector<double> log_var;

    DiagGaussian() = default;
    DiagGaussian(std::vector<double> m, std::vector<double> lv)
        : mean(std::move(m)), log_var(std::move(lv)) {
        if (mean.size() != log_var.size())
            throw DimensionError("DiagGaussian: mean/log_var length mismatch");
    }
    int dim() const { return static_cast<int>(mean.size()); }
};

struct BernoulliLogit {
    double logit = 0.0;
};

struct SupportInterval {
    double lower = 0.0;
    double upper = 1.0;

    SupportInterval() = default;
    SupportInterval(double lo, double hi) : lower(lo), upper(hi) {
        if (!(lower < upper)) throw DomainError("SupportInterval: need lower < upper");
    }
    double width() const { return upper - lower; }
    bool contains(double x) const { return x >= lower && x <= upper; }
};

/// mean + exp(log_var / 2) * noise  (the reparameterization map).
inline std::vector<double> gaussian_sample(const DiagGaussian& d, const std::vector<double>& noise) {
    if (noise.size() != d.mean.size())
        throw DimensionError("gaussian_sample: noise length " + std::to_string(noise.size()) +
                             ", expected " + std::to_string(d.mean.size()));
    std::vector<double> out(d.mean.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = d.mean[i] + std::exp(0.5 * d.log_var[i]) * noise[i];
    return out;
}

inline double gaussian_log_prob(const DiagGaussian& d, const std::vector<double>& x) {
    if (x.size() != d.mean.size())
        throw DimensionError("gaussian_log_prob: length mismatch");
    double lp = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double diff = x[i] - d.mean[i];
        lp += -0.5 * (kLog2Pi + d.log_var[i] + diff * diff * std::exp(-d.log_var[i]));
    }
    return lp;
}

/// KL(d || N(0, I)), closed form, summed over dimensions.
inline double gaussian_kl_to_standard(const DiagGaussian& d) {
    double kl = 0.0;
    for (size_t i = 0; i < d.mean.size(); ++i)
        kl += 0.5 * (d.mean[i] * d.mean[i] + std::exp(d.log_var[i]) - 1.0 - d.log_var[i]);
    return kl;
}

inline double bernoulli_log_prob(const BernoulliLogit& b, int y) {
    if (y != 0 && y != 1) throw DomainError("bernoulli_log_prob: y must be 0 or 1");
    // log sigmoid(z) = -softplus(-z); log sigmoid(-z) = -softplus(z)
    return y == 1 ? -ad::Tape::softplus_scalar(-b.logit) : -ad::Tape::softplus_scalar(b.logit);
}

/// lower + width * sigmoid(gaussian_sample(d, noise)) for a 1-D Gaussian.
inline double logit_normal_sample(const DiagGaussian& d, const SupportInterval& support,
                                  double noise) {
    if (d.dim() != 1) throw DimensionError("logit_normal_sample: parameters must be 1-D");
    double z = d.mean[0] + std::exp(0.5 * d.log_var[0]) * noise;
    return support.lower + support.width() * ad::Tape::sigmoid_scalar(z);
}

// ---- tape compositions (batched) ----

/// Row-wise log N(x | mean, exp(log_var)): (MxD, MxD, MxD const) -> Mx1.
inline ad::Var gaussian_log_prob_rows(ad::Tape& t, ad::Var mean, ad::Var log_var, ad::Var x) {
    ad::Var diff = t.sub(x, mean);
    ad::Var quad = t.mul(t.square(diff), t.exp_(t.neg(log_var)));
    ad::Var terms = t.add(t.affine(log_var, 1.0, kLog2Pi), quad);
    return t.affine(t.row_sum(terms), -0.5, 0.0);
}

/// Row-wise log Bernoulli(y | sigmoid(logit)) for constant targets in {0,1}.
inline ad::Var bernoulli_log_prob_rows(ad::Tape& t, ad::Var logit, const std::vector<double>& y) {
    Mat ym(static_cast<int>(y.size()), 1);
    Mat ycm(static_cast<int>(y.size()), 1);
    for (size_t i = 0; i < y.size(); ++i) {
        ym.v[i] = y[i];
        ycm.v[i] = 1.0 - y[i];
    }
    ad::Var pos = t.mul(t.softplus(t.neg(logit)), t.constant(ym));
    ad::Var negt = t.mul(t.softplus(logit), t.constant(ycm));
    return t.neg(t.add(pos, negt));
}

/// Row-wise KL(N(mean, exp(log_var)) || N(0, I)) summed over dims: -> Mx1.
inline ad::Var gaussian_kl_rows(ad::Tape& t, ad::Var mean, ad::Var log_var) {
    ad::Var terms = t.sub(t.add(t.square(mean), t.exp_(log_var)), t.affine(log_var, 1.0, 1.0));
    return t.affine(t.row_sum(terms), 0.5, 0.0);
}

/// Reparameterized draw with constant noise: mean + exp(log_var/2) * eps.
inline ad::Var gaussian_sample_rows(ad::Tape& t, ad::Var mean, ad::Var log_var, ad::Var noise) {
    return t.add(mean, t.mul(t.exp_(t.affine(log_var, 0.5, 0.0)), noise));
}

/// lower + width * sigmoid(mean + exp(log_var/2) * eps), columns 1-D.
inline ad::Var logit_normal_sample_rows(ad::Tape& t, ad::Var mean, ad::Var log_var, ad::Var noise,
                                        const SupportInterval& support) {
    ad::Var z = gaussian_sample_rows(t, mean, log_var, noise);
    return t.affine(t.sigmoid(z), support.width(), support.lower);
}

}  // namespace cfair
