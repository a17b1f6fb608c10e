#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/tensor.hpp"

namespace lsmu {

// Scalar function of a set of parameter tensors. Called with nullptr for a
// value-only evaluation; with a non-null pointer it must also fill one
// gradient tensor per parameter (same shapes, reverse-mode).
using ScalarFn = std::function<double(std::vector<Tensor>* grads)>;

// Central-difference check of the reverse-mode gradient. Returns the maximum
// over all parameter entries of |ad - fd| / (|fd| + eps_abs), where eps_abs
// scales with the largest finite-difference component so that near-zero
// gradient entries are not dominated by differencing noise.
inline double gradcheck(const ScalarFn& f, const std::vector<Tensor*>& params, double eps = 1e-5) {
    if (eps <= 0.0 || eps > 1e-2) throw ConfigError("gradcheck: eps must be in (0, 1e-2]");
    std::vector<Tensor> ad_grads;
    const double f0 = f(&ad_grads);
    if (!std::isfinite(f0)) throw NumericError("gradcheck: non-finite function value");
    if (ad_grads.size() != params.size()) throw ConfigError("gradcheck: gradient count mismatch");

    std::vector<Tensor> fd_grads;
    fd_grads.reserve(params.size());
    double fd_scale = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p];
        Tensor fd(theta.shape);
        for (std::int64_t i = 0; i < theta.size(); ++i) {
            const double x0 = theta[i];
            const double h = eps * (1.0 + std::abs(x0));
            theta[i] = x0 + h;
            const double fp = f(nullptr);
            theta[i] = x0 - h;
            const double fm = f(nullptr);
            theta[i] = x0;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("gradcheck: non-finite function value during differencing");
            fd[i] = (fp - fm) / (2.0 * h);
            fd_scale = std::max(fd_scale, std::abs(fd[i]));
        }
        fd_grads.push_back(std::move(fd));
    }

    const double eps_abs = 1e-6 * (1.0 + fd_scale);
    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Tensor& ad = ad_grads[p];
        const Tensor& fd = fd_grads[p];
        check_same_shape(ad, fd, "gradcheck");
        for (std::int64_t i = 0; i < ad.size(); ++i) {
            const double rel = std::abs(ad[i] - fd[i]) / (std::abs(fd[i]) + eps_abs);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

// Adam with bias correction. Moments are created on first use and must keep
// the parameter shapes afterwards.
struct AdamState {
    std::vector<Tensor> m, v;
    std::int64_t t = 0;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                      AdamState& state, const AdamConfig& cfg = {}) {
    if (grads.size() != params.size()) throw ConfigError("adam_step: gradient count mismatch");
    for (std::size_t p = 0; p < params.size(); ++p) {
        check_same_shape(*params[p], grads[p], "adam_step");
        if (!grads[p].all_finite()) throw NumericError("adam_step: non-finite gradient");
    }
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(Tensor::zeros(p->shape));
            state.v.emplace_back(Tensor::zeros(p->shape));
        }
    }
    if (state.m.size() != params.size()) throw ConfigError("adam_step: state size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p];
        const Tensor& g = grads[p];
        Tensor& m = state.m[p];
        Tensor& v = state.v[p];
        check_same_shape(theta, m, "adam_step: state");
        for (std::int64_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            theta[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        }
    }
}

}  // namespace lsmu
