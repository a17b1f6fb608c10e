#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/shear2dof.hpp"
#include "lsmu/uncertainty.hpp"

namespace lsmu {

namespace detail {

inline std::array<double, 6> feature_residual(const std::array<double, 2>& theta,
                                              const std::array<double, 6>& target,
                                              const ShearModelConfig& cfg) {
    const auto f = eigen_2dof(theta, cfg).as_array();
    std::array<double, 6> r;
    for (int i = 0; i < 6; ++i) r[i] = f[i] - target[i];
    return r;
}

inline double norm6(const std::array<double, 6>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
}

}  // namespace detail

// Recovers theta from a modal feature vector by damped Gauss-Newton least
// squares with a fixed multi-start grid over the prior box. The map is
// one-to-one on the box, so every converged start agrees; the first start
// reaching the tolerance wins. Residuals above `tol` raise DomainError.
inline std::array<double, 2> invert_features(const ModalFeatures& x,
                                             const ShearModelConfig& cfg = {},
                                             double tol = 1e-8) {
    const auto target = x.as_array();
    constexpr int kGrid = 5;
    constexpr double kLo = 0.1, kHi = 2.0;
    // iterates may wander slightly outside the box; keep them in the model's domain
    constexpr double kThetaMin = 1e-3, kThetaMax = 10.0;

    std::array<double, 2> best{0.0, 0.0};
    double best_res = std::numeric_limits<double>::infinity();

    for (int gi = 0; gi < kGrid; ++gi) {
        for (int gj = 0; gj < kGrid; ++gj) {
            std::array<double, 2> th{
                kLo + (kHi - kLo) * (gi + 0.5) / kGrid,
                kLo + (kHi - kLo) * (gj + 0.5) / kGrid,
            };
            double res = detail::norm6(detail::feature_residual(th, target, cfg));
            for (int it = 0; it < 60 && res > tol * 0.25; ++it) {
                // central-difference Jacobian (6x2)
                double J[6][2];
                for (int p = 0; p < 2; ++p) {
                    const double h = 1e-7 * (1.0 + std::abs(th[p]));
                    auto tp = th, tm = th;
                    tp[p] += h;
                    tm[p] -= h;
                    tp[p] = std::clamp(tp[p], kThetaMin, kThetaMax);
                    tm[p] = std::clamp(tm[p], kThetaMin, kThetaMax);
                    const auto rp = detail::feature_residual(tp, target, cfg);
                    const auto rm = detail::feature_residual(tm, target, cfg);
                    for (int i = 0; i < 6; ++i) J[i][p] = (rp[i] - rm[i]) / (tp[p] - tm[p]);
                }
                const auto r = detail::feature_residual(th, target, cfg);
                // normal equations (2x2) with Levenberg damping
                double A00 = 0, A01 = 0, A11 = 0, g0 = 0, g1 = 0;
                for (int i = 0; i < 6; ++i) {
                    A00 += J[i][0] * J[i][0];
                    A01 += J[i][0] * J[i][1];
                    A11 += J[i][1] * J[i][1];
                    g0 += J[i][0] * r[i];
                    g1 += J[i][1] * r[i];
                }
                double lambda = 1e-10 * (A00 + A11);
                bool stepped = false;
                for (int damp = 0; damp < 12; ++damp) {
                    const double a00 = A00 + lambda, a11 = A11 + lambda;
                    const double det = a00 * a11 - A01 * A01;
                    if (std::abs(det) < 1e-300) break;
                    std::array<double, 2> cand{
                        std::clamp(th[0] - (a11 * g0 - A01 * g1) / det, kThetaMin, kThetaMax),
                        std::clamp(th[1] - (a00 * g1 - A01 * g0) / det, kThetaMin, kThetaMax),
                    };
                    const double cres = detail::norm6(detail::feature_residual(cand, target, cfg));
                    if (cres < res) {
                        th = cand;
                        res = cres;
                        stepped = true;
                        break;
                    }
                    lambda = lambda == 0.0 ? 1e-8 : lambda * 10.0;
                }
                if (!stepped) break;  // local minimum for this start
            }
            if (res < best_res) {
                best_res = res;
                best = th;
            }
            if (best_res <= tol) return best;
        }
    }
    if (best_res <= tol) return best;
    throw DomainError("invert_features: residual " + std::to_string(best_res) +
                      " above tolerance; features not invertible in the box");
}

// Gaussian hyper log likelihood of pre-inverted observations:
//   sum_i [ -|theta*_i - mu|^2 / (2 sigma^2) - n_theta * log sigma ].
// The sigma normalizer is kept because sigma itself is being inferred; the
// Jacobian of the feature map is constant in (mu, sigma) and dropped.
inline double theoretical_log_likelihood(const std::vector<std::array<double, 2>>& theta_stars,
                                         const std::vector<double>& mu, double sigma) {
    if (theta_stars.empty()) throw ConfigError("theoretical_log_likelihood: no observations");
    if (mu.size() != 2) throw ConfigError("theoretical_log_likelihood: mu must have 2 entries");
    if (sigma < 1e-12) return -std::numeric_limits<double>::infinity();
    double total = 0.0;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double logs = std::log(sigma);
    for (const auto& th : theta_stars) {
        const double d0 = th[0] - mu[0], d1 = th[1] - mu[1];
        total += -(d0 * d0 + d1 * d1) * inv2s2 - 2.0 * logs;
    }
    return total;
}

// Convenience form on raw features: inverts each observation, then evaluates.
inline double theoretical_log_likelihood_2dof(const std::vector<ModalFeatures>& obs,
                                              const GaussianHyper& hyper,
                                              const ShearModelConfig& cfg = {},
                                              double tol = 1e-8) {
    std::vector<std::array<double, 2>> stars;
    stars.reserve(obs.size());
    for (const auto& x : obs) stars.push_back(invert_features(x, cfg, tol));
    return theoretical_log_likelihood(stars, hyper.mu, hyper.sigma);
}

}  // namespace lsmu
