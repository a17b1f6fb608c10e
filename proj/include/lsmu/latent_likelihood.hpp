#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/latent_gaussian.hpp"

namespace lsmu {

// Encoded observations or simulations, plus the latent prior q(z) they are
// weighted against (the trained regularizer target, standard normal by
// default; an empirical prior may be substituted by the caller).
struct EncodedSet {
    std::vector<LatentGaussian> members;
    LatentGaussian prior;

    static EncodedSet with_standard_prior(std::vector<LatentGaussian> members, std::size_t n_z) {
        return {std::move(members), LatentGaussian::standard(n_z)};
    }
};

namespace detail {

// Per-dimension quadratic coefficients of the Gaussian ratio integrand
//   q(z|obs) q(z|sim) / q(z)  ~  d * exp(-(a z^2 + b z + c)).
struct PairCoeffs {
    double a, b, c, log_d;
};

inline PairCoeffs pair_coeffs(double m1, double s1, double m2, double s2, double m3, double s3) {
    PairCoeffs p;
    p.a = 1.0 / (2.0 * s1 * s1) + 1.0 / (2.0 * s2 * s2) - 1.0 / (2.0 * s3 * s3);
    p.b = -m1 / (s1 * s1) - m2 / (s2 * s2) + m3 / (s3 * s3);
    p.c = m1 * m1 / (2.0 * s1 * s1) + m2 * m2 / (2.0 * s2 * s2) - m3 * m3 / (2.0 * s3 * s3);
    p.log_d = std::log(s3) - 0.5 * std::log(2.0 * M_PI) - std::log(s1) - std::log(s2);
    return p;
}

inline void check_pair_dims(const LatentGaussian& qobs, const LatentGaussian& qsim,
                            const LatentGaussian& prior) {
    validate_latent(qobs, "pair_integral: qobs");
    validate_latent(qsim, "pair_integral: qsim");
    validate_latent(prior, "pair_integral: prior");
    if (qobs.dim() != qsim.dim() || qobs.dim() != prior.dim())
        throw ConfigError("pair_integral: latent dimension mismatch");
}

}  // namespace detail

// Closed form of the integral over z of q(z|obs) q(z|sim) / q(z) for diagonal
// Gaussians: per dimension d * exp((b^2 - 4ac) / (4a)) * sqrt(pi / a).
// Symmetric in (qobs, qsim). The integral only converges when the combined
// precision exceeds the prior's in every dimension (a > 0); otherwise a
// DivergenceError names the offending dimension, and the caller decides how
// to report it.
inline double pair_integral(const LatentGaussian& qobs, const LatentGaussian& qsim,
                            const LatentGaussian& prior) {
    detail::check_pair_dims(qobs, qsim, prior);
    double value = 1.0;
    for (std::size_t k = 0; k < qobs.dim(); ++k) {
        const auto p = detail::pair_coeffs(qobs.mean[k], qobs.std[k], qsim.mean[k], qsim.std[k],
                                           prior.mean[k], prior.std[k]);
        if (!(p.a > 0.0))
            throw DivergenceError("pair_integral: divergent in dimension " + std::to_string(k) +
                                  " (encoder variance exceeds prior; a=" + std::to_string(p.a) + ")");
        const double expo = std::exp((p.b * p.b - 4.0 * p.a * p.c) / (4.0 * p.a));
        // grouped so that the all-standard-normal case yields exactly 1
        value *= expo * (prior.std[k] * std::sqrt(M_PI / p.a)) /
                 (std::sqrt(2.0 * M_PI) * qobs.std[k] * qsim.std[k]);
    }
    return value;
}

// log of pair_integral, used when accumulating likelihoods.
inline double log_pair_integral(const LatentGaussian& qobs, const LatentGaussian& qsim,
                                const LatentGaussian& prior) {
    detail::check_pair_dims(qobs, qsim, prior);
    double lv = 0.0;
    for (std::size_t k = 0; k < qobs.dim(); ++k) {
        const auto p = detail::pair_coeffs(qobs.mean[k], qobs.std[k], qsim.mean[k], qsim.std[k],
                                           prior.mean[k], prior.std[k]);
        if (!(p.a > 0.0))
            throw DivergenceError("pair_integral: divergent in dimension " + std::to_string(k) +
                                  " (encoder variance exceeds prior; a=" + std::to_string(p.a) + ")");
        lv += p.log_d + (p.b * p.b - 4.0 * p.a * p.c) / (4.0 * p.a) +
              0.5 * (std::log(M_PI) - std::log(p.a));
    }
    return lv;
}

// Multiobservation / multisimulation latent likelihood:
//   log L = sum_i log sum_j pair_integral(obs_i, sim_j, prior)
// with the inner sum in log space (max shift) for stability. The inner sum is
// deliberately unnormalized; comparisons across different N_sim must divide
// by N_sim.
inline double latent_log_likelihood(const EncodedSet& obs, const EncodedSet& sims) {
    if (obs.members.empty() || sims.members.empty())
        throw ConfigError("latent_log_likelihood: empty observation or simulation set");
    if (obs.prior.mean != sims.prior.mean || obs.prior.std != sims.prior.std)
        throw ConfigError("latent_log_likelihood: obs and sim sets carry different priors");
    const std::size_t nz = obs.prior.dim();
    for (const auto& g : obs.members)
        if (g.dim() != nz) throw ConfigError("latent_log_likelihood: obs latent dim mismatch");
    for (const auto& g : sims.members)
        if (g.dim() != nz) throw ConfigError("latent_log_likelihood: sim latent dim mismatch");

    double total = 0.0;
    std::vector<double> lp(sims.members.size());
    for (const auto& o : obs.members) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < sims.members.size(); ++j) {
            lp[j] = log_pair_integral(o, sims.members[j], obs.prior);
            mx = std::max(mx, lp[j]);
        }
        if (!std::isfinite(mx)) throw NumericError("latent_log_likelihood: inner sum underflow");
        double s = 0.0;
        for (double v : lp) s += std::exp(v - mx);
        total += mx + std::log(s);
    }
    return total;
}

}  // namespace lsmu
