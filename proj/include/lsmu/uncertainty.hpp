#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/rng.hpp"

namespace lsmu {

// ---- isotropic Gaussian hyper model ----------------------------------------

// theta ~ N(mu, sigma^2 I) restricted to the box [theta_lo, theta_hi]^2 by
// rejection; draws falling outside the box are redrawn.
struct GaussianHyper {
    std::vector<double> mu;  // [mu1, mu2]
    double sigma = 0.0;
    double theta_lo = 0.1;
    double theta_hi = 2.0;
};

inline std::vector<std::vector<double>> sample_gaussian_hyper(const GaussianHyper& hyper,
                                                              std::int64_t n, Rng& rng) {
    if (n < 1) throw ConfigError("sample_gaussian_hyper: n must be >= 1");
    if (hyper.sigma < 0) throw DomainError("sample_gaussian_hyper: negative sigma");
    std::vector<std::vector<double>> draws;
    draws.reserve(static_cast<std::size_t>(n));
    std::int64_t attempts = 0, accepted = 0;
    const std::size_t d = hyper.mu.size();
    std::vector<double> theta(d);
    while (accepted < n) {
        ++attempts;
        bool ok = true;
        for (std::size_t i = 0; i < d; ++i) {
            theta[i] = hyper.mu[i] + hyper.sigma * rng.normal();
            if (theta[i] < hyper.theta_lo || theta[i] > hyper.theta_hi) ok = false;
        }
        if (ok) {
            draws.push_back(theta);
            ++accepted;
        }
        if (attempts >= 1000 && accepted * 1000 < attempts)
            throw DomainError("sample_gaussian_hyper: rejection rate above 99.9%, degenerate hyper");
    }
    return draws;
}

// ---- truncated Gaussian mixture ---------------------------------------------

// Mixture of K truncated Gaussians over the box A = [lo, hi]^D. Covariances
// are assembled from per-dimension standard deviations and pairwise
// correlations: Sigma[i][j] = rho_ij * s_i * s_j.
struct TruncatedGmm {
    std::vector<double> weights;               // K, sums to 1
    std::vector<std::vector<double>> means;    // K x D
    std::vector<std::vector<double>> stds;     // K x D, strictly positive
    std::vector<std::vector<double>> corrs;    // K x D(D-1)/2, upper triangle row-major
    double lo = 0.0;
    double hi = 2.0;

    std::size_t comps() const { return weights.size(); }
    std::size_t dim() const { return means.empty() ? 0 : means[0].size(); }
};

namespace detail {

// Lower Cholesky; throws DomainError when the matrix is not positive definite.
inline std::vector<double> cholesky(const std::vector<double>& a, std::size_t d) {
    std::vector<double> L(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
            if (i == j) {
                if (s <= 0.0) throw DomainError("covariance not positive definite");
                L[i * d + i] = std::sqrt(s);
            } else {
                L[i * d + j] = s / L[j * d + j];
            }
        }
    }
    return L;
}

inline std::vector<double> assemble_covariance(const std::vector<double>& stds,
                                               const std::vector<double>& corrs) {
    const std::size_t d = stds.size();
    std::vector<double> cov(d * d, 0.0);
    std::size_t c = 0;
    for (std::size_t i = 0; i < d; ++i) {
        cov[i * d + i] = stds[i] * stds[i];
        for (std::size_t j = i + 1; j < d; ++j, ++c) {
            const double v = corrs[c] * stds[i] * stds[j];
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    return cov;
}

inline std::uint64_t hash_doubles(std::span<const double> xs, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (double x : xs) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        h = Rng::splitmix64(h ^ bits);
    }
    return h;
}

}  // namespace detail

// Validated mixture with factored covariances and per-component truncation
// normalizers. The normalizer Z_k = P(N(mu_k, Sigma_k) in A) is estimated
// once at construction by Monte Carlo with a fixed draw count and a seed
// derived from the component parameters, so a given parameter setting always
// yields the same value. Components with less than 0.1% of their mass inside
// the box are rejected as degenerate.
class FrozenGmm {
public:
    static constexpr std::int64_t kNormalizerDraws = 100000;
    static constexpr double kMinBoxMass = 1e-3;

    explicit FrozenGmm(TruncatedGmm spec) : spec_(std::move(spec)) {
        const std::size_t K = spec_.comps(), D = spec_.dim();
        if (K == 0 || D == 0) throw ConfigError("FrozenGmm: empty mixture");
        double wsum = 0.0;
        for (double w : spec_.weights) {
            if (w < 0) throw ConfigError("FrozenGmm: negative weight");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("FrozenGmm: weights must sum to 1");
        if (spec_.hi <= spec_.lo) throw ConfigError("FrozenGmm: empty box");
        const std::size_t ncorr = D * (D - 1) / 2;
        for (std::size_t k = 0; k < K; ++k) {
            if (spec_.means[k].size() != D || spec_.stds[k].size() != D ||
                spec_.corrs[k].size() != ncorr)
                throw ConfigError("FrozenGmm: inconsistent component shapes");
            for (double s : spec_.stds[k])
                if (s <= 0) throw DomainError("FrozenGmm: non-positive std");
            for (double r : spec_.corrs[k])
                if (r < -1.0 || r > 1.0) throw DomainError("FrozenGmm: correlation outside [-1,1]");
            const auto cov = detail::assemble_covariance(spec_.stds[k], spec_.corrs[k]);
            chol_.push_back(detail::cholesky(cov, D));
            double logdet = 0.0;
            for (std::size_t i = 0; i < D; ++i) logdet += std::log(chol_.back()[i * D + i]);
            half_logdet_.push_back(logdet);
            box_mass_.push_back(estimate_box_mass(k));
            if (box_mass_.back() < kMinBoxMass)
                throw DomainError("FrozenGmm: component " + std::to_string(k) +
                                  " has box acceptance below 0.1%");
        }
    }

    const TruncatedGmm& spec() const { return spec_; }
    double box_mass(std::size_t k) const { return box_mass_[k]; }

    std::vector<std::vector<double>> sample(std::int64_t n, Rng& rng) const {
        if (n < 1) throw ConfigError("FrozenGmm::sample: n must be >= 1");
        const std::size_t D = spec_.dim();
        std::vector<std::vector<double>> out;
        out.reserve(static_cast<std::size_t>(n));
        std::vector<double> z(D), y(D);
        for (std::int64_t i = 0; i < n; ++i) {
            // component choice proportional to the mixing weights
            const double u = rng.uniform();
            std::size_t k = 0;
            double acc = 0.0;
            for (; k + 1 < spec_.comps(); ++k) {
                acc += spec_.weights[k];
                if (u < acc) break;
            }
            std::int64_t tries = 0;
            for (;;) {
                if (++tries > 1000000)
                    throw DomainError("FrozenGmm::sample: rejection stalled");
                for (auto& v : z) v = rng.normal();
                const auto& L = chol_[k];
                bool in_box = true;
                for (std::size_t r = 0; r < D; ++r) {
                    double s = spec_.means[k][r];
                    for (std::size_t c = 0; c <= r; ++c) s += L[r * D + c] * z[c];
                    y[r] = s;
                    if (s < spec_.lo || s > spec_.hi) in_box = false;
                }
                if (in_box) break;
            }
            out.push_back(y);
        }
        return out;
    }

    // log of Eq-style mixture density: sum_k pi_k N(a | mu_k, Sigma_k) / Z_k
    // inside the box, -inf outside.
    double logpdf(std::span<const double> a) const {
        const std::size_t D = spec_.dim();
        if (a.size() != D) throw ConfigError("FrozenGmm::logpdf: dimension mismatch");
        for (double v : a)
            if (v < spec_.lo || v > spec_.hi) return -std::numeric_limits<double>::infinity();
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(spec_.comps());
        for (std::size_t k = 0; k < spec_.comps(); ++k) {
            terms[k] = std::log(spec_.weights[k] + 1e-300) + component_lognorm(k, a) -
                       std::log(box_mass_[k]);
            best = std::max(best, terms[k]);
        }
        double s = 0.0;
        for (double t : terms) s += std::exp(t - best);
        return best + std::log(s);
    }

private:
    double component_lognorm(std::size_t k, std::span<const double> a) const {
        const std::size_t D = spec_.dim();
        const auto& L = chol_[k];
        // solve L w = (a - mu), accumulate |w|^2
        std::vector<double> w(D);
        double q = 0.0;
        for (std::size_t r = 0; r < D; ++r) {
            double s = a[r] - spec_.means[k][r];
            for (std::size_t c = 0; c < r; ++c) s -= L[r * D + c] * w[c];
            w[r] = s / L[r * D + r];
            q += w[r] * w[r];
        }
        return -0.5 * q - half_logdet_[k] - 0.5 * static_cast<double>(D) * std::log(2.0 * M_PI);
    }

    double estimate_box_mass(std::size_t k) {
        const std::size_t D = spec_.dim();
        std::vector<double> all(spec_.means[k]);
        all.insert(all.end(), spec_.stds[k].begin(), spec_.stds[k].end());
        all.insert(all.end(), spec_.corrs[k].begin(), spec_.corrs[k].end());
        Rng rng(detail::hash_doubles(all, 0x5eedf00dull));
        const auto& L = chol_[k];
        std::vector<double> z(D);
        std::int64_t in_box = 0;
        for (std::int64_t i = 0; i < kNormalizerDraws; ++i) {
            for (auto& v : z) v = rng.normal();
            bool ok = true;
            for (std::size_t r = 0; r < D && ok; ++r) {
                double s = spec_.means[k][r];
                for (std::size_t c = 0; c <= r; ++c) s += L[r * D + c] * z[c];
                if (s < spec_.lo || s > spec_.hi) ok = false;
            }
            if (ok) ++in_box;
        }
        return static_cast<double>(in_box) / static_cast<double>(kNormalizerDraws);
    }

    TruncatedGmm spec_;
    std::vector<std::vector<double>> chol_;
    std::vector<double> half_logdet_;
    std::vector<double> box_mass_;
};

inline std::vector<std::vector<double>> gmm_sample(const FrozenGmm& gmm, std::int64_t n, Rng& rng) {
    return gmm.sample(n, rng);
}

inline double gmm_logpdf(const FrozenGmm& gmm, std::span<const double> a) {
    return gmm.logpdf(a);
}

}  // namespace lsmu
