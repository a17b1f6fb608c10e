#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lsmu/errors.hpp"

namespace lsmu {

// Settings for the binned ABC baselines: Gaussian kernel width factor and the
// bin count used by the Bhattacharyya distance.
struct AbcConfig {
    double epsilon = 0.1;
    int n_bins = 5;

    void validate() const {
        if (epsilon <= 0.0) throw ConfigError("AbcConfig: epsilon must be positive");
        if (n_bins < 2) throw ConfigError("AbcConfig: n_bins must be >= 2");
    }
};

// Normalized counts over a product grid of per-dimension bins.
struct BinnedPmf {
    std::vector<std::vector<double>> edges;  // per dimension, strictly increasing
    std::vector<double> prob;                // product-grid cells, sums to 1

    std::size_t dim() const { return edges.size(); }
};

// Equal-width edges per dimension spanning the pooled sample range; a pooled
// range avoids disjoint supports when the two sets barely overlap.
inline std::vector<std::vector<double>> equal_width_edges(
    const std::vector<std::vector<double>>& pooled, int n_bins) {
    if (pooled.empty()) throw ConfigError("equal_width_edges: empty sample set");
    if (n_bins < 2) throw ConfigError("equal_width_edges: n_bins must be >= 2");
    const std::size_t d = pooled.front().size();
    std::vector<std::vector<double>> edges(d);
    for (std::size_t k = 0; k < d; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& row : pooled) {
            lo = std::min(lo, row[k]);
            hi = std::max(hi, row[k]);
        }
        if (!(hi > lo)) {  // degenerate dimension: give it unit width
            lo -= 0.5;
            hi += 0.5;
        }
        edges[k].resize(static_cast<std::size_t>(n_bins) + 1);
        for (int b = 0; b <= n_bins; ++b)
            edges[k][static_cast<std::size_t>(b)] =
                lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(n_bins);
    }
    return edges;
}

// Histogram over the product grid. Samples outside the edge range are clipped
// into the boundary bins so the PMF always sums to 1.
inline BinnedPmf bin_pmf(const std::vector<std::vector<double>>& samples,
                         const std::vector<std::vector<double>>& edges) {
    if (samples.empty()) throw ConfigError("bin_pmf: empty sample set");
    if (edges.empty()) throw ConfigError("bin_pmf: empty edges");
    const std::size_t d = edges.size();
    std::size_t cells = 1;
    for (const auto& e : edges) {
        if (e.size() < 3) throw ConfigError("bin_pmf: need at least 2 bins per dimension");
        for (std::size_t i = 1; i < e.size(); ++i)
            if (!(e[i] > e[i - 1])) throw ConfigError("bin_pmf: edges must be strictly increasing");
        cells *= e.size() - 1;
    }
    BinnedPmf pmf;
    pmf.edges = edges;
    pmf.prob.assign(cells, 0.0);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (const auto& row : samples) {
        if (row.size() != d) throw ConfigError("bin_pmf: sample dimension mismatch");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const auto& e = edges[k];
            const std::int64_t nb = static_cast<std::int64_t>(e.size()) - 1;
            auto it = std::upper_bound(e.begin(), e.end(), row[k]);
            std::int64_t b = static_cast<std::int64_t>(it - e.begin()) - 1;
            b = std::clamp<std::int64_t>(b, 0, nb - 1);
            idx = idx * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b);
        }
        pmf.prob[idx] += w;
    }
    return pmf;
}

// d = -log sum_cells sqrt(p q); zero iff the PMFs agree on the grid, +inf when
// the supports are disjoint.
inline double bhattacharyya_distance(const BinnedPmf& p, const BinnedPmf& q) {
    if (p.edges != q.edges) throw ConfigError("bhattacharyya_distance: PMFs must share edges");
    if (p.prob.size() != q.prob.size())
        throw ConfigError("bhattacharyya_distance: cell count mismatch");
    double bc = 0.0;
    for (std::size_t i = 0; i < p.prob.size(); ++i) bc += std::sqrt(p.prob[i] * q.prob[i]);
    if (bc <= 0.0) return std::numeric_limits<double>::infinity();
    // clamp tiny negative rounding
    return std::max(0.0, -std::log(std::min(bc, 1.0)));
}

// Distance between sample means.
inline double euclidean_distance(const std::vector<std::vector<double>>& obs,
                                 const std::vector<std::vector<double>>& sim) {
    if (obs.empty() || sim.empty()) throw ConfigError("euclidean_distance: empty sample set");
    const std::size_t d = obs.front().size();
    if (sim.front().size() != d) throw ConfigError("euclidean_distance: dimension mismatch");
    std::vector<double> mo(d, 0.0), ms(d, 0.0);
    for (const auto& r : obs)
        for (std::size_t k = 0; k < d; ++k) mo[k] += r[k];
    for (const auto& r : sim)
        for (std::size_t k = 0; k < d; ++k) ms[k] += r[k];
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double diff = mo[k] / static_cast<double>(obs.size()) -
                            ms[k] / static_cast<double>(sim.size());
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

// Gaussian ABC kernel on a distance: log L = -(d / epsilon)^2.
inline double abc_log_likelihood(double d, double epsilon) {
    if (epsilon <= 0.0) throw ConfigError("abc_log_likelihood: epsilon must be positive");
    if (std::isinf(d)) return -std::numeric_limits<double>::infinity();
    const double r = d / epsilon;
    return -r * r;
}

}  // namespace lsmu
