#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lsmu/errors.hpp"

namespace lsmu {

// Diagonal Gaussian in latent space, the encoder's output distribution.
struct LatentGaussian {
    std::vector<double> mean;
    std::vector<double> std;  // strictly positive

    std::size_t dim() const { return mean.size(); }

    static LatentGaussian standard(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
    }
};

inline void validate_latent(const LatentGaussian& g, const char* who) {
    if (g.mean.size() != g.std.size())
        throw ConfigError(std::string(who) + ": mean/std size mismatch");
    for (std::size_t i = 0; i < g.std.size(); ++i) {
        if (!(g.std[i] > 0.0) || !std::isfinite(g.std[i]) || !std::isfinite(g.mean[i]))
            throw NumericError(std::string(who) + ": latent Gaussian must be finite with std > 0");
    }
}

}  // namespace lsmu
