#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/shear2dof.hpp"
#include "lsmu/tensor.hpp"

namespace lsmu {

// Deterministic forward model: parameter vector -> feature tensor {C, L}.
// Implementations must be pure and reentrant.
class Simulator {
public:
    virtual ~Simulator() = default;
    virtual std::string name() const = 0;
    virtual std::size_t param_dim() const = 0;
    virtual std::vector<std::int64_t> feature_shape() const = 0;
    virtual Tensor simulate(std::span<const double> params) const = 0;
};

// Composition of the eigen solve and the frequency-response map.
class Shear2DofSimulator final : public Simulator {
public:
    explicit Shear2DofSimulator(ShearModelConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    std::string name() const override { return "shear2dof"; }
    std::size_t param_dim() const override { return 2; }
    std::vector<std::int64_t> feature_shape() const override { return {2, cfg_.n_freq}; }

    Tensor simulate(std::span<const double> theta) const override {
        return frf(eigen_2dof(theta, cfg_), cfg_);
    }

    ModalFeatures modal_features(std::span<const double> theta) const {
        return eigen_2dof(theta, cfg_);
    }

    const ShearModelConfig& config() const { return cfg_; }

private:
    ShearModelConfig cfg_;
};

// Synthetic time-series stand-in for an external black-box subsystem: a sum
// of three damped sinusoids whose amplitudes, frequencies, damping rates and
// phases are smooth functions of the aleatory variables a[0..4] and the
// epistemic variables e[0..3]. Sampled at 0.01 s over 501 steps with 11 zero
// steps prepended, giving a 512-sample single-channel series.
class SequenceSimulator final : public Simulator {
public:
    static constexpr std::int64_t kLeadZeros = 11;
    static constexpr std::int64_t kSteps = 501;
    static constexpr double kDt = 0.01;

    std::string name() const override { return "sequence"; }
    std::size_t param_dim() const override { return 9; }  // a (5) then e (4)
    std::vector<std::int64_t> feature_shape() const override { return {1, kLeadZeros + kSteps}; }

    Tensor simulate(std::span<const double> p) const override {
        if (p.size() != 9) throw ConfigError("sequence simulator expects 5 aleatory + 4 epistemic");
        for (double v : p)
            if (v < 0.0 || v > 2.0) throw DomainError("sequence simulator: parameter outside [0,2]");
        const double a1 = p[0], a2 = p[1], a3 = p[2], a4 = p[3], a5 = p[4];
        const double e1 = p[5], e2 = p[6], e3 = p[7], e4 = p[8];

        const double amp[3] = {0.6 + 0.25 * a1 + 0.10 * e1,
                               0.4 + 0.20 * a5 + 0.10 * e3,
                               0.25 + 0.15 * a3 + 0.10 * e2};
        const double freq[3] = {0.5 + 0.30 * a2 + 0.15 * e2,
                                1.4 + 0.35 * a4 + 0.20 * e4,
                                2.6 + 0.30 * a5};
        const double damp[3] = {0.15 + 0.10 * a3,
                                0.25 + 0.08 * a1,
                                0.20 + 0.10 * e3};
        const double phase[3] = {0.4 * a4,
                                 0.5 * a2 - 0.3 * e1,
                                 0.6 * e4};

        Tensor out({1, kLeadZeros + kSteps});
        for (std::int64_t i = 0; i < kSteps; ++i) {
            const double t = kDt * static_cast<double>(i);
            double y = 0.0;
            for (int m = 0; m < 3; ++m)
                y += amp[m] * std::exp(-damp[m] * t) * std::sin(2.0 * M_PI * freq[m] * t + phase[m]);
            out[kLeadZeros + i] = y;
        }
        return out;
    }
};

inline std::unique_ptr<Simulator> make_simulator(const std::string& kind,
                                                 const ShearModelConfig& cfg = {}) {
    if (kind == "shear2dof") return std::make_unique<Shear2DofSimulator>(cfg);
    if (kind == "sequence") return std::make_unique<SequenceSimulator>();
    throw ConfigError("unknown simulator kind: " + kind);
}

}  // namespace lsmu
