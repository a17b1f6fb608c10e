#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "lsmu/errors.hpp"
#include "lsmu/tensor.hpp"

namespace lsmu {

// Two-story shear spring model. Masses in tons, nominal stiffness in MN/m;
// story stiffnesses are k_i = k_bar * theta_i. Frequencies are reported in
// Hz on the fixed 512-point grid f(i) = df * i.
struct ShearModelConfig {
    double m1_tons = 16.5;
    double m2_tons = 16.1;
    double k_bar_mn_per_m = 29.7;
    double damping1 = 0.05;
    double damping2 = 0.05;
    std::int64_t n_freq = 512;
    double df_hz = 0.02;

    void validate() const {
        if (m1_tons <= 0 || m2_tons <= 0 || k_bar_mn_per_m <= 0)
            throw ConfigError("shear model: masses and stiffness must be positive");
        if (damping1 <= 0 || damping1 >= 1 || damping2 <= 0 || damping2 >= 1)
            throw ConfigError("shear model: damping must be in (0,1)");
        if (n_freq < 2 || df_hz <= 0) throw ConfigError("shear model: bad frequency grid");
    }
};

// Natural frequencies (Hz, ascending) and participation-function components
// beta_j * phi_{j,k}: mode shape scaled by the modal participation factor
// beta_j = (phi' M 1) / (phi' M phi).
struct ModalFeatures {
    double f1 = 0, f2 = 0;
    double p11 = 0, p12 = 0;  // mode 1, stories 1 and 2
    double p21 = 0, p22 = 0;  // mode 2

    std::array<double, 6> as_array() const { return {f1, f2, p11, p12, p21, p22}; }
    std::vector<double> as_vector() const { return {f1, f2, p11, p12, p21, p22}; }
};

inline ModalFeatures eigen_2dof(std::span<const double> theta, const ShearModelConfig& cfg = {}) {
    cfg.validate();
    if (theta.size() != 2) throw ConfigError("eigen_2dof: theta must have 2 entries");
    if (theta[0] <= 0 || theta[1] <= 0) throw DomainError("eigen_2dof: non-positive theta");

    const double m1 = cfg.m1_tons * 1e3;                  // kg
    const double m2 = cfg.m2_tons * 1e3;
    const double k1 = cfg.k_bar_mn_per_m * 1e6 * theta[0];  // N/m
    const double k2 = cfg.k_bar_mn_per_m * 1e6 * theta[1];

    // det(K - lambda M) = m1 m2 lambda^2 - (m2 (k1+k2) + m1 k2) lambda + k1 k2
    const double A = m1 * m2;
    const double B = m2 * (k1 + k2) + m1 * k2;
    const double C = k1 * k2;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0) throw NumericError("eigen_2dof: degenerate spectrum");
    const double root = std::sqrt(disc);
    const double lam1 = (B - root) / (2.0 * A);
    const double lam2 = (B + root) / (2.0 * A);

    ModalFeatures out;
    out.f1 = std::sqrt(lam1) / (2.0 * M_PI);
    out.f2 = std::sqrt(lam2) / (2.0 * M_PI);

    // Mode shapes from the first equilibrium row, phi = [1, (k1+k2-lam*m1)/k2].
    for (int j = 0; j < 2; ++j) {
        const double lam = j == 0 ? lam1 : lam2;
        const double phi1 = 1.0;
        const double phi2 = (k1 + k2 - lam * m1) / k2;
        const double num = phi1 * m1 + phi2 * m2;          // phi' M 1
        const double den = phi1 * phi1 * m1 + phi2 * phi2 * m2;  // phi' M phi
        const double beta = num / den;
        if (j == 0) {
            out.p11 = beta * phi1;
            out.p12 = beta * phi2;
        } else {
            out.p21 = beta * phi1;
            out.p22 = beta * phi2;
        }
    }
    return out;
}

// Magnitude frequency response on the fixed grid, one channel per story:
//   H_k(f) = sum_j | b_j phi_{j,k} ( f^2 / (f_j^2 - f^2 + 2 i h_j f_j f) + 1 ) |
inline Tensor frf(const ModalFeatures& mod, const ShearModelConfig& cfg = {}) {
    cfg.validate();
    const std::int64_t n = cfg.n_freq;
    Tensor out({2, n});
    const double fj[2] = {mod.f1, mod.f2};
    const double hj[2] = {cfg.damping1, cfg.damping2};
    const double part[2][2] = {{mod.p11, mod.p12}, {mod.p21, mod.p22}};
    for (std::int64_t i = 0; i < n; ++i) {
        const double f = cfg.df_hz * static_cast<double>(i);
        for (int k = 0; k < 2; ++k) {
            double acc = 0.0;
            for (int j = 0; j < 2; ++j) {
                const std::complex<double> den(fj[j] * fj[j] - f * f, 2.0 * hj[j] * fj[j] * f);
                const std::complex<double> bracket = f * f / den + 1.0;
                acc += std::abs(part[j][k] * bracket);
            }
            out.at2(k, i) = acc;
        }
    }
    if (!out.all_finite()) throw NumericError("frf: non-finite response");
    return out;
}

}  // namespace lsmu
