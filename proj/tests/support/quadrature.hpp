#pragma once

// Test-only adaptive Simpson quadrature, independent of the library's
// closed-form integral evaluation.

#include <cmath>
#include <functional>

namespace lsmu_test {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13, int max_depth = 48) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), tol, max_depth);
}

// One latent dimension of the pair integrand: N(z;m1,s1) N(z;m2,s2) / N(z;m3,s3).
inline double pair_integrand_1d(double z, double m1, double s1, double m2, double s2, double m3,
                                double s3) {
    auto normpdf = [](double x, double mu, double sd) {
        const double t = (x - mu) / sd;
        return std::exp(-0.5 * t * t) / (sd * std::sqrt(2.0 * M_PI));
    };
    return normpdf(z, m1, s1) * normpdf(z, m2, s2) / normpdf(z, m3, s3);
}

// Integrates the 1-D pair integrand over an interval wide enough that the
// truncated tails are negligible at the checked tolerance.
inline double pair_integral_1d_quadrature(double m1, double s1, double m2, double s2, double m3,
                                          double s3) {
    const double a = 1.0 / (2 * s1 * s1) + 1.0 / (2 * s2 * s2) - 1.0 / (2 * s3 * s3);
    const double b = -m1 / (s1 * s1) - m2 / (s2 * s2) + m3 / (s3 * s3);
    const double center = -b / (2.0 * a);
    const double width = 1.0 / std::sqrt(2.0 * a);
    const double lo = center - 16.0 * width, hi = center + 16.0 * width;
    auto f = [&](double z) { return pair_integrand_1d(z, m1, s1, m2, s2, m3, s3); };
    // scale the absolute tolerance by the peak value
    const double peak = f(center);
    return adaptive_simpson(f, lo, hi, 1e-12 * std::max(peak * width, 1e-30));
}

}  // namespace lsmu_test
