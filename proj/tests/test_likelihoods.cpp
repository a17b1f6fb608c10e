#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lsmu/distance_likelihood.hpp"
#include "lsmu/latent_likelihood.hpp"
#include "lsmu/rng.hpp"
#include "lsmu/theoretical.hpp"
#include "support/quadrature.hpp"

using lsmu::EncodedSet;
using lsmu::LatentGaussian;
using lsmu::Rng;

namespace {

// Valid random triplet generator: combined precision must beat the prior's in
// every dimension.
struct Triplet {
    LatentGaussian qobs, qsim, prior;
};

Triplet random_triplet(std::size_t nz, Rng& rng) {
    Triplet t;
    for (std::size_t k = 0; k < nz; ++k) {
        const double s3 = rng.uniform(0.6, 1.4);
        double s1, s2;
        do {
            s1 = rng.uniform(0.1, 1.6);
            s2 = rng.uniform(0.1, 1.6);
        } while (1.0 / (2 * s1 * s1) + 1.0 / (2 * s2 * s2) <= 1.0 / (2 * s3 * s3) + 1e-3);
        t.qobs.mean.push_back(rng.uniform(-2.0, 2.0));
        t.qobs.std.push_back(s1);
        t.qsim.mean.push_back(rng.uniform(-2.0, 2.0));
        t.qsim.std.push_back(s2);
        t.prior.mean.push_back(rng.uniform(-0.5, 0.5));
        t.prior.std.push_back(s3);
    }
    return t;
}

}  // namespace

TEST(PairIntegral, AllStandardNormalIsExactlyOne) {
    const auto q = LatentGaussian::standard(3);
    EXPECT_EQ(lsmu::pair_integral(q, q, q), 1.0);
    EXPECT_EQ(lsmu::pair_integral(LatentGaussian::standard(1), LatentGaussian::standard(1),
                                  LatentGaussian::standard(1)),
              1.0);
}

TEST(PairIntegral, SymmetricInObsAndSim) {
    Rng rng(19);
    for (int i = 0; i < 50; ++i) {
        const auto t = random_triplet(3, rng);
        EXPECT_DOUBLE_EQ(lsmu::pair_integral(t.qobs, t.qsim, t.prior),
                         lsmu::pair_integral(t.qsim, t.qobs, t.prior));
    }
}

TEST(PairIntegral, MatchesQuadratureOracle) {
    Rng rng(29);
    for (int i = 0; i < 250; ++i) {
        const std::size_t nz = 1 + static_cast<std::size_t>(rng.uniform_index(6));
        const auto t = random_triplet(nz, rng);
        double oracle = 1.0;
        for (std::size_t k = 0; k < nz; ++k)
            oracle *= lsmu_test::pair_integral_1d_quadrature(t.qobs.mean[k], t.qobs.std[k],
                                                             t.qsim.mean[k], t.qsim.std[k],
                                                             t.prior.mean[k], t.prior.std[k]);
        const double val = lsmu::pair_integral(t.qobs, t.qsim, t.prior);
        EXPECT_NEAR(val, oracle, 1e-8 * std::abs(oracle)) << "triplet " << i << " nz=" << nz;
        EXPECT_NEAR(lsmu::log_pair_integral(t.qobs, t.qsim, t.prior), std::log(oracle),
                    1e-8 * std::max(1.0, std::abs(std::log(oracle))));
    }
}

TEST(PairIntegral, DivergenceIsHardErrorNamingDimension) {
    LatentGaussian wide{{0.0, 0.0}, {1.0, 2.0}};  // dim 1 variance above prior
    const auto prior = LatentGaussian::standard(2);
    try {
        lsmu::pair_integral(wide, wide, prior);
        FAIL() << "expected DivergenceError";
    } catch (const lsmu::DivergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("dimension 1"), std::string::npos);
    }
}

TEST(LatentLogLikelihood, SinglePairReducesToPairIntegral) {
    Rng rng(31);
    const auto t = random_triplet(3, rng);
    EncodedSet obs{{t.qobs}, t.prior};
    EncodedSet sims{{t.qsim}, t.prior};
    EXPECT_NEAR(lsmu::latent_log_likelihood(obs, sims),
                std::log(lsmu::pair_integral(t.qobs, t.qsim, t.prior)), 1e-12);
}

TEST(LatentLogLikelihood, DuplicatingSimulationsAddsLogTwoPerObservation) {
    Rng rng(37);
    EncodedSet obs{{}, LatentGaussian::standard(2)};
    EncodedSet sims{{}, LatentGaussian::standard(2)};
    for (int i = 0; i < 3; ++i) obs.members.push_back(random_triplet(2, rng).qobs);
    for (int j = 0; j < 4; ++j) sims.members.push_back(random_triplet(2, rng).qsim);
    const double base = lsmu::latent_log_likelihood(obs, sims);
    EncodedSet doubled = sims;
    doubled.members.insert(doubled.members.end(), sims.members.begin(), sims.members.end());
    const double twice = lsmu::latent_log_likelihood(obs, doubled);
    EXPECT_NEAR(twice, base + 3.0 * std::log(2.0), 1e-10);
}

TEST(LatentLogLikelihood, MatchesBruteForceProductOfSums) {
    Rng rng(41);
    EncodedSet obs{{}, LatentGaussian::standard(3)};
    EncodedSet sims{{}, LatentGaussian::standard(3)};
    for (int i = 0; i < 2; ++i) obs.members.push_back(random_triplet(3, rng).qobs);
    for (int j = 0; j < 3; ++j) sims.members.push_back(random_triplet(3, rng).qsim);
    double brute = 1.0;
    for (const auto& o : obs.members) {
        double s = 0.0;
        for (const auto& q : sims.members) s += lsmu::pair_integral(o, q, obs.prior);
        brute *= s;
    }
    const double ll = lsmu::latent_log_likelihood(obs, sims);
    EXPECT_NEAR(ll, std::log(brute), 1e-10 * std::max(1.0, std::abs(std::log(brute))));
}

TEST(LatentLogLikelihood, PermutationInvariant) {
    Rng rng(43);
    EncodedSet obs{{}, LatentGaussian::standard(2)};
    EncodedSet sims{{}, LatentGaussian::standard(2)};
    for (int i = 0; i < 4; ++i) obs.members.push_back(random_triplet(2, rng).qobs);
    for (int j = 0; j < 5; ++j) sims.members.push_back(random_triplet(2, rng).qsim);
    const double base = lsmu::latent_log_likelihood(obs, sims);
    std::reverse(obs.members.begin(), obs.members.end());
    std::rotate(sims.members.begin(), sims.members.begin() + 2, sims.members.end());
    EXPECT_NEAR(lsmu::latent_log_likelihood(obs, sims), base, 1e-10);
}

TEST(Binning, HandComputedBhattacharyya) {
    // p=[.5,.5], q=[.25,.75] on two shared bins.
    lsmu::BinnedPmf p, q;
    p.edges = q.edges = {{0.0, 1.0, 2.0}};
    p.prob = {0.5, 0.5};
    q.prob = {0.25, 0.75};
    const double expected = -std::log(std::sqrt(0.125) + std::sqrt(0.375));
    EXPECT_NEAR(lsmu::bhattacharyya_distance(p, q), expected, 1e-14);
}

TEST(Binning, IdenticalAndDisjoint) {
    lsmu::BinnedPmf p, q, r;
    p.edges = q.edges = r.edges = {{0.0, 1.0, 2.0, 3.0}};
    p.prob = {0.2, 0.5, 0.3};
    q.prob = {0.2, 0.5, 0.3};
    r.prob = {0.0, 0.0, 1.0};
    EXPECT_NEAR(lsmu::bhattacharyya_distance(p, q), 0.0, 1e-14);
    lsmu::BinnedPmf s;
    s.edges = p.edges;
    s.prob = {1.0, 0.0, 0.0};
    EXPECT_TRUE(std::isinf(lsmu::bhattacharyya_distance(r, s)));
    // symmetry
    EXPECT_DOUBLE_EQ(lsmu::bhattacharyya_distance(p, r), lsmu::bhattacharyya_distance(r, p));
}

TEST(Binning, PmfFromSamplesNormalizedAndClipped) {
    std::vector<std::vector<double>> samples = {{0.1, 0.2}, {0.9, 1.5}, {5.0, -3.0}, {0.4, 0.6}};
    auto edges = lsmu::equal_width_edges({{0.0, 0.0}, {1.0, 2.0}}, 4);
    const auto pmf = lsmu::bin_pmf(samples, edges);
    double s = 0.0;
    for (double v : pmf.prob) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);  // out-of-range samples clipped, not dropped
}

TEST(EuclideanDistance, KnownCases) {
    std::vector<std::vector<double>> a = {{1.0, 2.0}, {3.0, 4.0}};
    EXPECT_DOUBLE_EQ(lsmu::euclidean_distance(a, a), 0.0);
    std::vector<std::vector<double>> b = {{1.0, 2.5}, {3.0, 4.5}};  // +0.5 in coordinate 1
    EXPECT_NEAR(lsmu::euclidean_distance(a, b), 0.5, 1e-12);

    Rng rng(51);
    std::vector<std::vector<double>> x, y;
    for (int i = 0; i < 7; ++i) {
        x.push_back({rng.normal(), rng.normal(), rng.normal()});
        y.push_back({rng.normal(), rng.normal(), rng.normal()});
    }
    // brute-force oracle
    double m[3] = {0, 0, 0};
    for (const auto& r : x)
        for (int k = 0; k < 3; ++k) m[k] += r[k] / 7.0;
    for (const auto& r : y)
        for (int k = 0; k < 3; ++k) m[k] -= r[k] / 7.0;
    const double oracle = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    EXPECT_NEAR(lsmu::euclidean_distance(x, y), oracle, 1e-12);
}

TEST(AbcKernel, KnownValuesAndOrdering) {
    EXPECT_DOUBLE_EQ(lsmu::abc_log_likelihood(0.0, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(lsmu::abc_log_likelihood(0.5, 0.5), -1.0);
    Rng rng(53);
    for (int i = 0; i < 100; ++i) {
        const double d1 = rng.uniform(0.0, 5.0);
        const double d2 = d1 + rng.uniform(1e-6, 5.0);
        EXPECT_GT(lsmu::abc_log_likelihood(d1, 0.3), lsmu::abc_log_likelihood(d2, 0.3));
    }
    EXPECT_THROW(lsmu::abc_log_likelihood(1.0, 0.0), lsmu::ConfigError);
}

TEST(InvertFeatures, RoundTripsRandomTheta) {
    Rng rng(61);
    lsmu::ShearModelConfig cfg;
    for (int i = 0; i < 100; ++i) {
        const double th[2] = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
        const auto x = lsmu::eigen_2dof(th, cfg);
        const auto rec = lsmu::invert_features(x, cfg, 1e-8);
        EXPECT_NEAR(rec[0], th[0], 1e-7);
        EXPECT_NEAR(rec[1], th[1], 1e-7);
        // the defining property: residual below tolerance
        const auto back = lsmu::eigen_2dof(rec, cfg).as_array();
        const auto want = x.as_array();
        double res = 0.0;
        for (int k = 0; k < 6; ++k) res += (back[k] - want[k]) * (back[k] - want[k]);
        EXPECT_LE(std::sqrt(res), 1e-8);
    }
}

TEST(InvertFeatures, BoundaryTheta) {
    lsmu::ShearModelConfig cfg;
    const double th[2] = {0.1, 0.1};
    const auto rec = lsmu::invert_features(lsmu::eigen_2dof(th, cfg), cfg, 1e-8);
    EXPECT_NEAR(rec[0], 0.1, 1e-7);
    EXPECT_NEAR(rec[1], 0.1, 1e-7);
}

TEST(InvertFeatures, PerturbedFeaturesStayClose) {
    Rng rng(67);
    lsmu::ShearModelConfig cfg;
    for (int i = 0; i < 20; ++i) {
        const double th[2] = {rng.uniform(0.2, 1.8), rng.uniform(0.2, 1.8)};
        auto x = lsmu::eigen_2dof(th, cfg);
        x.f1 += 1e-6 * rng.normal();
        x.f2 += 1e-6 * rng.normal();
        x.p11 += 1e-6 * rng.normal();
        x.p12 += 1e-6 * rng.normal();
        x.p21 += 1e-6 * rng.normal();
        x.p22 += 1e-6 * rng.normal();
        const auto rec = lsmu::invert_features(x, cfg, 1e-4);
        EXPECT_NEAR(rec[0], th[0], 1e-4);
        EXPECT_NEAR(rec[1], th[1], 1e-4);
    }
}

TEST(TheoreticalLikelihood, PointAtMeanGivesNormalizerOnly) {
    const std::vector<std::array<double, 2>> stars = {{0.49, 0.92}};
    const double s = 0.1;
    EXPECT_NEAR(lsmu::theoretical_log_likelihood(stars, {0.49, 0.92}, s), -2.0 * std::log(s),
                1e-12);
    // doubling sigma lowers log L by n_theta * log 2
    EXPECT_NEAR(lsmu::theoretical_log_likelihood(stars, {0.49, 0.92}, 2.0 * s),
                -2.0 * std::log(s) - 2.0 * std::log(2.0), 1e-12);
}

TEST(TheoreticalLikelihood, MaximizedAtSampleMeanOverMu) {
    Rng rng(71);
    std::vector<std::array<double, 2>> stars;
    double m0 = 0, m1 = 0;
    for (int i = 0; i < 16; ++i) {
        stars.push_back({0.5 + 0.1 * rng.normal(), 0.9 + 0.1 * rng.normal()});
        m0 += stars.back()[0] / 16.0;
        m1 += stars.back()[1] / 16.0;
    }
    const double at_mean = lsmu::theoretical_log_likelihood(stars, {m0, m1}, 0.1);
    for (int i = 0; i < 20; ++i) {
        const double mu0 = m0 + 0.05 * rng.normal();
        const double mu1 = m1 + 0.05 * rng.normal();
        if (std::abs(mu0 - m0) + std::abs(mu1 - m1) < 1e-12) continue;
        EXPECT_GT(at_mean, lsmu::theoretical_log_likelihood(stars, {mu0, mu1}, 0.1));
    }
}
