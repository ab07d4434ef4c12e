#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <qcbound/curvature_bound.hpp>
#include <qcbound/models.hpp>

#include "support/oracles.hpp"

using namespace qcbound;

namespace {

EntanglementInputs inputs_for(const CMatrix& h0, const CMatrix& v, int n) {
    return make_entanglement_inputs(eigensystem(HermitianOperator(h0)), HermitianOperator(v), n);
}

RVector spectrum(std::initializer_list<double> e) {
    RVector v(static_cast<Eigen::Index>(e.size()));
    Eigen::Index i = 0;
    for (double x : e) v(i++) = x;
    return v;
}

} // namespace

TEST(LevelCurvature, TwoLevelClosedForm) {
    CMatrix h0 = CMatrix::Zero(2, 2);
    h0(1, 1) = 1.0;
    const auto in = inputs_for(h0, oracle::pauli_matrix('x'), 1);
    EXPECT_NEAR(level_curvature(0, in), -2.0, 1e-14);
    EXPECT_NEAR(level_curvature(1, in), 2.0, 1e-14);
}

TEST(LevelCurvature, DiagonalVHasNoCurvature) {
    CMatrix h0 = CMatrix::Zero(4, 4);
    h0.diagonal() << 0.0, 0.5, 1.3, 2.0;
    CMatrix v = CMatrix::Zero(4, 4);
    v.diagonal() << 1.0, -2.0, 0.3, 0.7;
    const auto in = inputs_for(h0, v, 2);
    for (Eigen::Index n = 0; n < 4; ++n) EXPECT_EQ(level_curvature(n, in), 0.0);
}

TEST(LevelCurvature, MatchesSecondDifferenceOnFourQubits) {
    std::mt19937_64 rng(4);
    const CMatrix h0 = oracle::random_hermitian(16, rng);
    const CMatrix v = oracle::random_hermitian(16, rng);
    const auto in = inputs_for(h0, v, 4);
    for (Eigen::Index n = 0; n < 16; ++n) {
        const double fd = oracle::second_difference(
            [&](double tau) { return oracle::plain_eigen(h0 + tau * v).values(n); }, 0.0, 1e-3);
        EXPECT_LT(oracle::relative_error(level_curvature(n, in), fd), 1e-4) << "level " << n;
    }
}

TEST(LevelCurvature, SumRule) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto in = inputs_for(oracle::random_hermitian(8, rng), oracle::random_hermitian(8, rng), 3);
        double sum = 0.0;
        double abs_sum = 0.0;
        for (Eigen::Index n = 0; n < 8; ++n) {
            const double k = level_curvature(n, in);
            sum += k;
            abs_sum += std::abs(k);
        }
        EXPECT_LE(std::abs(sum), 1e-9 * abs_sum);
    }
}

TEST(BoundB, Arithmetic) {
    EXPECT_DOUBLE_EQ(bound_b(spectrum({0.0, 4.0})), 4.0);
    EXPECT_DOUBLE_EQ(bound_b(spectrum({0.0, 1.0, 2.0, 3.0})), 8.0 * std::sqrt(11.0 / 6.0));
}

TEST(BoundB, DegenerateGroundStateRejected) {
    EXPECT_THROW(bound_b(spectrum({0.0, 0.0, 1.0})), DegenerateSpectrumError);
    EXPECT_THROW(bound_b(spectrum({1.0})), ValidationError);
}

TEST(BoundBPrime, RatioAndScaleSwitch) {
    const RVector e = spectrum({0.0, 1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(bound_b_prime(e, 2, b_prime_width(BPrimeScale::InversePowerOfTwo, 2)),
                     8.0 / (4.0 * std::sqrt(6.0)) * std::sqrt(11.0 / 6.0));
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 5; ++n) {
        const RVector s = oracle::plain_eigen(oracle::random_hermitian(Eigen::Index{1} << n, rng)).values;
        const double a = b_prime_width(BPrimeScale::InversePowerOfTwo, n);
        EXPECT_NEAR(bound_b_prime(s, n, a) / bound_b(s), a / std::sqrt(3.0 * n), 1e-15);
        const double ratio = bound_b_prime(s, n, b_prime_width(BPrimeScale::InverseQubits, n)) / bound_b_prime(s, n, a);
        EXPECT_NEAR(ratio, std::ldexp(1.0, n) / n, 1e-13);
    }
    EXPECT_THROW(bound_b_prime(e, 2, 0.0), ValidationError);
}

TEST(SaturationIndex, Examples) {
    EXPECT_DOUBLE_EQ(saturation_index(0.0, 3.0, -4.0), -6.0);
    EXPECT_EQ(saturation_index(0.0, 3.0, 0.0), 0.0);
}

TEST(BoundRecord, RandomSamplesSatisfyTheBound) {
    std::mt19937_64 rng(99);
    for (int n : {2, 3}) {
        const Eigen::Index dim = Eigen::Index{1} << n;
        for (int t = 0; t < 50; ++t) {
            const auto in = inputs_for(oracle::random_hermitian(dim, rng), oracle::random_hermitian(dim, rng), n);
            const BoundRecord r = make_bound_record(in, b_prime_width(BPrimeScale::InversePowerOfTwo, n), 7);
            EXPECT_GT(r.b, 0.0);
            EXPECT_GT(r.b_prime, 0.0);
            EXPECT_FALSE(r.violates_b());
            EXPECT_LT(r.delta, 0.0);
            EXPECT_EQ(r.delta, r.dq_abs - r.b * std::sqrt(std::abs(r.k0)));
            EXPECT_EQ(r.seed, 7u);
        }
    }
}

TEST(BoundB, ModelADefaultRegression) {
    const PerturbedModel m = model_a(ModelConfig{.family = ModelFamily::A, .n_qubits = 3});
    const auto d = eigensystem(m.h0);
    // Independent spectrum from Kronecker products.
    CMatrix h = CMatrix::Zero(8, 8);
    const double fields[] = {0.1, 0.2, 0.3};
    for (int j = 0; j < 3; ++j) h += fields[j] * oracle::kron_embed(oracle::pauli_matrix('z'), j, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            for (char ax : {'x', 'y', 'z'}) {
                h += 0.5 * oracle::kron_embed(oracle::pauli_matrix(ax), i, 3) *
                     oracle::kron_embed(oracle::pauli_matrix(ax), j, 3);
            }
        }
    }
    const RVector e = oracle::plain_eigen(h).values;
    double sum = 0.0;
    for (Eigen::Index k = 1; k < 8; ++k) sum += 1.0 / (e(k) - e(0));
    EXPECT_NEAR(bound_b(d), 8.0 * std::sqrt(sum), 1e-12);
    EXPECT_NEAR(bound_b(d), 24.844450458020432, 1e-9);
    EXPECT_NEAR(bound_b_prime(d, 3, 0.125), 24.844450458020432 * 0.125 / 3.0, 1e-9);
}

namespace {

// Two-qubit H0 with levels (0, g, 1, 1.7) in a random eigenbasis.
EntanglementInputs near_crossing(double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto u = oracle::plain_eigen(oracle::random_hermitian(4, rng)).vectors;
    RVector e(4);
    e << 0.0, gap, 1.0, 1.7;
    const CMatrix h0 = u * e.cast<Complex>().asDiagonal() * u.adjoint();
    return inputs_for(h0, oracle::random_hermitian(4, rng), 2);
}

} // namespace

TEST(TwoLevelRates, TruncationIdentities) {
    const auto in = near_crossing(0.05, 3);
    const auto r = two_level_rates(in, QubitPartition::single(0, 2));
    EXPECT_EQ(r.k0, -r.k1);
    EXPECT_TRUE(r.k0 < 0.0 && r.k1 > 0.0);
    EXPECT_NEAR(r.rate0_from_curvature, r.rate0, 1e-12 * std::max(1.0, std::abs(r.rate0)));
    EXPECT_NEAR(r.rate0_from_sqrt_curvature, r.rate0, 1e-12 * std::max(1.0, std::abs(r.rate0)));
    EXPECT_NEAR(r.ratio_from_phase, r.ratio, 1e-10 * std::max(1.0, std::abs(r.ratio)));
    EXPECT_EQ(r.ratio, r.rate1 / r.rate0);
    EXPECT_NEAR(r.phi, std::arg(in.v_eig(0, 1)), 0.0);
}

TEST(TwoLevelRates, NearCrossingApproximatesExactRate) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto in = near_crossing(1e-3, seed);
        const auto r = two_level_rates(in, QubitPartition::single(0, 2));
        EXPECT_LT(oracle::relative_error(r.rate0, r.exact_rate0), 0.05) << "seed " << seed;
        EXPECT_LT(oracle::relative_error(r.rate1, r.exact_rate1), 0.05) << "seed " << seed;
    }
}

TEST(TwoLevelRates, DominanceCheck) {
    EXPECT_THROW(two_level_rates(near_crossing(0.5, 1), QubitPartition::single(0, 2)), ApproximationError);
}

TEST(EnsembleRatios, PrintedValuesAndScaleInvariance) {
    const auto r = ensemble_delta_q_ratios();
    EXPECT_NEAR(r.ratio_goe_gue, 0.84, 0.005);
    EXPECT_NEAR(r.ratio_goe_gse, 0.70, 0.005);
    const auto s = ensemble_delta_q_ratios(7.3);
    EXPECT_NEAR(s.ratio_goe_gue, r.ratio_goe_gue, 1e-15);
    EXPECT_NEAR(s.ratio_goe_gse, r.ratio_goe_gse, 1e-15);
    EXPECT_THROW(ensemble_delta_q_ratios(0.0), ValidationError);
}
