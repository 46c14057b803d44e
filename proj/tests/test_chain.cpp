#include <gtest/gtest.h>

#include <aoi/chain.hpp>

#include "oracles.hpp"

using aoi::SystemParams;
using aoi::wide_real;

namespace {

template <class T>
double d(const T& x)
{
    return static_cast<double>(x);
}

template <class Real>
class ChainWorked : public ::testing::Test {};
using Scalars = ::testing::Types<double, wide_real>;
TYPED_TEST_SUITE(ChainWorked, Scalars, oracle::ScalarName);

TYPED_TEST(ChainWorked, StationaryLawTwoSlots)
{
    const auto fwd = aoi::build_forward<TypeParam>({1.0, 1.0, 2});
    EXPECT_NEAR(d(fwd.p[0]), 0.5, 1e-12);
    EXPECT_NEAR(d(fwd.p[1]), 1.0 / 3, 1e-12);
    EXPECT_NEAR(d(fwd.p[2]), 1.0 / 6, 1e-12);
    EXPECT_NEAR(d(fwd.n_bar), 2.0 / 3, 1e-12);
    EXPECT_NEAR(d(fwd.lambda_hat), 2.0 / 3, 1e-12);
}

TYPED_TEST(ChainWorked, StationaryLawOneSlot)
{
    const auto fwd = aoi::build_forward<TypeParam>({1.0, 1.0, 1});
    EXPECT_NEAR(d(fwd.p[0]), 0.5, 1e-12);
    EXPECT_NEAR(d(fwd.p[1]), 0.5, 1e-12);
    EXPECT_NEAR(d(fwd.n_bar), 0.5, 1e-12);
    EXPECT_NEAR(d(fwd.lambda_hat), 0.5, 1e-12);
}

TYPED_TEST(ChainWorked, SecondStateGeneralRates)
{
    for (auto [l, m] : {std::pair{0.3, 2.0}, {1.7, 0.4}, {3.0, 3.0}}) {
        const auto fwd = aoi::build_forward<TypeParam>({l, m, 2});
        EXPECT_NEAR(d(fwd.p[1]), 2 * l * m / ((l + m) * (l + 2 * m)), 1e-12);
    }
}

TYPED_TEST(ChainWorked, ReversedRatesTwoSlots)
{
    const auto fwd = aoi::build_forward<TypeParam>({1.0, 1.0, 2});
    const auto rev = aoi::build_reversed(fwd);
    EXPECT_NEAR(d(rev.lambda_prime[1]), 1.5, 1e-12);
    EXPECT_NEAR(d(rev.lambda_prime[2]), 2.0, 1e-12);
    EXPECT_NEAR(d(rev.mu_prime[0][1]), 2.0 / 3, 1e-12);
    EXPECT_NEAR(d(rev.mu_prime[0][2]), 1.0 / 3, 1e-12);
    EXPECT_NEAR(d(rev.mu_prime[1][2]), 0.5, 1e-12);
    const double want[] = {1, 2, 2};
    for (int n = 0; n <= 2; ++n) {
        EXPECT_NEAR(d(rev.d_prime[n]), want[n], 1e-12);
        EXPECT_NEAR(d(fwd.d_tilde[n]), want[n], 1e-12);
    }
}

TYPED_TEST(ChainWorked, ReversedRatesOneSlot)
{
    const auto rev = aoi::build_reversed(aoi::build_forward<TypeParam>({1.0, 1.0, 1}));
    EXPECT_NEAR(d(rev.lambda_prime[1]), 1.0, 1e-12);
    EXPECT_NEAR(d(rev.mu_prime[0][1]), 1.0, 1e-12);
}

TYPED_TEST(ChainWorked, PalmWeightsTwoSlots)
{
    const auto w = aoi::palm_weights(aoi::build_forward<TypeParam>({1.0, 1.0, 2}));
    ASSERT_EQ(w.size(), 3u);
    EXPECT_NEAR(d(w.weight(1, 0)), 0.5, 1e-12);
    EXPECT_NEAR(d(w.weight(2, 0)), 0.25, 1e-12);
    EXPECT_NEAR(d(w.weight(2, 1)), 0.25, 1e-12);
}

TYPED_TEST(ChainWorked, PalmWeightsOneSlot)
{
    const auto w = aoi::palm_weights(aoi::build_forward<TypeParam>({1.0, 1.0, 1}));
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NEAR(d(w.weight(1, 0)), 1.0, 1e-15);
}

TEST(Chain, GeneratorStructure)
{
    const SystemParams p{0.7, 1.9, 5};
    const auto fwd = aoi::build_forward(p);
    for (int i = 0; i <= 5; ++i) {
        for (int j = 0; j <= 5; ++j) {
            double want = 0.0;
            if (j == i + 1) want = 0.7;
            if (j < i) want = 1.9;
            if (j == i) want = -((i < 5 ? 0.7 : 0.0) + i * 1.9);
            EXPECT_DOUBLE_EQ(fwd.q[i][j], want) << i << "," << j;
        }
    }
}

TEST(Chain, RejectsBadParams)
{
    EXPECT_THROW(aoi::build_forward({0.0, 1.0, 1}), aoi::parameter_error);
    EXPECT_THROW(aoi::build_forward({1.0, -1.0, 1}), aoi::parameter_error);
    EXPECT_THROW(aoi::build_forward({1.0, 1.0, 0}), aoi::parameter_error);
    EXPECT_THROW(aoi::build_forward({1.0, 1.0, 65}), aoi::parameter_error);
    EXPECT_THROW(aoi::build_forward({std::nan(""), 1.0, 1}), aoi::parameter_error);
    EXPECT_NO_THROW(aoi::build_forward({1.0, 1.0, 64}));
    EXPECT_NO_THROW(aoi::build_forward({1.0, 1.0, 100}, 128));
}

class ChainSweep : public ::testing::TestWithParam<SystemParams> {};

TEST_P(ChainSweep, ClosedFormMatchesBalanceSolve)
{
    const auto fwd = aoi::build_forward(GetParam());
    const auto ref = oracle::balance_solve(GetParam());
    double total = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n) {
        EXPECT_NEAR(fwd.p[n], ref[n], 1e-10) << "n=" << n;
        EXPECT_GT(fwd.p[n], 0.0);
        total += fwd.p[n];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST_P(ChainSweep, GlobalBalance)
{
    const auto fwd = aoi::build_forward(GetParam());
    const int n_states = static_cast<int>(fwd.states());
    for (int n = 0; n < n_states; ++n) {
        double inflow = 0.0;
        for (int j = 0; j < n_states; ++j) {
            if (j != n) inflow += fwd.p[j] * fwd.q[j][n];
        }
        EXPECT_NEAR(inflow, fwd.p[n] * fwd.d_tilde[n], 1e-12);
    }
}

TEST_P(ChainSweep, DetailedFlowAndExitRates)
{
    const auto fwd = aoi::build_forward<wide_real>(GetParam());
    const auto rev = aoi::build_reversed(fwd);
    const int n_states = static_cast<int>(fwd.states());
    for (int i = 0; i < n_states; ++i) {
        for (int j = 0; j < n_states; ++j) {
            if (i == j) continue;
            const wide_real lhs = fwd.p[i] * rev.q_prime[i][j];
            const wide_real rhs = fwd.p[j] * fwd.q[j][i];
            const double scale = std::max(d(abs(lhs)), d(abs(rhs)));
            if (scale > 0) {
                EXPECT_LE(d(abs(lhs - rhs)) / scale, 1e-10) << i << "->" << j;
            }
        }
        EXPECT_LE(d(abs(rev.d_prime[i] - fwd.d_tilde[i]) / fwd.d_tilde[i]), 1e-10);
    }
}

TEST_P(ChainSweep, DetailedFlowInDouble)
{
    const auto fwd = aoi::build_forward(GetParam());
    const auto rev = aoi::build_reversed(fwd);
    for (std::size_t n = 0; n < fwd.states(); ++n) {
        EXPECT_LE(std::abs(rev.d_prime[n] - fwd.d_tilde[n]) / fwd.d_tilde[n], 1e-10);
    }
}

TEST_P(ChainSweep, PalmWeightsNormalizedAndMatchReversedForm)
{
    const auto fwd = aoi::build_forward<wide_real>(GetParam());
    const auto rev = aoi::build_reversed(fwd);
    const auto w = aoi::palm_weights(fwd);
    wide_real total = 0;
    for (const auto& x : w.weights) total += x;
    EXPECT_NEAR(d(total), 1.0, 1e-12);

    // The alternative normalization: weight proportional to the reversed
    // batch-arrival flow p_n mu'_{n, n'}.
    wide_real eta_inv = 0;
    for (const auto& pr : w.pairs) eta_inv += fwd.p[pr.n] * rev.mu_prime[pr.n][pr.n_prime];
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        const wide_real alt = fwd.p[n] * rev.mu_prime[n][np] / eta_inv;
        EXPECT_LE(d(abs(alt - w.weights[i]) / w.weights[i]), 1e-10);
    }
    EXPECT_LE(d(abs(eta_inv - fwd.lambda_hat) / fwd.lambda_hat), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Random, ChainSweep, ::testing::ValuesIn(oracle::sweep_cases(7, 4)));
INSTANTIATE_TEST_SUITE_P(Edges, ChainSweep,
                         ::testing::Values(SystemParams{1, 1, 1}, SystemParams{1, 1, 20}, SystemParams{4, 0.25, 20},
                                           SystemParams{0.25, 4, 20}, SystemParams{2, 1, 40}));

} // namespace
