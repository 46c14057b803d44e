#include <gtest/gtest.h>

#include <aoi/age.hpp>
#include <aoi/sim.hpp>

#include "oracles.hpp"

using aoi::SimConfig;
using aoi::SystemParams;

namespace {

SimConfig config(SystemParams p, std::uint64_t messages, std::uint64_t seed = 1)
{
    SimConfig c;
    c.params = p;
    c.n_messages = messages;
    c.seed = seed;
    return c;
}

TEST(Sim, OneSlotMeanAge)
{
    const auto r = aoi::simulate(config({1, 1, 1}, 1000000, 3));
    const auto est = aoi::batch_means(r);
    EXPECT_LE(std::abs(est.mean - 2.5), 3 * est.se);
    EXPECT_LE(std::abs(r.mean_age_timeavg - 2.5), 3 * est.se);
}

TEST(Sim, OneSlotEveryDeliveryInformative)
{
    for (auto p : {SystemParams{1, 1, 1}, SystemParams{5, 0.3, 1}, SystemParams{0.2, 3, 1}}) {
        const auto r = aoi::simulate(config(p, 50000));
        EXPECT_EQ(r.counters.obsolete, 0u);
        EXPECT_EQ(r.counters.informative, r.counters.delivered);
    }
}

TEST(Sim, TwoSlotOccupancyAcrossReplications)
{
    const double want[] = {0.5, 1.0 / 3, 1.0 / 6};
    std::vector<std::vector<double>> share(3);
    for (std::uint64_t seed = 1; seed <= 32; ++seed) {
        const auto r = aoi::simulate(config({1, 1, 2}, 100000, seed));
        double total = 0.0;
        for (double v : r.z_occupancy) total += v;
        for (int n = 0; n < 3; ++n) share[n].push_back(r.z_occupancy[n] / total);
    }
    for (int n = 0; n < 3; ++n) {
        const auto s = oracle::summarize(share[n]);
        EXPECT_LE(std::abs(s.mean - want[n]), 3 * s.se) << "state " << n;
    }
}

TEST(Sim, OccupancyConvergesToStationaryLaw)
{
    for (int imax : {1, 2, 3, 5}) {
        const SystemParams p{1.3, 0.9, imax};
        const auto r = aoi::simulate(config(p, 1000000, 77));
        const auto ref = oracle::balance_solve(p);
        double total = 0.0;
        for (double v : r.z_occupancy) total += v;
        double tv = 0.0;
        for (int n = 0; n <= imax; ++n) tv += std::abs(r.z_occupancy[n] / total - ref[n]);
        EXPECT_LT(tv / 2, 0.01) << "i_max " << imax;
    }
}

TEST(Sim, CountersAndWindowConsistent)
{
    for (auto p : {SystemParams{1, 1, 2}, SystemParams{3, 0.5, 6}, SystemParams{1, 2, 20}}) {
        const auto r = aoi::simulate(config(p, 200000, 9));
        const auto& c = r.counters;
        EXPECT_EQ(c.generated, 200000u);
        EXPECT_LE(c.informative, c.delivered);
        EXPECT_LE(c.delivered, c.generated);
        EXPECT_EQ(c.generated, c.delivered + c.in_flight + c.dropped);
        EXPECT_EQ(c.delivered, c.informative + c.obsolete);
        double total = 0.0;
        for (double v : r.z_occupancy) total += v;
        EXPECT_NEAR(total, r.observed(), 1e-9 * r.observed());
        EXPECT_GE(r.window_start(), r.config.warmup_fraction * r.horizon);
        EXPECT_LE(r.window_end(), r.horizon);
        ASSERT_EQ(r.informative_ages.size(), r.informative_times.size());
        for (std::size_t i = 0; i < r.informative_ages.size(); ++i) EXPECT_GT(r.informative_ages[i], 0.0);
    }
}

TEST(Sim, PalmEstimatorEqualsTimeAverage)
{
    for (auto p : {SystemParams{1, 1, 1}, SystemParams{2, 0.5, 4}, SystemParams{1, 1, 20}}) {
        const auto r = aoi::simulate(config(p, 300000, 4));
        EXPECT_LE(std::abs(r.mean_age_palm - r.mean_age_timeavg) / r.mean_age_timeavg, 1e-9);
        EXPECT_EQ(aoi::estimate_mean_palm(r), r.mean_age_palm);
    }
}

TEST(Sim, InterArrivalMeanMatchesIntensity)
{
    const SystemParams p{1, 0.5, 20};
    const auto fwd = aoi::build_forward(p);
    const auto r = aoi::simulate(config(p, 1000000, 12));
    const std::size_t n = r.cycles();
    std::vector<double> batch;
    for (std::size_t b = 0; b < 32; ++b) {
        const std::size_t lo = b * n / 32, hi = (b + 1) * n / 32;
        batch.push_back((r.informative_times[hi] - r.informative_times[lo]) / static_cast<double>(hi - lo));
    }
    const auto s = oracle::summarize(batch);
    EXPECT_LE(std::abs(s.mean - 1.0 / fwd.lambda_hat), 3 * s.se);
}

TEST(Sim, Deterministic)
{
    const auto a = aoi::simulate(config({1.5, 0.7, 5}, 100000, 42));
    const auto b = aoi::simulate(config({1.5, 0.7, 5}, 100000, 42));
    EXPECT_EQ(a.informative_ages, b.informative_ages);
    EXPECT_EQ(a.informative_times, b.informative_times);
    EXPECT_EQ(a.z_occupancy, b.z_occupancy);
    EXPECT_EQ(a.mean_age_timeavg, b.mean_age_timeavg);
    const auto c = aoi::simulate(config({1.5, 0.7, 5}, 100000, 43));
    EXPECT_NE(a.informative_times, c.informative_times);
}

TEST(Sim, EmpiricalCdfLimits)
{
    const auto r = aoi::simulate(config({1, 1, 3}, 100000));
    EXPECT_EQ(aoi::empirical_age_cdf(r, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(aoi::empirical_age_cdf(r, 1e9), 1.0);
    EXPECT_DOUBLE_EQ(aoi::empirical_arrival_ccdf(r, 0.0), 1.0);
    EXPECT_EQ(aoi::empirical_arrival_ccdf(r, 1e9), 0.0);
}

TEST(Sim, OneSlotCdfMatchesAnalytic)
{
    const auto d = aoi::age_density<double>({1, 1, 1});
    const auto r = aoi::simulate(config({1, 1, 1}, 1000000, 8));
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(15.0 * i / 400);
    const double sup = aoi::sup_distance(grid, [&](double x) { return aoi::age_cdf(d, x); },
                                         [&](double x) { return aoi::empirical_age_cdf(r, x); });
    EXPECT_LT(sup, 0.01);
    // the analytic median splits the sample path in half
    EXPECT_NEAR(aoi::empirical_age_cdf(r, aoi::age_quantile(d, 0.5)), 0.5, 0.005);
}

TEST(Sim, HandBuiltCycle)
{
    aoi::SimResult r;
    r.informative_times = {0.0, 2.0};
    r.informative_ages = {1.0, 0.5};
    EXPECT_DOUBLE_EQ(aoi::estimate_mean_palm(r), 2.0);
    EXPECT_DOUBLE_EQ(aoi::empirical_age_cdf(r, 2.0), 0.5);
}

TEST(Sim, InsufficientData)
{
    const auto r = aoi::simulate(config({1, 1, 1}, 1));
    EXPECT_THROW(aoi::estimate_mean_palm(r), aoi::insufficient_data);
    EXPECT_THROW(aoi::batch_means(r), aoi::insufficient_data);
    EXPECT_TRUE(std::isnan(r.mean_age_palm));
}

TEST(Sim, RejectsBadConfig)
{
    EXPECT_THROW(aoi::simulate(config({1, 1, 0}, 10)), aoi::parameter_error);
    EXPECT_THROW(aoi::simulate(config({1, 1, 1}, 0)), aoi::parameter_error);
    auto c = config({1, 1, 1}, 10);
    c.warmup_fraction = 0.5;
    EXPECT_THROW(aoi::simulate(c), aoi::parameter_error);
}

TEST(Sim, KsDistanceOfExactSample)
{
    std::vector<double> s;
    for (int i = 0; i < 1000; ++i) s.push_back((i + 0.5) / 1000.0);
    EXPECT_NEAR(aoi::ks_distance(s, [](double x) { return x; }), 0.0005, 1e-12);
}

} // namespace
