#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "params.hpp"

namespace aoi {

struct SimConfig {
    SystemParams params;
    std::uint64_t n_messages = 100000;
    std::uint64_t seed = 1;
    double warmup_fraction = 0.05;

    void validate(int cap = default_i_max_cap) const
    {
        params.validate(cap);
        if (n_messages < 1) throw parameter_error("n_messages must be >= 1");
        if (!(warmup_fraction >= 0.0 && warmup_fraction < 0.5)) {
            throw parameter_error("warmup_fraction must lie in [0, 0.5), got " + std::to_string(warmup_fraction));
        }
    }
};

struct SimCounters {
    std::uint64_t generated = 0;
    std::uint64_t dropped = 0;
    std::uint64_t delivered = 0;
    std::uint64_t informative = 0;
    std::uint64_t obsolete = 0;
    std::uint64_t in_flight = 0;  // admitted but not delivered when the run stops
};

struct SimResult {
    SimConfig config;
    // Informative arrivals inside the observation window, in time order.
    std::vector<double> informative_ages;   // A_n
    std::vector<double> informative_times;  // T_n
    double mean_age_timeavg = std::numeric_limits<double>::quiet_NaN();
    double mean_age_palm = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> z_occupancy;  // time spent in each Z state over the window
    SimCounters counters;
    double horizon = 0.0;  // time of the last generation

    double window_start() const { return informative_times.empty() ? 0.0 : informative_times.front(); }
    double window_end() const { return informative_times.empty() ? 0.0 : informative_times.back(); }
    double observed() const { return window_end() - window_start(); }
    std::size_t cycles() const { return informative_times.empty() ? 0 : informative_times.size() - 1; }
};

namespace detail {

// Uniform on [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& g)
{
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& g, double rate)
{
    return -std::log1p(-unit_uniform(g)) / rate;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

struct Delivery {
    double time;
    double stamp;
    std::uint64_t seq;  // generation index; also breaks ties
};

struct LaterFirst {
    bool operator()(const Delivery& a, const Delivery& b) const
    {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

} // namespace detail

/// (sum_n A_n dT_n + dT_n^2 / 2) / observed horizon.
inline double estimate_mean_palm(const SimResult& r)
{
    if (r.informative_times.size() < 2 || r.informative_ages.size() != r.informative_times.size()) {
        throw insufficient_data("need at least 2 informative arrivals, got " +
                                std::to_string(r.informative_times.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < r.informative_times.size(); ++i) {
        const double dt = r.informative_times[i + 1] - r.informative_times[i];
        s += r.informative_ages[i] * dt + 0.5 * dt * dt;
    }
    return s / r.observed();
}

/// Event-driven run of the windowed channel.
inline SimResult simulate(const SimConfig& config)
{
    config.validate();
    const double lambda = config.params.lambda;
    const double mu = config.params.mu;
    const auto imax = static_cast<std::size_t>(config.params.i_max);

    auto arrivals = detail::substream(config.seed, 0);
    auto delays = detail::substream(config.seed, 1);

    // The arrival stream is drawn up front so the warmup cut is known.
    std::vector<double> gen(config.n_messages);
    double t = 0.0;
    for (auto& g : gen) {
        t += detail::exponential(arrivals, lambda);
        g = t;
    }

    SimResult r;
    r.config = config;
    r.horizon = gen.back();
    const double cutoff = config.warmup_fraction * r.horizon;

    std::priority_queue<detail::Delivery, std::vector<detail::Delivery>, detail::LaterFirst> heap;
    using Stamp = std::pair<double, std::uint64_t>;
    std::set<Stamp> live;  // in-flight messages newer than the freshest delivered one
    // the path starts as if a message stamped 0 arrived at 0
    Stamp freshest{0.0, 0};
    double now = 0.0;
    std::uint64_t seq = 1;

    bool open = false;
    double area = 0.0;
    std::vector<double> occ(imax + 1, 0.0);
    double committed_area = 0.0;
    std::vector<double> committed_occ(imax + 1, 0.0);

    auto advance = [&](double to) {
        if (open) {
            const double dt = to - now;
            const double a0 = now - freshest.first;
            area += dt * a0 + 0.5 * dt * dt;
            occ[live.size()] += dt;
        }
        now = to;
    };

    auto deliver = [&](const detail::Delivery& d) {
        advance(d.time);
        ++r.counters.delivered;
        const Stamp key{d.stamp, d.seq};
        if (key <= freshest) {
            ++r.counters.obsolete;
            return;
        }
        ++r.counters.informative;
        freshest = key;
        live.erase(live.begin(), live.upper_bound(key));
        if (!open && d.time >= cutoff) open = true;
        if (open) {
            r.informative_times.push_back(d.time);
            r.informative_ages.push_back(d.time - d.stamp);
            committed_area = area;
            committed_occ = occ;
        }
    };

    for (const double g : gen) {
        while (!heap.empty() && heap.top().time < g) {
            const auto d = heap.top();
            heap.pop();
            deliver(d);
        }
        advance(g);
        ++r.counters.generated;
        if (live.size() < imax) {
            live.insert({g, seq});
            heap.push({g + detail::exponential(delays, mu), g, seq});
        } else {
            ++r.counters.dropped;
        }
        ++seq;
    }
    r.counters.in_flight = heap.size();

    r.z_occupancy = std::move(committed_occ);
    if (r.informative_times.size() >= 2) {
        r.mean_age_timeavg = committed_area / r.observed();
        r.mean_age_palm = estimate_mean_palm(r);
    }
    return r;
}

/// Fraction of the observed window during which the age is <= x.
inline double empirical_age_cdf(const SimResult& r, double x)
{
    if (r.informative_times.size() < 2) throw insufficient_data("empty observation window");
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < r.informative_times.size(); ++i) {
        const double dt = r.informative_times[i + 1] - r.informative_times[i];
        s += std::clamp(x - r.informative_ages[i], 0.0, dt);
    }
    return std::min(1.0, s / r.observed());
}

/// Fraction of informative arrivals in the window with age > x.
inline double empirical_arrival_ccdf(const SimResult& r, double x)
{
    if (r.informative_ages.empty()) throw insufficient_data("no informative arrivals");
    const auto n = std::count_if(r.informative_ages.begin(), r.informative_ages.end(),
                                 [x](double a) { return a > x; });
    return static_cast<double>(n) / static_cast<double>(r.informative_ages.size());
}

struct MeanEstimate {
    double mean;
    double se;
};

/// Time-average age with a batch-means standard error. Cycles are split
/// into contiguous batches; each batch mean is its own area over length.
inline MeanEstimate batch_means(const SimResult& r, std::size_t batches = 32)
{
    const std::size_t n = r.cycles();
    if (n < batches || batches < 2) {
        throw insufficient_data("need at least " + std::to_string(batches) + " cycles, got " + std::to_string(n));
    }
    std::vector<double> means;
    means.reserve(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        double area = 0.0, len = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double dt = r.informative_times[i + 1] - r.informative_times[i];
            area += r.informative_ages[i] * dt + 0.5 * dt * dt;
            len += dt;
        }
        means.push_back(area / len);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(batches);
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    const double var = ss / static_cast<double>(batches - 1);
    return {estimate_mean_palm(r), std::sqrt(var / static_cast<double>(batches))};
}

/// sup_x |F(x) - F_n(x)| for a continuous F against the sample.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) throw insufficient_data("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// max over the grid of |a(x) - b(x)|; used for two continuous CDFs.
inline double sup_distance(const std::vector<double>& grid, const std::function<double(double)>& a,
                           const std::function<double(double)>& b)
{
    double d = 0.0;
    for (double x : grid) d = std::max(d, std::abs(a(x) - b(x)));
    return d;
}

} // namespace aoi
