#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <numeric>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace aoi {

/// Extended-precision scalar used by the analytic engine for production
/// output. Partial-fraction coefficients of the backward components grow
/// like (rate ratio)^k / (pole gap)^k and cancel when summed, so at
/// i_max = 20 double precision loses every significant digit.
using wide_real = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<100>, boost::multiprecision::et_off>;

/// Tolerances that depend on the scalar type.
template <class Real>
struct tolerances {
    /// Poles closer than this (relative to the largest rate) are merged.
    static constexpr double pole = 1e-9;

    /// Trailing coefficients whose L1 mass is below this fraction of the
    /// largest term mass are trimmed.
    static Real coeff()
    {
        if constexpr (std::numeric_limits<Real>::digits10 <= 16) {
            return Real(1e-14);
        } else {
            return Real(100) * std::numeric_limits<Real>::epsilon();
        }
    }
};

/// Neumaier-compensated running sum.
template <class Real>
class CompensatedSum {
public:
    CompensatedSum& operator+=(const Real& x)
    {
        using std::abs;
        const Real t = sum_ + x;
        if (abs(sum_) >= abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    Real value() const { return sum_ + carry_; }

private:
    Real sum_ = Real(0);
    Real carry_ = Real(0);
};

template <class Real, class Range>
Real compensated_sum(const Range& values)
{
    CompensatedSum<Real> acc;
    for (const auto& v : values) acc += Real(v);
    return acc.value();
}

/// k! for k = 0..n, computed iteratively.
template <class Real>
std::vector<Real> factorial_table(std::size_t n)
{
    std::vector<Real> f(n + 1);
    f[0] = Real(1);
    for (std::size_t k = 1; k <= n; ++k) f[k] = f[k - 1] * Real(static_cast<double>(k));
    return f;
}

template <class Real>
Real factorial(std::size_t k)
{
    Real f(1);
    for (std::size_t i = 2; i <= k; ++i) f *= Real(static_cast<double>(i));
    return f;
}

/// Binomial coefficients C(n, k) for n = 0..n_max as a Pascal triangle.
template <class Real>
std::vector<std::vector<Real>> binomial_table(std::size_t n_max)
{
    std::vector<std::vector<Real>> c(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        c[n].assign(n + 1, Real(1));
        for (std::size_t k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
    }
    return c;
}

/// e^{-r x} for each rate. Wide exp is expensive, so for non-builtin
/// scalars the rates are visited in ascending order and each factor is the
/// previous one times e^{-gap x}; equal gaps (the usual case, rates being
/// lambda + n mu) share one exp.
template <class Real>
std::vector<Real> decay_factors(const std::vector<Real>& rates, const Real& x)
{
    using std::exp;
    std::vector<Real> out(rates.size());
    if constexpr (std::is_floating_point_v<Real>) {
        for (std::size_t i = 0; i < rates.size(); ++i) out[i] = exp(-rates[i] * x);
    } else {
        std::vector<std::size_t> order(rates.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
        std::vector<std::pair<Real, Real>> seen;  // (gap, e^{-gap x})
        Real prev_rate(0), prev(1);
        for (std::size_t i : order) {
            const Real gap = rates[i] - prev_rate;
            auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& e) { return e.first == gap; });
            if (it == seen.end()) {
                seen.emplace_back(gap, exp(-gap * x));
                it = std::prev(seen.end());
            }
            prev *= it->second;
            prev_rate = rates[i];
            out[i] = prev;
        }
    }
    return out;
}

template <class Real>
double to_double(const Real& x)
{
    return static_cast<double>(x);
}

} // namespace aoi
