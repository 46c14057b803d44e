#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "numeric.hpp"
#include "partial_fraction.hpp"

namespace aoi {

/// One rate of an exponential polynomial: (c_0 + c_1 x + ... + c_K x^K) e^{-rate x}.
template <class Real = double>
struct ExpTerm {
    Real rate;
    std::vector<Real> coeffs;
};

/// sum_i P_i(x) e^{-d_i x} with d_i > 0, one entry per distinct rate.
template <class Real = double>
class ExpPoly {
public:
    ExpPoly() = default;

    /// c x^power e^{-rate x}
    static ExpPoly monomial(const Real& rate, const Real& c, std::size_t power = 0)
    {
        ExpPoly f;
        f.add_term(rate, power, c);
        f.canonicalize();
        return f;
    }

    /// P(x) e^{-rate x}
    static ExpPoly from_polynomial(const Real& rate, std::vector<Real> coeffs)
    {
        ExpPoly f;
        for (std::size_t k = 0; k < coeffs.size(); ++k) f.add_term(rate, k, coeffs[k]);
        f.canonicalize();
        return f;
    }

    const std::vector<ExpTerm<Real>>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add_term(const Real& rate, std::size_t power, const Real& c)
    {
        ExpTerm<Real>& t = term_for(rate);
        if (t.coeffs.size() <= power) t.coeffs.resize(power + 1, Real(0));
        t.coeffs[power] += c;
    }

    /// The entry for `rate`, created empty if absent. References are
    /// invalidated by the next insertion.
    ExpTerm<Real>& term_for(const Real& rate)
    {
        if (!(rate > Real(0))) throw std::domain_error("exponential polynomial rates must be > 0");
        for (auto& t : terms_) {
            if (t.rate == rate) return t;
        }
        for (auto& t : terms_) {
            if (PartialFraction<Real>::same_rate(t.rate, rate)) return t;
        }
        terms_.push_back({rate, {}});
        return terms_.back();
    }

    /// Merges rates within the pole tolerance, sorts by rate, and trims trailing
    /// coefficients whose L1 mass |c_k| k!/d^{k+1} is negligible against the
    /// largest such mass.
    void canonicalize()
    {
        std::vector<ExpTerm<Real>> merged;
        std::sort(terms_.begin(), terms_.end(),
                  [](const ExpTerm<Real>& a, const ExpTerm<Real>& b) { return a.rate < b.rate; });
        for (auto& t : terms_) {
            if (!merged.empty() && PartialFraction<Real>::same_rate(merged.back().rate, t.rate)) {
                auto& dst = merged.back().coeffs;
                if (dst.size() < t.coeffs.size()) dst.resize(t.coeffs.size(), Real(0));
                for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst[k] += t.coeffs[k];
            } else {
                merged.push_back(std::move(t));
            }
        }
        terms_ = std::move(merged);

        using std::abs;
        Real largest(0);
        for (const auto& t : terms_) {
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) largest = std::max(largest, mass(t, k));
        }
        const Real threshold = tolerances<Real>::coeff() * largest;
        for (auto& t : terms_) {
            while (!t.coeffs.empty() &&
                   (t.coeffs.back() == Real(0) || mass(t, t.coeffs.size() - 1) <= threshold)) {
                t.coeffs.pop_back();
            }
        }
        std::erase_if(terms_, [](const ExpTerm<Real>& t) { return t.coeffs.empty(); });
    }

    std::size_t degree() const
    {
        std::size_t deg = 0;
        for (const auto& t : terms_) deg = std::max(deg, t.coeffs.size() - 1);
        return deg;
    }

private:
    static Real mass(const ExpTerm<Real>& t, std::size_t k)
    {
        using std::abs;
        Real m = abs(t.coeffs[k]) / t.rate;
        for (std::size_t i = 1; i <= k; ++i) m = m * Real(static_cast<double>(i)) / t.rate;
        return m;
    }

    std::vector<ExpTerm<Real>> terms_;
};

template <class Real>
ExpPoly<Real> ep_add(const ExpPoly<Real>& a, const ExpPoly<Real>& b)
{
    ExpPoly<Real> out = a;
    for (const auto& t : b.terms()) {
        for (std::size_t k = 0; k < t.coeffs.size(); ++k) out.add_term(t.rate, k, t.coeffs[k]);
    }
    out.canonicalize();
    return out;
}

template <class Real>
ExpPoly<Real> ep_scale(const ExpPoly<Real>& a, const Real& c)
{
    ExpPoly<Real> out;
    if (c == Real(0)) return out;
    for (const auto& t : a.terms()) {
        for (std::size_t k = 0; k < t.coeffs.size(); ++k) out.add_term(t.rate, k, c * t.coeffs[k]);
    }
    out.canonicalize();
    return out;
}

/// Inverse transform, term by term: a_m/(s+d)^m -> a_m x^{m-1} e^{-dx}/(m-1)!.
template <class Real>
ExpPoly<Real> pf_to_exppoly(const PartialFraction<Real>& a)
{
    ExpPoly<Real> out;
    for (const auto& pole : a.poles()) {
        Real fact(1);  // (m-1)!
        for (std::size_t m = 1; m <= pole.coeffs.size(); ++m) {
            if (m > 1) fact *= Real(static_cast<double>(m - 1));
            if (pole.coeffs[m - 1] != Real(0)) out.add_term(pole.rate, m - 1, pole.coeffs[m - 1] / fact);
        }
    }
    out.canonicalize();
    return out;
}

/// Laplace transform: c_k x^k e^{-dx} -> c_k k!/(s+d)^{k+1}.
template <class Real>
PartialFraction<Real> ep_to_pf(const ExpPoly<Real>& f)
{
    PartialFraction<Real> out;
    for (const auto& t : f.terms()) {
        Real fact(1);
        for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
            if (k > 0) fact *= Real(static_cast<double>(k));
            if (t.coeffs[k] != Real(0)) out.add_term(t.rate, k + 1, t.coeffs[k] * fact);
        }
    }
    out.canonicalize();
    return out;
}

template <class Real>
Real ep_eval(const ExpPoly<Real>& f, const Real& x)
{
    std::vector<Real> rates;
    rates.reserve(f.terms().size());
    for (const auto& t : f.terms()) rates.push_back(t.rate);
    const std::vector<Real> decay = decay_factors(rates, x);
    CompensatedSum<Real> acc;
    for (std::size_t i = 0; i < f.terms().size(); ++i) {
        const auto& t = f.terms()[i];
        Real poly(0);
        for (std::size_t k = t.coeffs.size(); k-- > 0;) poly = poly * x + t.coeffs[k];
        acc += poly * decay[i];
    }
    return acc.value();
}

/// The antiderivative identity: int_x^inf t^k e^{-dt} dt = e^{-dx} sum_{j<=k} k!/(j! d^{k-j+1}) x^j.
/// Returns the tail function x -> int_x^inf f as an exponential polynomial.
template <class Real>
ExpPoly<Real> ep_tail_function(const ExpPoly<Real>& f)
{
    ExpPoly<Real> out;
    for (const auto& t : f.terms()) {
        const std::size_t deg = t.coeffs.size() - 1;
        std::vector<Real> tail(deg + 1, Real(0));
        for (std::size_t k = 0; k <= deg; ++k) {
            if (t.coeffs[k] == Real(0)) continue;
            // k!/(j! d^{k-j+1}) built from j = k downward
            Real w = Real(1) / t.rate;
            for (std::size_t j = k + 1; j-- > 0;) {
                tail[j] += t.coeffs[k] * w;
                if (j > 0) w = w * Real(static_cast<double>(j)) / t.rate;
            }
        }
        for (std::size_t j = 0; j <= deg; ++j) out.add_term(t.rate, j, tail[j]);
    }
    out.canonicalize();
    return out;
}

template <class Real>
Real ep_integral(const ExpPoly<Real>& f)
{
    CompensatedSum<Real> acc;
    for (const auto& t : f.terms()) {
        Real w = Real(1) / t.rate;  // k!/d^{k+1}
        for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
            if (k > 0) w = w * Real(static_cast<double>(k)) / t.rate;
            acc += t.coeffs[k] * w;
        }
    }
    return acc.value();
}

template <class Real>
Real ep_tail(const ExpPoly<Real>& f, const Real& x)
{
    if (x < Real(0)) throw std::domain_error("ep_tail: x must be >= 0");
    if (x == Real(0)) return ep_integral(f);
    return ep_eval(ep_tail_function(f), x);
}

/// int_0^x f
template <class Real>
Real ep_cdf(const ExpPoly<Real>& f, const Real& x)
{
    if (x <= Real(0)) return Real(0);
    return ep_integral(f) - ep_tail(f, x);
}

/// int_0^inf x^k f(x) dx = sum c_j (j+k)!/d^{j+k+1}
template <class Real>
Real ep_moment(const ExpPoly<Real>& f, int k)
{
    if (k < 0) throw std::domain_error("ep_moment: order must be >= 0");
    CompensatedSum<Real> acc;
    for (const auto& t : f.terms()) {
        Real w = Real(1) / t.rate;  // k!/d^{k+1}
        for (int i = 1; i <= k; ++i) w = w * Real(i) / t.rate;
        for (std::size_t j = 0; j < t.coeffs.size(); ++j) {
            if (j > 0) w = w * Real(static_cast<double>(j) + k) / t.rate;
            acc += t.coeffs[j] * w;
        }
    }
    return acc.value();
}

/// x_eps with int_{x_eps}^inf f = eps, by bisection on the closed-form tail.
template <class Real>
double ep_quantile(const ExpPoly<Real>& f, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("ep_quantile: eps must lie in (0, 1)");
    const ExpPoly<Real> tail = ep_tail_function(f);
    auto excess = [&](double x) { return static_cast<double>(ep_eval(tail, Real(x))) - eps; };
    double lo = 0.0;
    double hi = 1.0;
    Real min_rate(0);
    for (const auto& t : f.terms()) min_rate = (min_rate == Real(0) || t.rate < min_rate) ? t.rate : min_rate;
    if (min_rate > Real(0)) hi = 1.0 / static_cast<double>(min_rate);
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw std::domain_error("ep_quantile: tail does not decay");
    }
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double e = excess(mid);
        if (std::abs(e) <= 1e-12 || mid == lo || mid == hi) return mid;
        (e > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// int_0^x g(y) h(x-y) dy as an exponential polynomial, computed as the
/// inverse of the product of the two transforms.
template <class Real>
ExpPoly<Real> ep_convolve(const ExpPoly<Real>& g, const ExpPoly<Real>& h)
{
    return pf_to_exppoly(pf_multiply(ep_to_pf(g), ep_to_pf(h)));
}

/// x -> int_0^x g(x0) Hbar(x - x0) dx0 with Hbar the tail of h.
template <class Real>
ExpPoly<Real> ep_convolve_tail_closed(const ExpPoly<Real>& g, const ExpPoly<Real>& h)
{
    if (g.empty() || h.empty()) return {};
    return ep_convolve(g, ep_tail_function(h));
}

template <class Real>
Real ep_convolve_density_with_tail(const ExpPoly<Real>& g, const ExpPoly<Real>& h, const Real& x)
{
    return ep_eval(ep_convolve_tail_closed(g, h), x);
}

} // namespace aoi
