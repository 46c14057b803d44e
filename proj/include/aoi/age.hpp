#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "exppoly.hpp"
#include "palm.hpp"

namespace aoi {

/// Stationary density of the age at an arbitrary instant.
template <class Real = double>
struct AgeDistribution {
    SystemParams params;
    Real lambda_hat = Real(0);
    ExpPoly<Real> density;
    ExpPoly<Real> ccdf;  // x -> int_x^inf density
};

/// f(x) = lambda_hat int_0^x int_{x-x0}^inf f_palm(x0, t1) dt1 dx0. The
/// mixture is separable, so each term is g convolved with the tail of h;
/// terms sharing the post-arrival state n share h and are summed first.
template <class Real>
AgeDistribution<Real> age_density(const Model<Real>& model)
{
    const int imax = model.forward.i_max();
    const auto& w = model.weights;
    std::vector<ExpPoly<Real>> by_state(static_cast<std::size_t>(imax));
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        for (const auto& t : model.behind.density(np, n).terms()) {
            auto& dst = by_state[n].term_for(t.rate).coeffs;
            if (dst.size() < t.coeffs.size()) dst.resize(t.coeffs.size(), Real(0));
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst[k] += w.weights[i] * t.coeffs[k];
        }
    }

    ExpPoly<Real> f;
    for (int n = 0; n < imax; ++n) {
        by_state[n].canonicalize();
        const ExpPoly<Real> part = ep_convolve_tail_closed(by_state[n], model.ahead.h[n]);
        for (const auto& t : part.terms()) {
            auto& dst = f.term_for(t.rate).coeffs;
            if (dst.size() < t.coeffs.size()) dst.resize(t.coeffs.size(), Real(0));
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst[k] += t.coeffs[k];
        }
    }
    f.canonicalize();

    AgeDistribution<Real> dist;
    dist.params = model.params();
    dist.lambda_hat = model.forward.lambda_hat;
    dist.density = ep_scale(f, dist.lambda_hat);
    dist.ccdf = ep_tail_function(dist.density);
    return dist;
}

template <class Real = double>
AgeDistribution<Real> age_density(const SystemParams& params)
{
    return age_density(Model<Real>::build(params));
}

template <class Real>
double age_pdf(const AgeDistribution<Real>& dist, double x)
{
    if (x < 0.0) return 0.0;
    return static_cast<double>(ep_eval(dist.density, Real(x)));
}

template <class Real>
double age_ccdf(const AgeDistribution<Real>& dist, double x)
{
    if (x <= 0.0) return 1.0;
    return static_cast<double>(ep_eval(dist.ccdf, Real(x)));
}

template <class Real>
double age_cdf(const AgeDistribution<Real>& dist, double x)
{
    return 1.0 - age_ccdf(dist, x);
}

/// x_eps with P[X > x_eps] = eps.
template <class Real>
double age_quantile(const AgeDistribution<Real>& dist, double eps)
{
    return ep_quantile(dist.density, eps);
}

template <class Real>
double age_moment(const AgeDistribution<Real>& dist, int k)
{
    return static_cast<double>(ep_moment(dist.density, k));
}

template <class Real>
double age_mean(const AgeDistribution<Real>& dist)
{
    return age_moment(dist, 1);
}

/// Coefficients c_0, c_1, ... of a polynomial test function.
struct Polynomial {
    std::vector<double> coeffs;
};

/// E[phi(X)] for a polynomial phi, from the closed-form moments.
template <class Real>
double expectation_of(const AgeDistribution<Real>& dist, const Polynomial& phi)
{
    CompensatedSum<Real> acc;
    for (std::size_t k = 0; k < phi.coeffs.size(); ++k) {
        if (phi.coeffs[k] != 0.0) acc += Real(phi.coeffs[k]) * ep_moment(dist.density, static_cast<int>(k));
    }
    return static_cast<double>(acc.value());
}

/// E[phi(X)] by adaptive Gauss-Kronrod quadrature. Points where phi jumps
/// should be passed as breakpoints; the integral is split there.
template <class Real>
double expectation_of(const AgeDistribution<Real>& dist, const std::function<double(double)>& phi,
                      std::vector<double> breakpoints = {})
{
    using boost::math::quadrature::gauss_kronrod;
    auto integrand = [&](double x) { return phi(x) * age_pdf(dist, x); };
    std::erase_if(breakpoints, [](double b) { return !(b > 0.0) || !std::isfinite(b); });
    std::sort(breakpoints.begin(), breakpoints.end());
    double total = 0.0;
    double lo = 0.0;
    constexpr unsigned max_depth = 30;
    constexpr double rel_tol = 1e-12;
    for (double b : breakpoints) {
        if (b <= lo) continue;
        total += gauss_kronrod<double, 31>::integrate(integrand, lo, b, max_depth, rel_tol);
        lo = b;
    }
    total += gauss_kronrod<double, 31>::integrate(integrand, lo, std::numeric_limits<double>::infinity(),
                                                  max_depth, rel_tol);
    return total;
}

/// E[X] through the Palm inversion formula with phi = identity:
/// lambda_hat * sum weight * (E[x0] E[t1] + E[t1^2] / 2), using the
/// conditional independence of x0 and t1 given (n', n).
template <class Real>
Real age_mean_from_cycles(const Model<Real>& model)
{
    const auto& w = model.weights;
    CompensatedSum<Real> acc;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        const auto& f_age = model.behind.transform(np, n + 1);
        const auto& f_cycle = model.ahead.f_tilde[n];
        acc += w.weights[i] *
               (pf_moment(f_age, 1) * pf_moment(f_cycle, 1) + pf_moment(f_cycle, 2) / Real(2));
    }
    return model.forward.lambda_hat * acc.value();
}

} // namespace aoi
