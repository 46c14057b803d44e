#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "numeric.hpp"
#include "palm.hpp"

namespace aoi {

/// Pointwise evaluation of the age density straight from the explicit
/// double sum over (age pole d'_i, cycle pole d_j):
///
///   f(x) = lambda_hat sum_{n', n} p(n', n) sum_{i, j} e^{-x d_j}
///            sum_l c~_l(x) B_l(d'_i - d_j, x)
///
/// with c~ the convolution of the age polynomial coefficients with
/// z~_k(x) = sum_{l >= k} a~_l c_{k,l}(x), where
///
///   c_{k,l}(x) = (-1)^k sum_{m=k}^{l} C(m,k) x^{m-k} l! / (m! d_j^{l-m+1}),
///   B_l(delta, x) = l!/delta^{l+1} - e^{-delta x} sum_{v<=l} l! x^v / (v! delta^{l-v+1}),
///
/// and B_l = x^{l+1}/(l+1) when the two poles coincide. Pairs sharing the
/// post-arrival state n are summed before evaluation.
///
/// This shares only the polynomial coefficients with age_density(); the
/// integration is done independently, so the two serve as cross-checks.
template <class Real = double>
class TheoremEvaluator {
public:
    explicit TheoremEvaluator(const Model<Real>& model) : lambda_hat_(model.forward.lambda_hat)
    {
        const int imax = model.forward.i_max();
        age_side_.resize(static_cast<std::size_t>(imax));
        cycle_side_.resize(static_cast<std::size_t>(imax));
        const auto& w = model.weights;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto [np, n] = w.pairs[i];
            for (const auto& t : model.behind.density(np, n).terms()) {
                Piece& dst = piece_for(age_side_[n], t.rate);
                if (dst.coeffs.size() < t.coeffs.size()) dst.coeffs.resize(t.coeffs.size(), Real(0));
                for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst.coeffs[k] += w.weights[i] * t.coeffs[k];
            }
        }
        std::size_t max_degree = 0;
        for (int n = 0; n < imax; ++n) {
            for (const auto& t : model.ahead.h[n].terms()) cycle_side_[n].push_back({t.rate, t.coeffs, 0});
            for (const auto& p : age_side_[n]) max_degree = std::max(max_degree, p.coeffs.size());
            for (const auto& p : cycle_side_[n]) max_degree = std::max(max_degree, p.coeffs.size());
        }
        for (auto& side : {&age_side_, &cycle_side_}) {
            for (auto& pieces : *side) {
                for (auto& piece : pieces) piece.id = rate_id(piece.rate);
            }
        }
        const std::size_t table = 2 * max_degree + 2;
        factorial_ = factorial_table<Real>(table);
        binomial_ = binomial_table<Real>(table);
    }

    Real operator()(const Real& x) const
    {
        const std::vector<Real> decays = decay_factors(rates_, x);
        std::vector<std::vector<Real>> brackets(rates_.size() * rates_.size());
        CompensatedSum<Real> total;
        for (std::size_t n = 0; n < age_side_.size(); ++n) {
            for (const auto& cyc : cycle_side_[n]) {
                const std::vector<Real> z = z_coefficients(cyc, x);
                const Real& decay = decays[cyc.id];
                for (const auto& age : age_side_[n]) {
                    const std::size_t top = z.size() + age.coeffs.size() - 1;
                    auto& b = brackets[age.id * rates_.size() + cyc.id];
                    if (b.size() < top) b = bracket(age.rate, cyc.rate, decays[age.id] / decays[cyc.id], x, top);
                    Real inner(0);
                    for (std::size_t l = 0; l < top; ++l) {
                        Real conv(0);  // c~_l
                        const std::size_t v_lo = l + 1 > age.coeffs.size() ? l + 1 - age.coeffs.size() : 0;
                        const std::size_t v_hi = std::min(l, z.size() - 1);
                        for (std::size_t v = v_lo; v <= v_hi; ++v) conv += z[v] * age.coeffs[l - v];
                        inner += conv * b[l];
                    }
                    total += decay * inner;
                }
            }
        }
        return lambda_hat_ * total.value();
    }

private:
    struct Piece {
        Real rate;
        std::vector<Real> coeffs;
        std::size_t id = 0;  // index into rates_
    };

    std::size_t rate_id(const Real& rate)
    {
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            if (PartialFraction<Real>::same_rate(rates_[i], rate)) return i;
        }
        rates_.push_back(rate);
        return rates_.size() - 1;
    }

    static Piece& piece_for(std::vector<Piece>& pieces, const Real& rate)
    {
        for (auto& p : pieces) {
            if (PartialFraction<Real>::same_rate(p.rate, rate)) return p;
        }
        pieces.push_back({rate, {}, 0});
        return pieces.back();
    }

    // z~_k(x) = sum_{l=k}^{deg} a~_l c_{k,l}(x)
    std::vector<Real> z_coefficients(const Piece& cyc, const Real& x) const
    {
        const std::size_t deg = cyc.coeffs.size() - 1;
        std::vector<Real> inv_rate_pow(deg + 2);
        inv_rate_pow[0] = Real(1);
        for (std::size_t i = 1; i < inv_rate_pow.size(); ++i) inv_rate_pow[i] = inv_rate_pow[i - 1] / cyc.rate;
        std::vector<Real> x_pow(deg + 1);
        x_pow[0] = Real(1);
        for (std::size_t i = 1; i <= deg; ++i) x_pow[i] = x_pow[i - 1] * x;

        std::vector<Real> z(deg + 1, Real(0));
        for (std::size_t k = 0; k <= deg; ++k) {
            CompensatedSum<Real> zk;
            for (std::size_t l = k; l <= deg; ++l) {
                CompensatedSum<Real> c;  // c_{k,l}(x)
                for (std::size_t m = k; m <= l; ++m) {
                    c += binomial_[m][k] * x_pow[m - k] * factorial_[l] / factorial_[m] * inv_rate_pow[l - m + 1];
                }
                zk += cyc.coeffs[l] * c.value();
            }
            z[k] = (k % 2 == 0) ? zk.value() : -zk.value();
        }
        return z;
    }

    // B_l(d_age - d_cycle, x) for l = 0..count-1
    // `ratio` is e^{-(d_age - d_cycle) x}.
    std::vector<Real> bracket(const Real& age_rate, const Real& cycle_rate, const Real& ratio, const Real& x,
                              std::size_t count) const
    {
        std::vector<Real> b(count);
        if (PartialFraction<Real>::same_rate(age_rate, cycle_rate)) {
            Real xp = x;
            for (std::size_t l = 0; l < count; ++l) {
                b[l] = xp / Real(static_cast<double>(l + 1));
                xp *= x;
            }
            return b;
        }
        // Both pieces follow l -> l+1 recurrences: l!/delta^{l+1} = (l/delta) (l-1)!/delta^l and
        // P_l = sum_{v<=l} l! x^v / (v! delta^{l-v+1}) = (l/delta) P_{l-1} + x^l/delta.
        const Real delta = age_rate - cycle_rate;
        const Real inv_delta = Real(1) / delta;
        Real lead = inv_delta;
        Real partial = inv_delta;
        Real x_pow(1);
        for (std::size_t l = 0; l < count; ++l) {
            if (l > 0) {
                const Real scale = Real(static_cast<double>(l)) * inv_delta;
                x_pow *= x;
                lead *= scale;
                partial = scale * partial + x_pow * inv_delta;
            }
            b[l] = lead - ratio * partial;
        }
        return b;
    }

    Real lambda_hat_;
    std::vector<Real> rates_;
    std::vector<std::vector<Piece>> age_side_;    // per n: sum_{n'} p(n', n) g(. | n', n)
    std::vector<std::vector<Piece>> cycle_side_;  // per n: h(. | n)
    std::vector<Real> factorial_;
    std::vector<std::vector<Real>> binomial_;
};

template <class Real = double>
Real age_density_theorem_eval(const SystemParams& params, const Real& x)
{
    return TheoremEvaluator<Real>(Model<Real>::build(params))(x);
}

} // namespace aoi
