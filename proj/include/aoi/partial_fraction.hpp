#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "numeric.hpp"

namespace aoi {

/// coeffs[m-1] multiplies 1/(s + rate)^m.
template <class Real = double>
struct Pole {
    Real rate;
    std::vector<Real> coeffs;
};

/// A strictly proper rational function of s stored pole-wise:
/// sum over poles d of sum_m a_m / (s + d)^m. All rates are positive.
template <class Real = double>
class PartialFraction {
public:
    PartialFraction() = default;

    /// c / (s + rate)^multiplicity
    static PartialFraction term(const Real& rate, const Real& c, std::size_t multiplicity = 1)
    {
        PartialFraction f;
        f.add_term(rate, multiplicity, c);
        return f;
    }

    const std::vector<Pole<Real>>& poles() const { return poles_; }
    bool empty() const { return poles_.empty(); }

    /// Adds c / (s + rate)^multiplicity, merging with an existing pole
    /// whose rate agrees within the pole tolerance.
    void add_term(const Real& rate, std::size_t multiplicity, const Real& c)
    {
        if (multiplicity == 0) throw std::domain_error("pole multiplicity must be >= 1");
        Pole<Real>& pole = pole_for(rate);
        if (pole.coeffs.size() < multiplicity) pole.coeffs.resize(multiplicity, Real(0));
        pole.coeffs[multiplicity - 1] += c;
    }

    /// The pole entry for `rate`, created empty if absent. References are
    /// invalidated by the next insertion.
    Pole<Real>& pole_for(const Real& rate)
    {
        if (!(rate > Real(0))) throw std::domain_error("partial fraction poles must have positive rate");
        const std::size_t i = find(rate);
        if (i != npos) return poles_[i];
        poles_.push_back({rate, {}});
        return poles_.back();
    }

    /// Index of the pole matching `rate`, or npos.
    std::size_t find(const Real& rate) const
    {
        for (std::size_t i = 0; i < poles_.size(); ++i) {
            if (poles_[i].rate == rate) return i;
        }
        for (std::size_t i = 0; i < poles_.size(); ++i) {
            if (same_rate(poles_[i].rate, rate)) return i;
        }
        return npos;
    }

    static bool same_rate(const Real& a, const Real& b)
    {
        using std::abs;
        using std::max;
        return abs(a - b) <= Real(tolerances<Real>::pole) * max(abs(a), abs(b));
    }

    /// Sorts poles by rate and drops exact-zero trailing coefficients and empty poles.
    void canonicalize()
    {
        for (auto& pole : poles_) {
            while (!pole.coeffs.empty() && pole.coeffs.back() == Real(0)) pole.coeffs.pop_back();
        }
        std::erase_if(poles_, [](const Pole<Real>& p) { return p.coeffs.empty(); });
        std::sort(poles_.begin(), poles_.end(),
                  [](const Pole<Real>& a, const Pole<Real>& b) { return a.rate < b.rate; });
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<Pole<Real>> poles_;
};

/// out += c * a, without canonicalizing.
template <class Real>
void pf_accumulate(PartialFraction<Real>& out, const Real& c, const PartialFraction<Real>& a)
{
    if (c == Real(0)) return;
    for (const auto& pole : a.poles()) {
        auto& dst = out.pole_for(pole.rate).coeffs;
        if (dst.size() < pole.coeffs.size()) dst.resize(pole.coeffs.size(), Real(0));
        for (std::size_t m = 0; m < pole.coeffs.size(); ++m) dst[m] += c * pole.coeffs[m];
    }
}

template <class Real>
PartialFraction<Real> pf_add(const PartialFraction<Real>& a, const PartialFraction<Real>& b)
{
    PartialFraction<Real> out = a;
    pf_accumulate(out, Real(1), b);
    out.canonicalize();
    return out;
}

template <class Real>
PartialFraction<Real> pf_scale(const PartialFraction<Real>& a, const Real& c)
{
    PartialFraction<Real> out;
    pf_accumulate(out, c, a);
    out.canonicalize();
    return out;
}

/// (c + F(s)) / (s + d) in partial-fraction form.
///
/// For a pole a distinct from d, with e = d - a,
///   1/((s+a)^m (s+d)) = sum_{r=1}^{m} (-1)^{m-r} e^{-(m-r+1)} / (s+a)^r + (-1)^m e^{-m} / (s+d),
/// which unrolls 1/((s+a)^m (s+d)) = (1/e)(1/(s+a)^m - 1/((s+a)^{m-1}(s+d))).
/// A pole coinciding with d has its multiplicity raised by one.
template <class Real>
PartialFraction<Real> pf_divide_by_pole(const Real& c, const PartialFraction<Real>& f, const Real& d)
{
    if (!(d > Real(0))) throw std::domain_error("pf_divide_by_pole: rate must be > 0");
    PartialFraction<Real> out;
    if (c != Real(0)) out.add_term(d, 1, c);
    for (const auto& pole : f.poles()) {
        const auto& a = pole.coeffs;
        if (PartialFraction<Real>::same_rate(pole.rate, d)) {
            for (std::size_t m = 0; m < a.size(); ++m) out.add_term(d, m + 2, a[m]);
            continue;
        }
        // Horner from the top: S_r = a_r - inv_gap S_{r+1}; the (s+a)^{-r}
        // coefficient is inv_gap S_r and the (s+d)^{-1} one is -inv_gap S_1.
        const Real inv_gap = Real(1) / (d - pole.rate);
        const std::size_t mult = a.size();
        std::vector<Real> same(mult);
        Real running(0);
        for (std::size_t r = mult; r >= 1; --r) {
            running = a[r - 1] - inv_gap * running;
            same[r - 1] = inv_gap * running;
        }
        auto& dst = out.pole_for(pole.rate).coeffs;
        if (dst.size() < mult) dst.resize(mult, Real(0));
        for (std::size_t r = 0; r < mult; ++r) dst[r] += same[r];
        out.add_term(d, 1, -inv_gap * running);
    }
    out.canonicalize();
    return out;
}

template <class Real>
PartialFraction<Real> pf_divide_by_pole(const PartialFraction<Real>& f, const Real& d)
{
    return pf_divide_by_pole(Real(0), f, d);
}

template <class Real>
Real pf_eval(const PartialFraction<Real>& a, const Real& s)
{
    CompensatedSum<Real> acc;
    for (const auto& pole : a.poles()) {
        const Real inv = Real(1) / (s + pole.rate);
        Real pw = inv;
        for (const auto& c : pole.coeffs) {
            acc += c * pw;
            pw *= inv;
        }
    }
    return acc.value();
}

/// E[X^k] of the density whose transform is `a`:
/// sum a_m (m+k-1)! / ((m-1)! d^{m+k}).
template <class Real>
Real pf_moment(const PartialFraction<Real>& a, int k)
{
    CompensatedSum<Real> acc;
    for (const auto& pole : a.poles()) {
        for (std::size_t m = 1; m <= pole.coeffs.size(); ++m) {
            Real rising(1);  // (m+k-1)! / (m-1)!
            for (int i = 0; i < k; ++i) rising *= Real(static_cast<double>(m + i));
            Real denom(1);
            for (std::size_t i = 0; i < m + static_cast<std::size_t>(k); ++i) denom *= pole.rate;
            acc += pole.coeffs[m - 1] * rising / denom;
        }
    }
    return acc.value();
}

/// Partial fractions of 1/((s+alpha)^m (s+beta)^n), alpha != beta:
///   A_r = (-1)^{m-r} C(m+n-r-1, n-1) / (beta-alpha)^{m+n-r}  on (s+alpha)^{-r}
///   B_r = (-1)^{n-r} C(m+n-r-1, m-1) / (alpha-beta)^{m+n-r}  on (s+beta)^{-r}
template <class Real>
PartialFraction<Real> pf_multiply(const PartialFraction<Real>& a, const PartialFraction<Real>& b)
{
    PartialFraction<Real> out;
    std::size_t max_mult = 0;
    for (const auto& p : a.poles()) max_mult = std::max(max_mult, p.coeffs.size());
    for (const auto& p : b.poles()) max_mult = std::max(max_mult, p.coeffs.size());
    const auto binom = binomial_table<Real>(2 * max_mult + 1);

    for (const auto& pa : a.poles()) {
        for (const auto& pb : b.poles()) {
            const std::size_t ma = pa.coeffs.size();
            const std::size_t mb = pb.coeffs.size();
            if (PartialFraction<Real>::same_rate(pa.rate, pb.rate)) {
                for (std::size_t i = 0; i < ma; ++i) {
                    for (std::size_t j = 0; j < mb; ++j) {
                        out.add_term(pa.rate, i + j + 2, pa.coeffs[i] * pb.coeffs[j]);
                    }
                }
                continue;
            }
            const Real gap_ab = pb.rate - pa.rate;  // beta - alpha
            std::vector<Real> inv_pow(ma + mb + 1);
            inv_pow[0] = Real(1);
            for (std::size_t k = 1; k < inv_pow.size(); ++k) inv_pow[k] = inv_pow[k - 1] / gap_ab;
            std::vector<Real> on_a(ma, Real(0));
            std::vector<Real> on_b(mb, Real(0));
            for (std::size_t m = 1; m <= ma; ++m) {
                if (pa.coeffs[m - 1] == Real(0)) continue;
                for (std::size_t n = 1; n <= mb; ++n) {
                    const Real w = pa.coeffs[m - 1] * pb.coeffs[n - 1];
                    if (w == Real(0)) continue;
                    for (std::size_t r = 1; r <= m; ++r) {
                        const std::size_t e = m + n - r;
                        const Real sign = ((m - r) % 2 == 0) ? Real(1) : Real(-1);
                        on_a[r - 1] += w * sign * binom[m + n - r - 1][n - 1] * inv_pow[e];
                    }
                    for (std::size_t r = 1; r <= n; ++r) {
                        const std::size_t e = m + n - r;
                        // (alpha-beta)^{-e} = (-1)^e (beta-alpha)^{-e}
                        const bool negative = ((n - r) + e) % 2 == 1;
                        const Real sign = negative ? Real(-1) : Real(1);
                        on_b[r - 1] += w * sign * binom[m + n - r - 1][m - 1] * inv_pow[e];
                    }
                }
            }
            for (std::size_t r = 0; r < ma; ++r) out.add_term(pa.rate, r + 1, on_a[r]);
            for (std::size_t r = 0; r < mb; ++r) out.add_term(pb.rate, r + 1, on_b[r]);
        }
    }
    out.canonicalize();
    return out;
}

} // namespace aoi
