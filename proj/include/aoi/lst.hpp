#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "exppoly.hpp"
#include "partial_fraction.hpp"

namespace aoi {

/// Time from an arbitrary instant to the next informative arrival, given Z_t = n.
template <class Real = double>
struct ForwardComponents {
    std::vector<PartialFraction<Real>> f_tilde;  // transforms, n = 0..i_max
    std::vector<ExpPoly<Real>> h;                // densities, n = 0..i_max
};

/// Time to the k-th departure of the reversed chain from state n', and the
/// Palm age densities g(x0 | n', n) = inverse of f[n'][n+1].
template <class Real = double>
struct BackwardComponents {
    std::vector<std::vector<PartialFraction<Real>>> f;  // f[n'][k], k = 1..i_max (index 0 unused)
    std::map<std::pair<int, int>, ExpPoly<Real>> g;     // keyed by (n', n)

    const PartialFraction<Real>& transform(int n_prime, int k) const { return f.at(n_prime).at(k); }
    const ExpPoly<Real>& density(int n_prime, int n) const { return g.at({n_prime, n}); }
};

/// First-step analysis on Z_t where every downward jump is of interest:
///   f_n(s) = (n mu + lambda f_{n+1}(s)) / (d_n + s),
/// solved from n = i_max downward (no lambda term at i_max).
template <class Real = double>
ForwardComponents<Real> forward_lsts(const ForwardChain<Real>& fwd)
{
    const int imax = fwd.i_max();
    const Real lambda(fwd.params.lambda);
    const Real mu(fwd.params.mu);

    ForwardComponents<Real> out;
    out.f_tilde.resize(fwd.states());
    out.f_tilde[imax] = pf_divide_by_pole(Real(imax) * mu, PartialFraction<Real>{}, fwd.d_tilde[imax]);
    for (int n = imax - 1; n >= 0; --n) {
        out.f_tilde[n] = pf_divide_by_pole(Real(n) * mu, pf_scale(out.f_tilde[n + 1], lambda), fwd.d_tilde[n]);
    }
    out.h.reserve(fwd.states());
    for (const auto& f : out.f_tilde) out.h.push_back(pf_to_exppoly(f));
    return out;
}

/// k-th departure of the reversed chain. With f_{., 0} = 1,
///   f_{n',k}(s) = (lambda'_{n'} f_{n'-1,k-1}(s) + sum_{j>n'} mu'_{n',j} f_{j,k}(s)) / (d'_{n'} + s),
/// for k = 1..i_max and, within each k, n' = i_max down to 0.
template <class Real = double>
BackwardComponents<Real> backward_lsts(const ForwardChain<Real>& fwd, const ReversedChain<Real>& rev)
{
    const int imax = fwd.i_max();
    BackwardComponents<Real> out;
    out.f.assign(fwd.states(), std::vector<PartialFraction<Real>>(static_cast<std::size_t>(imax) + 1));

    for (int k = 1; k <= imax; ++k) {
        for (int np = imax; np >= 0; --np) {
            PartialFraction<Real> numerator;
            Real constant(0);
            if (np >= 1) {
                if (k == 1) {
                    constant = rev.lambda_prime[np];
                } else {
                    pf_accumulate(numerator, rev.lambda_prime[np], out.f[np - 1][k - 1]);
                }
            }
            for (int j = np + 1; j <= imax; ++j) pf_accumulate(numerator, rev.mu_prime[np][j], out.f[j][k]);
            numerator.canonicalize();
            out.f[np][k] = pf_divide_by_pole(constant, numerator, rev.d_prime[np]);
        }
    }
    for (int np = 1; np <= imax; ++np) {
        for (int n = 0; n < np; ++n) out.g.emplace(std::pair{np, n}, pf_to_exppoly(out.f[np][n + 1]));
    }
    return out;
}

} // namespace aoi
