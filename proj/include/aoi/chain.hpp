#pragma once

#include <cstddef>
#include <vector>

#include "numeric.hpp"
#include "params.hpp"

namespace aoi {

template <class Real>
using Matrix = std::vector<std::vector<Real>>;

/// Z_t: number of non-obsolete messages in flight. A generation moves
/// n -> n+1 at rate lambda (blocked at i_max); the delivery of the i-th
/// oldest message moves n -> n-i at rate mu for every i in 1..n.
template <class Real = double>
struct ForwardChain {
    SystemParams params;
    Matrix<Real> q;           // generator, q[i][i] = -d_tilde[i]
    std::vector<Real> p;      // stationary law
    std::vector<Real> d_tilde;
    Real n_bar = Real(0);
    Real lambda_hat = Real(0);

    int i_max() const { return params.i_max; }
    std::size_t states() const { return static_cast<std::size_t>(params.i_max) + 1; }
};

/// The time reversal of Z_t. Deliveries become unit departures n -> n-1 at
/// rate lambda_prime[n]; generations become batch arrivals n -> j at rate
/// mu_prime[n][j], j > n.
template <class Real = double>
struct ReversedChain {
    std::vector<Real> lambda_prime;  // index 0 unused (zero)
    Matrix<Real> mu_prime;           // strictly upper triangular
    std::vector<Real> d_prime;
    Matrix<Real> q_prime;            // generator, q_prime[i][i] = -d_prime[i]
};

struct PalmPair {
    int n_prime;  // state just before the informative arrival
    int n;        // state just after
};

/// Probability that an informative arrival is the transition n' -> n.
template <class Real = double>
struct PalmWeights {
    std::vector<PalmPair> pairs;
    std::vector<Real> weights;

    std::size_t size() const { return pairs.size(); }

    Real weight(int n_prime, int n) const
    {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (pairs[i].n_prime == n_prime && pairs[i].n == n) return weights[i];
        }
        return Real(0);
    }
};

template <class Real = double>
ForwardChain<Real> build_forward(const SystemParams& params, int cap = default_i_max_cap)
{
    params.validate(cap);
    const int imax = params.i_max;
    const std::size_t n_states = static_cast<std::size_t>(imax) + 1;
    const Real lambda(params.lambda);
    const Real mu(params.mu);

    ForwardChain<Real> fwd;
    fwd.params = params;
    fwd.q.assign(n_states, std::vector<Real>(n_states, Real(0)));
    fwd.d_tilde.resize(n_states);
    for (int i = 0; i <= imax; ++i) {
        if (i < imax) fwd.q[i][i + 1] = lambda;
        for (int j = 0; j < i; ++j) fwd.q[i][j] = mu;
        fwd.d_tilde[i] = (i < imax ? lambda : Real(0)) + Real(i) * mu;
        fwd.q[i][i] = -fwd.d_tilde[i];
    }

    // Closed form, accumulated as a product of ratios lambda/(lambda + j mu).
    fwd.p.resize(n_states);
    Real ratio_product(1);  // prod_{j=2}^{n+1} lambda / (lambda + j mu)
    for (int n = 0; n < imax; ++n) {
        if (n > 0) ratio_product *= lambda / (lambda + Real(n + 1) * mu);
        fwd.p[n] = Real(n + 1) * mu / (lambda + mu) * ratio_product;
    }
    Real top(1);
    for (int j = 1; j <= imax; ++j) top *= lambda / (lambda + Real(j) * mu);
    fwd.p[imax] = top;

    CompensatedSum<Real> mean;
    for (int n = 1; n <= imax; ++n) mean += Real(n) * fwd.p[n];
    fwd.n_bar = mean.value();
    fwd.lambda_hat = mu * fwd.n_bar;
    return fwd;
}

template <class Real = double>
ReversedChain<Real> build_reversed(const ForwardChain<Real>& fwd)
{
    const int imax = fwd.i_max();
    const std::size_t n_states = fwd.states();
    const Real lambda(fwd.params.lambda);
    const Real mu(fwd.params.mu);

    ReversedChain<Real> rev;
    rev.lambda_prime.assign(n_states, Real(0));
    rev.mu_prime.assign(n_states, std::vector<Real>(n_states, Real(0)));
    for (int i = 1; i <= imax; ++i) {
        rev.lambda_prime[i] = i < imax ? Real(i) / Real(i + 1) * (lambda + Real(i + 1) * mu)
                                       : Real(imax) * mu;
    }
    for (int i = 0; i < imax; ++i) {
        // prod_{k=i+2}^{j+1} lambda / (lambda + k mu), grown with j
        Real ratio_product(1);
        for (int j = i + 1; j <= imax; ++j) {
            if (j < imax) {
                ratio_product *= lambda / (lambda + Real(j + 1) * mu);
                rev.mu_prime[i][j] = Real(j + 1) * mu / Real(i + 1) * ratio_product;
            } else {
                // lambda^{imax-i} / ((i+1) prod_{k=i+2}^{imax} (lambda + k mu))
                rev.mu_prime[i][j] = lambda / Real(i + 1) * ratio_product;
            }
        }
    }

    rev.q_prime.assign(n_states, std::vector<Real>(n_states, Real(0)));
    rev.d_prime.assign(n_states, Real(0));
    for (int i = 0; i <= imax; ++i) {
        CompensatedSum<Real> exit_rate;
        if (i >= 1) {
            rev.q_prime[i][i - 1] = rev.lambda_prime[i];
            exit_rate += rev.lambda_prime[i];
        }
        for (int j = i + 1; j <= imax; ++j) {
            rev.q_prime[i][j] = rev.mu_prime[i][j];
            exit_rate += rev.mu_prime[i][j];
        }
        rev.d_prime[i] = exit_rate.value();
        rev.q_prime[i][i] = -rev.d_prime[i];
    }
    return rev;
}

template <class Real = double>
PalmWeights<Real> palm_weights(const ForwardChain<Real>& fwd)
{
    PalmWeights<Real> w;
    const int imax = fwd.i_max();
    for (int np = 1; np <= imax; ++np) {
        for (int n = 0; n < np; ++n) {
            w.pairs.push_back({np, n});
            w.weights.push_back(fwd.p[np] / fwd.n_bar);
        }
    }
    return w;
}

} // namespace aoi
