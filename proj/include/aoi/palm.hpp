#pragma once

#include <cstddef>
#include <vector>

#include "chain.hpp"
#include "exppoly.hpp"
#include "lst.hpp"

namespace aoi {

/// Everything the analytic results are assembled from, computed once per
/// parameter set.
template <class Real = double>
struct Model {
    ForwardChain<Real> forward;
    ReversedChain<Real> reversed;
    PalmWeights<Real> weights;
    ForwardComponents<Real> ahead;    // h(t1 | n)
    BackwardComponents<Real> behind;  // g(x0 | n', n)

    // not an aggregate, so a braced parameter list picks the SystemParams overloads
    Model() = default;

    static Model build(const SystemParams& params, int cap = default_i_max_cap)
    {
        Model m;
        m.forward = build_forward<Real>(params, cap);
        m.reversed = build_reversed(m.forward);
        m.weights = palm_weights(m.forward);
        m.ahead = forward_lsts(m.forward);
        m.behind = backward_lsts(m.forward, m.reversed);
        return m;
    }

    const SystemParams& params() const { return forward.params; }
};

template <class Real = double>
struct PalmTerm {
    int n_prime;
    int n;
    Real weight;
    ExpPoly<Real> g;  // density of the age x0 set by the arrival
    ExpPoly<Real> h;  // density of the time t1 to the next informative arrival
};

/// f(x0, t1) = sum weight * g(x0) * h(t1), kept as a separable mixture.
template <class Real = double>
struct PalmJointDensity {
    std::vector<PalmTerm<Real>> terms;

    Real operator()(const Real& x0, const Real& t1) const
    {
        CompensatedSum<Real> acc;
        for (const auto& t : terms) acc += t.weight * ep_eval(t.g, x0) * ep_eval(t.h, t1);
        return acc.value();
    }
};

template <class Real>
PalmJointDensity<Real> palm_joint(const Model<Real>& model)
{
    PalmJointDensity<Real> out;
    const auto& w = model.weights;
    out.terms.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        out.terms.push_back({np, n, w.weights[i], model.behind.density(np, n), model.ahead.h[n]});
    }
    return out;
}

template <class Real = double>
PalmJointDensity<Real> palm_joint(const SystemParams& params)
{
    return palm_joint(Model<Real>::build(params));
}

/// Age density sampled just after informative arrivals: sum weight * g.
template <class Real>
ExpPoly<Real> age_at_informative(const Model<Real>& model)
{
    ExpPoly<Real> out;
    const auto& w = model.weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        for (const auto& t : model.behind.density(np, n).terms()) {
            auto& dst = out.term_for(t.rate).coeffs;
            if (dst.size() < t.coeffs.size()) dst.resize(t.coeffs.size(), Real(0));
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst[k] += w.weights[i] * t.coeffs[k];
        }
    }
    out.canonicalize();
    return out;
}

template <class Real = double>
ExpPoly<Real> age_at_informative(const SystemParams& params)
{
    return age_at_informative(Model<Real>::build(params));
}

/// E[exp(-nu t1 - theta x0)] under the Palm law.
template <class Real>
Real joint_lst(const Model<Real>& model, const Real& nu, const Real& theta)
{
    if (nu < Real(0) || theta < Real(0)) throw std::domain_error("joint_lst: arguments must be >= 0");
    const auto& w = model.weights;
    std::vector<Real> ahead(model.forward.states());
    for (std::size_t n = 0; n < ahead.size(); ++n) ahead[n] = pf_eval(model.ahead.f_tilde[n], nu);
    CompensatedSum<Real> acc;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto [np, n] = w.pairs[i];
        acc += w.weights[i] * pf_eval(model.behind.transform(np, n + 1), theta) * ahead[n];
    }
    return acc.value();
}

template <class Real = double>
Real joint_lst(const SystemParams& params, const Real& nu, const Real& theta)
{
    return joint_lst(Model<Real>::build(params), nu, theta);
}

} // namespace aoi
