#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <aoi/params.hpp>

namespace aoi {

inline void PrintTo(const SystemParams& p, std::ostream* os)
{
    *os << "lambda=" << p.lambda << " mu=" << p.mu << " i_max=" << p.i_max;
}

} // namespace aoi

namespace oracle {

/// Generator of Z_t written out directly from the transition rules.
inline Eigen::MatrixXd generator(const aoi::SystemParams& p)
{
    const int n = p.i_max + 1;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i < p.i_max) q(i, i + 1) = p.lambda;
        for (int j = 0; j < i; ++j) q(i, j) = p.mu;
        q(i, i) = -q.row(i).sum();
    }
    return q;
}

/// Null vector of Q^T normalized to a probability vector, by replacing
/// one balance equation with the normalization.
inline std::vector<double> balance_solve(const aoi::SystemParams& p)
{
    const Eigen::MatrixXd q = generator(p);
    const int n = static_cast<int>(q.rows());
    Eigen::MatrixXd a = q.transpose();
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    return {x.data(), x.data() + n};
}

/// int_a^b f, adaptive Gauss-Kronrod; b may be +inf.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, tol);
}

// readable suffixes for typed tests
struct ScalarName {
    template <class T>
    static std::string GetName(int)
    {
        return std::is_same_v<T, double> ? "double" : "wide";
    }
};

struct Sample {
    double mean;
    double se;
};

inline Sample summarize(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

/// Gillespie run of a CTMC with rate matrix `rates` (diagonal ignored)
/// from `start`, returning the time at which `counted` transitions have
/// occurred; `counted(i, j)` says whether jump i -> j counts.
inline double time_to_kth(const std::vector<std::vector<double>>& rates, int start, int k,
                          const std::function<bool(int, int)>& counted, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int state = start;
    double t = 0.0;
    int seen = 0;
    while (seen < k) {
        const auto& row = rates[state];
        double total = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (static_cast<int>(j) != state) total += row[j];
        }
        t += -std::log(1.0 - u(rng)) / total;
        double pick = u(rng) * total;
        int next = state;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (static_cast<int>(j) == state) continue;
            pick -= row[j];
            next = static_cast<int>(j);
            if (pick < 0.0) break;
        }
        if (counted(state, next)) ++seen;
        state = next;
    }
    return t;
}

/// (lambda, mu, i_max) cases: `per_size` uniform draws of (lambda, mu) in
/// [0.25, 4]^2 for each window size.
inline std::vector<aoi::SystemParams> sweep_cases(std::uint64_t seed = 20240611, int per_size = 10,
                                                  std::vector<int> sizes = {1, 2, 3, 5, 10, 20})
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rate(0.25, 4.0);
    std::vector<aoi::SystemParams> out;
    for (int size : sizes) {
        for (int i = 0; i < per_size; ++i) {
            const double l = rate(rng);
            const double m = rate(rng);
            out.push_back({l, m, size});
        }
    }
    return out;
}

/// Relative difference with an absolute floor `scale` for values that
/// are exactly zero in theory (the age density at 0).
inline double rel_diff(double a, double b, double scale)
{
    const double den = std::max({std::abs(a), std::abs(b), scale});
    return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

} // namespace oracle
