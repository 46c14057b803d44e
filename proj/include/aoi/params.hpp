#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aoi {

/// Thrown when (lambda, mu, i_max) or a configuration value is outside its domain.
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a simulation produced too few informative arrivals for an estimator.
class insufficient_data : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int default_i_max_cap = 64;

/// The channel: Poisson generation rate, per-message delivery rate, window size.
struct SystemParams {
    double lambda = 1.0;
    double mu = 1.0;
    int i_max = 1;

    void validate(int cap = default_i_max_cap) const
    {
        if (!(std::isfinite(lambda) && lambda > 0.0)) {
            throw parameter_error("lambda must be finite and > 0, got " + std::to_string(lambda));
        }
        if (!(std::isfinite(mu) && mu > 0.0)) {
            throw parameter_error("mu must be finite and > 0, got " + std::to_string(mu));
        }
        if (i_max < 1 || i_max > cap) {
            std::ostringstream os;
            os << "i_max must lie in [1, " << cap << "], got " << i_max;
            throw parameter_error(os.str());
        }
    }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

} // namespace aoi
