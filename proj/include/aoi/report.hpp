#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "age.hpp"
#include "palm.hpp"
#include "sim.hpp"

namespace aoi {

inline constexpr const char* version = "0.1.0";

inline const std::vector<double> default_epsilons{0.5, 0.1, 0.01, 1e-3};

/// "start:stop:count", count evenly spaced points including both ends.
inline std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw parameter_error("grid must look like start:stop:count, got '" + spec + "'");
    double start = 0.0, stop = 0.0;
    long count = 0;
    try {
        std::size_t used = 0;
        start = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("");
        stop = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("");
        count = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw parameter_error("grid '" + spec + "' is not numeric");
    }
    if (!std::isfinite(start) || !std::isfinite(stop) || start < 0.0) {
        throw parameter_error("grid bounds must be finite and start >= 0");
    }
    if (count < 1) throw parameter_error("grid count must be >= 1");
    if (count == 1) {
        if (start != stop) throw parameter_error("a one-point grid needs start == stop");
        return {start};
    }
    if (!(stop > start)) throw parameter_error("grid must be strictly increasing (stop > start)");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) g[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = stop;
    return g;
}

/// Comma-separated numbers.
inline std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(p, &used);
        } catch (const std::exception&) {
            throw parameter_error("not a number: '" + p + "'");
        }
        if (used != p.size()) throw parameter_error("not a number: '" + p + "'");
        out.push_back(v);
    }
    if (out.empty()) throw parameter_error("empty list");
    return out;
}

inline void check_grid(const std::vector<double>& grid)
{
    if (grid.empty()) throw parameter_error("grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0) throw parameter_error("grid values must be finite and >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw parameter_error("grid must be strictly increasing");
    }
}

inline void check_epsilons(const std::vector<double>& eps)
{
    for (double e : eps) {
        if (!(e > 0.0 && e < 1.0)) throw parameter_error("epsilons must lie in (0, 1)");
    }
}

/// 512 points on [0, x] with P[X > x] = 1e-4.
template <class Real>
std::vector<double> default_grid(const AgeDistribution<Real>& dist, std::size_t count = 512)
{
    const double top = age_quantile(dist, 1e-4);
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = top * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

/// A flat bag of named numbers. Names are '/'-separated paths into the
/// JSON document; columns all share the row count and become CSV rows.
struct Report {
    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;
    std::vector<std::pair<std::string, std::vector<double>>> columns;

    void scalar(std::string path, double v) { scalars.emplace_back(std::move(path), v); }
    void array(std::string path, std::vector<double> v) { arrays.emplace_back(std::move(path), std::move(v)); }
    void column(std::string path, std::vector<double> v) { columns.emplace_back(std::move(path), std::move(v)); }
};

/// name -> values, as recovered from either serialization.
using FlatValues = std::map<std::string, std::vector<double>>;

namespace detail {

inline nlohmann::json number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline std::string format17(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_number(const std::string& s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number in CSV: " + s);
    return v;
}

inline void flatten_into(const nlohmann::json& j, const std::string& path, FlatValues& out)
{
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_into(v, path.empty() ? k : path + "/" + k, out);
    } else if (j.is_array()) {
        std::vector<double> vals;
        for (const auto& v : j) vals.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
        out[path] = std::move(vals);
    } else if (j.is_number()) {
        out[path] = {j.get<double>()};
    } else if (j.is_null()) {
        out[path] = {std::numeric_limits<double>::quiet_NaN()};
    }
}

} // namespace detail

inline nlohmann::json to_json(const Report& r)
{
    nlohmann::json j = nlohmann::json::object();
    j["meta"] = r.meta;
    auto at = [&](const std::string& path) -> nlohmann::json& { return j[nlohmann::json::json_pointer("/" + path)]; };
    for (const auto& [p, v] : r.scalars) at(p) = detail::number(v);
    for (const auto& group : {&r.arrays, &r.columns}) {
        for (const auto& [p, v] : *group) {
            nlohmann::json a = nlohmann::json::array();
            for (double x : v) a.push_back(detail::number(x));
            at(p) = std::move(a);
        }
    }
    return j;
}

inline std::string to_csv(const Report& r)
{
    std::ostringstream os;
    os << "# meta=" << r.meta.dump() << "\n";
    for (const auto& [p, v] : r.scalars) os << "# " << p << "=" << detail::format17(v) << "\n";
    for (const auto& [p, v] : r.arrays) {
        os << "# " << p << "=";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << detail::format17(v[i]);
        os << "\n";
    }
    if (!r.columns.empty()) {
        for (std::size_t c = 0; c < r.columns.size(); ++c) os << (c ? "," : "") << r.columns[c].first;
        os << "\n";
        const std::size_t rows = r.columns.front().second.size();
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t c = 0; c < r.columns.size(); ++c) {
                os << (c ? "," : "") << detail::format17(r.columns[c].second.at(i));
            }
            os << "\n";
        }
    }
    return os.str();
}

/// Numeric content of a JSON report, meta excluded.
inline FlatValues flatten(const nlohmann::json& j)
{
    FlatValues out;
    for (const auto& [k, v] : j.items()) {
        if (k != "meta") detail::flatten_into(v, k, out);
    }
    return out;
}

/// Numeric content of a CSV report, meta excluded.
inline FlatValues parse_csv(const std::string& text)
{
    FlatValues out;
    std::istringstream in(text);
    std::vector<std::string> header;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            const std::string key = line.substr(2, eq - 2);
            if (key == "meta") continue;
            std::vector<double> vals;
            std::stringstream ss(line.substr(eq + 1));
            for (std::string t; std::getline(ss, t, ';');) vals.push_back(detail::parse_number(t));
            out[key] = std::move(vals);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string t; std::getline(ss, t, ',');) cells.push_back(t);
        if (header.empty()) {
            header = cells;
            for (const auto& h : header) out[h];
            continue;
        }
        if (cells.size() != header.size()) throw std::runtime_error("ragged CSV row");
        for (std::size_t c = 0; c < cells.size(); ++c) out[header[c]].push_back(detail::parse_number(cells[c]));
    }
    return out;
}

inline std::string render(const Report& r, const std::string& format)
{
    if (format == "json") return to_json(r).dump(2) + "\n";
    if (format == "csv") return to_csv(r);
    throw parameter_error("format must be csv or json, got '" + format + "'");
}

/// Relative paths land under $OUTPUT_DIR when it is set.
inline std::filesystem::path resolve_output(const std::string& path)
{
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
    }
    return p;
}

/// Whole-file write: temp file in the target directory, then rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& text)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline nlohmann::json params_json(const SystemParams& p)
{
    return {{"lambda", p.lambda}, {"mu", p.mu}, {"i_max", p.i_max}};
}

inline std::string eps_key(double e)
{
    std::ostringstream os;
    os << e;
    return os.str();
}

namespace detail {

// Emitted curves are re-checked against the density invariants.
inline void validate_curves(const std::vector<double>& pdf, const std::vector<double>& cdf,
                            const std::vector<double>& ccdf)
{
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        if (!pdf.empty() && pdf[i] < -1e-9) throw std::logic_error("negative density in emitted curve");
        if (cdf[i] < -1e-9 || cdf[i] > 1.0 + 1e-9) throw std::logic_error("CDF outside [0, 1]");
        if (i > 0 && cdf[i] < cdf[i - 1] - 1e-12) throw std::logic_error("CDF not monotone");
        if (!ccdf.empty() && std::abs(cdf[i] + ccdf[i] - 1.0) > 1e-12) throw std::logic_error("CDF + CCDF != 1");
    }
}

template <class Real>
std::vector<double> eval_on(const ExpPoly<Real>& f, const std::vector<double>& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = static_cast<double>(ep_eval(f, Real(grid[i])));
    return out;
}

} // namespace detail

/// Analytic quantities for one parameter set.
template <class Real>
struct Analysis {
    Model<Real> model;
    AgeDistribution<Real> age;
    ExpPoly<Real> at_arrival;       // density of the age just after informative arrivals
    ExpPoly<Real> at_arrival_tail;  // its CCDF

    explicit Analysis(const SystemParams& p)
        : model(Model<Real>::build(p)), age(age_density(model)), at_arrival(age_at_informative(model)),
          at_arrival_tail(ep_tail_function(at_arrival))
    {
    }

    double ccdf(double x) const { return age_ccdf(age, x); }
    double arrival_ccdf(double x) const
    {
        return x <= 0.0 ? 1.0 : static_cast<double>(ep_eval(at_arrival_tail, Real(x)));
    }
};

template <class Real>
Report analyze_report(const Analysis<Real>& a, std::vector<double> grid = {},
                      const std::vector<double>& epsilons = default_epsilons)
{
    check_epsilons(epsilons);
    if (grid.empty()) grid = default_grid(a.age);
    check_grid(grid);
    const auto& m = a.model;
    Report r;
    r.meta = {{"command", "analyze"}, {"params", params_json(m.params())}, {"seed", nullptr}, {"version", version}};

    auto to_vec = [](const std::vector<Real>& v) {
        std::vector<double> out;
        for (const auto& x : v) out.push_back(static_cast<double>(x));
        return out;
    };
    r.array("stationary", to_vec(m.forward.p));
    r.array("d_tilde", to_vec(m.forward.d_tilde));
    r.array("d_prime", to_vec(m.reversed.d_prime));
    std::vector<double> np, n, w;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        np.push_back(m.weights.pairs[i].n_prime);
        n.push_back(m.weights.pairs[i].n);
        w.push_back(static_cast<double>(m.weights.weights[i]));
    }
    r.array("palm_weights/n_prime", np);
    r.array("palm_weights/n", n);
    r.array("palm_weights/weight", w);
    r.scalar("n_bar", static_cast<double>(m.forward.n_bar));
    r.scalar("lambda_hat", static_cast<double>(m.forward.lambda_hat));

    const auto pdf = detail::eval_on(a.age.density, grid);
    std::vector<double> ccdf(grid.size()), cdf(grid.size()), arrival(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ccdf[i] = age_ccdf(a.age, grid[i]);
        cdf[i] = 1.0 - ccdf[i];
        arrival[i] = a.arrival_ccdf(grid[i]);
    }
    detail::validate_curves(pdf, cdf, ccdf);
    std::vector<double> arrival_cdf(arrival.size());
    for (std::size_t i = 0; i < arrival.size(); ++i) arrival_cdf[i] = 1.0 - arrival[i];
    detail::validate_curves({}, arrival_cdf, arrival);

    r.column("age/grid", grid);
    r.column("age/pdf", pdf);
    r.column("age/cdf", cdf);
    r.column("age/ccdf", ccdf);
    r.column("at_arrival/grid", grid);
    r.column("at_arrival/ccdf", arrival);

    r.scalar("metrics/mean", age_mean(a.age));
    r.scalar("metrics/m2", age_moment(a.age, 2));
    r.scalar("metrics/m3", age_moment(a.age, 3));
    for (double e : epsilons) r.scalar("metrics/quantiles/" + eps_key(e), age_quantile(a.age, e));
    return r;
}

/// Grid covering the observed sawtooth: [0, largest age on the path].
inline std::vector<double> default_sim_grid(const SimResult& s, std::size_t count = 512)
{
    double top = 0.0;
    for (std::size_t i = 0; i + 1 < s.informative_times.size(); ++i) {
        top = std::max(top, s.informative_ages[i] + s.informative_times[i + 1] - s.informative_times[i]);
    }
    if (!(top > 0.0)) top = 1.0;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = top * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

inline nlohmann::json sim_meta(const SimResult& s, const char* command)
{
    return {{"command", command},
            {"params", params_json(s.config.params)},
            {"seed", s.config.seed},
            {"messages", s.config.n_messages},
            {"warmup_fraction", s.config.warmup_fraction},
            {"version", version}};
}

inline void add_counters(Report& r, const SimResult& s)
{
    r.scalar("counters/generated", static_cast<double>(s.counters.generated));
    r.scalar("counters/dropped", static_cast<double>(s.counters.dropped));
    r.scalar("counters/delivered", static_cast<double>(s.counters.delivered));
    r.scalar("counters/informative", static_cast<double>(s.counters.informative));
    r.scalar("counters/obsolete", static_cast<double>(s.counters.obsolete));
    r.scalar("counters/in_flight", static_cast<double>(s.counters.in_flight));
}

/// Empirical counterpart of analyze_report. Throws insufficient_data
/// when the window holds too few informative arrivals.
inline Report simulate_report(const SimResult& s, std::vector<double> grid = {})
{
    const MeanEstimate est = batch_means(s);
    if (grid.empty()) grid = default_sim_grid(s);
    check_grid(grid);
    Report r;
    r.meta = sim_meta(s, "simulate");
    add_counters(r, s);
    r.scalar("window/start", s.window_start());
    r.scalar("window/end", s.window_end());
    r.scalar("lambda_hat", static_cast<double>(s.cycles()) / s.observed());
    double occ_total = 0.0;
    for (double v : s.z_occupancy) occ_total += v;
    std::vector<double> occ;
    for (double v : s.z_occupancy) occ.push_back(v / occ_total);
    r.array("stationary", occ);

    std::vector<double> cdf(grid.size()), ccdf(grid.size()), arrival(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cdf[i] = empirical_age_cdf(s, grid[i]);
        ccdf[i] = 1.0 - cdf[i];
        arrival[i] = empirical_arrival_ccdf(s, grid[i]);
    }
    r.column("age/grid", grid);
    r.column("age/cdf", cdf);
    r.column("age/ccdf", ccdf);
    r.column("at_arrival/grid", grid);
    r.column("at_arrival/ccdf", arrival);

    r.scalar("metrics/mean", est.mean);
    r.scalar("metrics/mean_timeavg", s.mean_age_timeavg);
    r.scalar("metrics/se", est.se);
    return r;
}

struct CompareTolerances {
    double ks = 0.02;       // both KS distances must stay below this
    double z = 3.0;         // |analytic - simulated mean| < z * SE
    std::size_t ks_points = 4096;
};

/// KS distance of a sample against a CDF that is expensive to evaluate:
/// the CDF is tabulated on a dense grid over the sample range and
/// interpolated linearly in between.
inline double ks_distance_tabulated(const std::vector<double>& sample, const std::function<double(double)>& cdf,
                                    std::size_t points)
{
    if (sample.empty()) throw insufficient_data("empty sample");
    const double top = *std::max_element(sample.begin(), sample.end());
    std::vector<double> xs(points), fs(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = top * static_cast<double>(i) / static_cast<double>(points - 1);
        fs[i] = cdf(xs[i]);
    }
    auto interp = [&](double x) {
        if (x >= top) return fs.back();
        const double pos = x / top * static_cast<double>(points - 1);
        const auto j = std::min(static_cast<std::size_t>(pos), points - 2);
        const double t = pos - static_cast<double>(j);
        return fs[j] + t * (fs[j + 1] - fs[j]);
    };
    return ks_distance(sample, interp);
}

struct CompareOutcome {
    Report report;
    bool pass = false;
};

template <class Real>
CompareOutcome compare_report(const Analysis<Real>& a, const SimResult& s, std::vector<double> grid = {},
                              const CompareTolerances& tol = {})
{
    const MeanEstimate est = batch_means(s);
    if (grid.empty()) grid = default_grid(a.age);
    check_grid(grid);

    CompareOutcome out;
    Report& r = out.report;
    r.meta = sim_meta(s, "compare");
    add_counters(r, s);

    std::vector<double> an_cdf(grid.size()), em_cdf(grid.size()), an_arr(grid.size()), em_arr(grid.size());
    double abs_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        an_cdf[i] = age_cdf(a.age, grid[i]);
        em_cdf[i] = empirical_age_cdf(s, grid[i]);
        an_arr[i] = a.arrival_ccdf(grid[i]);
        em_arr[i] = empirical_arrival_ccdf(s, grid[i]);
        abs_err += std::abs(an_cdf[i] - em_cdf[i]);
    }
    r.column("age/grid", grid);
    r.column("age/cdf_model", an_cdf);
    r.column("age/cdf_sim", em_cdf);
    r.column("at_arrival/grid", grid);
    r.column("at_arrival/ccdf_model", an_arr);
    r.column("at_arrival/ccdf_sim", em_arr);

    // The any-time empirical CDF is continuous, so the grid supremum is
    // the natural KS statistic; the at-arrival one is a step function.
    const double ks_age = sup_distance(grid, [&](double x) { return age_cdf(a.age, x); },
                                       [&](double x) { return empirical_age_cdf(s, x); });
    const double ks_arrival = ks_distance_tabulated(
        s.informative_ages, [&](double x) { return 1.0 - a.arrival_ccdf(x); }, tol.ks_points);
    const double mean_model = age_mean(a.age);
    const double z = std::abs(mean_model - est.mean) / est.se;

    r.scalar("metrics/mean_model", mean_model);
    r.scalar("metrics/mean_sim", est.mean);
    r.scalar("metrics/se", est.se);
    r.scalar("metrics/z", z);
    r.scalar("metrics/mean_abs_cdf_error", abs_err / static_cast<double>(grid.size()));
    r.scalar("metrics/ks_age", ks_age);
    r.scalar("metrics/ks_at_arrival", ks_arrival);

    out.pass = ks_age < tol.ks && ks_arrival < tol.ks && z < tol.z;
    r.scalar("verdict/pass", out.pass ? 1.0 : 0.0);
    r.meta["verdict"] = out.pass ? "pass" : "fail";
    r.meta["tolerances"] = {{"ks", tol.ks}, {"z", tol.z}};
    return out;
}

/// Mean and quantiles over the Cartesian grid lambdas x mus, spread over
/// `jobs` threads. Rows come out in (lambda, mu) order regardless.
template <class Real>
Report sweep_report(const std::vector<double>& lambdas, const std::vector<double>& mus, int i_max,
                    const std::vector<double>& epsilons = default_epsilons, unsigned jobs = 1)
{
    check_epsilons(epsilons);
    std::vector<SystemParams> points;
    for (double l : lambdas) {
        for (double m : mus) {
            SystemParams p{l, m, i_max};
            p.validate();
            points.push_back(p);
        }
    }
    const std::size_t cols = 3 + epsilons.size();
    std::vector<std::vector<double>> rows(points.size(), std::vector<double>(cols));
    auto work = [&](std::size_t i) {
        const AgeDistribution<Real> d = age_density<Real>(points[i]);
        auto& row = rows[i];
        row[0] = age_mean(d);
        row[1] = age_moment(d, 2);
        row[2] = age_moment(d, 3);
        for (std::size_t e = 0; e < epsilons.size(); ++e) row[3 + e] = age_quantile(d, epsilons[e]);
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < points.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < points.size(); i += jobs) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    Report r;
    r.meta = {{"command", "sweep"}, {"i_max", i_max}, {"seed", nullptr}, {"version", version}};
    std::vector<double> lam, mu;
    for (const auto& p : points) {
        lam.push_back(p.lambda);
        mu.push_back(p.mu);
    }
    r.column("points/lambda", lam);
    r.column("points/mu", mu);
    const char* names[] = {"points/mean", "points/m2", "points/m3"};
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> col;
        for (const auto& row : rows) col.push_back(row[c]);
        r.column(c < 3 ? names[c] : "points/quantile_" + eps_key(epsilons[c - 3]), col);
    }
    return r;
}

} // namespace aoi
