// aoi: analytic age-of-information engine and channel simulator.

#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <aoi/aoi.hpp>

namespace {

using Real = aoi::wide_real;

enum Exit : int { ok = 0, invalid_input = 2, no_data = 3, compare_failed = 4 };

struct Options {
    double lambda = 1.0;
    double mu = 1.0;
    int imax = 1;
    std::string grid;
    double messages = 1e5;
    std::uint64_t seed = 1;
    double warmup = 0.05;
    std::string format = "json";
    std::string output;
    std::string epsilons;
    std::string lambdas = "0.25,0.5,1,2,4";
    std::string mus = "1";
    unsigned jobs = 1;
    double ks_tol = 0.02;
    double z_tol = 3.0;
};

aoi::SystemParams params_of(const Options& o)
{
    aoi::SystemParams p{o.lambda, o.mu, o.imax};
    p.validate();
    return p;
}

aoi::SimConfig sim_config_of(const Options& o)
{
    if (!(o.messages >= 1.0) || o.messages != std::floor(o.messages) || o.messages > 1e12) {
        throw aoi::parameter_error("--messages must be a positive integer");
    }
    aoi::SimConfig c;
    c.params = params_of(o);
    c.n_messages = static_cast<std::uint64_t>(o.messages);
    c.seed = o.seed;
    c.warmup_fraction = o.warmup;
    c.validate();
    return c;
}

std::vector<double> grid_of(const Options& o)
{
    return o.grid.empty() ? std::vector<double>{} : aoi::parse_grid(o.grid);
}

std::vector<double> epsilons_of(const Options& o)
{
    return o.epsilons.empty() ? aoi::default_epsilons : aoi::parse_list(o.epsilons);
}

void emit(const aoi::Report& r, const Options& o)
{
    const std::string text = aoi::render(r, o.format);
    if (o.output.empty() || o.output == "-") {
        std::cout << text;
    } else {
        aoi::write_atomic(aoi::resolve_output(o.output), text);
    }
}

void check_format(const Options& o)
{
    if (o.format != "json" && o.format != "csv") throw aoi::parameter_error("--format must be csv or json");
}

int run_analyze(const Options& o)
{
    check_format(o);
    const auto p = params_of(o);
    const auto grid = grid_of(o);
    const auto eps = epsilons_of(o);
    const aoi::Analysis<Real> a(p);
    emit(aoi::analyze_report(a, grid, eps), o);
    return ok;
}

int run_simulate(const Options& o)
{
    check_format(o);
    const auto cfg = sim_config_of(o);
    const auto grid = grid_of(o);
    const auto s = aoi::simulate(cfg);
    emit(aoi::simulate_report(s, grid), o);
    return ok;
}

int run_compare(const Options& o)
{
    check_format(o);
    const auto cfg = sim_config_of(o);
    const auto grid = grid_of(o);
    if (!(o.ks_tol > 0.0) || !(o.z_tol > 0.0)) throw aoi::parameter_error("tolerances must be > 0");
    const aoi::Analysis<Real> a(cfg.params);
    const auto s = aoi::simulate(cfg);
    aoi::CompareTolerances tol;
    tol.ks = o.ks_tol;
    tol.z = o.z_tol;
    const auto out = aoi::compare_report(a, s, grid, tol);
    emit(out.report, o);
    std::cerr << "compare: " << (out.pass ? "pass" : "fail") << "\n";
    return out.pass ? ok : compare_failed;
}

int run_sweep(const Options& o)
{
    check_format(o);
    if (o.imax < 1 || o.imax > aoi::default_i_max_cap) throw aoi::parameter_error("--imax out of range");
    const auto r = aoi::sweep_report<Real>(aoi::parse_list(o.lambdas), aoi::parse_list(o.mus), o.imax,
                                           epsilons_of(o), o.jobs);
    emit(r, o);
    return ok;
}

// Hand-derived values for the two smallest channels.
int run_selftest()
{
    int failures = 0;
    auto check = [&](const std::string& what, double got, double want, double tol = 1e-10) {
        const bool good = std::abs(got - want) <= tol;
        std::cout << (good ? "ok   " : "FAIL ") << what << ": " << got << " (want " << want << ")\n";
        if (!good) ++failures;
    };
    {
        const aoi::Analysis<Real> a({1.0, 1.0, 1});
        const auto& m = a.model;
        check("I=1 p0", static_cast<double>(m.forward.p[0]), 0.5);
        check("I=1 p1", static_cast<double>(m.forward.p[1]), 0.5);
        check("I=1 lambda_hat", static_cast<double>(m.forward.lambda_hat), 0.5);
        check("I=1 mean age", aoi::age_mean(a.age), 2.5);
        for (double x : {0.5, 1.0, 3.0}) {
            check("I=1 f(" + std::to_string(x) + ")", aoi::age_pdf(a.age, x), 0.5 * (x + x * x / 2) * std::exp(-x));
            check("I=1 g(" + std::to_string(x) + ")", static_cast<double>(aoi::ep_eval(a.at_arrival, Real(x))),
                  std::exp(-x));
        }
    }
    {
        const aoi::Analysis<Real> a({1.0, 1.0, 2});
        const auto& m = a.model;
        check("I=2 p0", static_cast<double>(m.forward.p[0]), 1.0 / 2);
        check("I=2 p1", static_cast<double>(m.forward.p[1]), 1.0 / 3);
        check("I=2 p2", static_cast<double>(m.forward.p[2]), 1.0 / 6);
        check("I=2 n_bar", static_cast<double>(m.forward.n_bar), 2.0 / 3);
        check("I=2 lambda'_1", static_cast<double>(m.reversed.lambda_prime[1]), 1.5);
        check("I=2 lambda'_2", static_cast<double>(m.reversed.lambda_prime[2]), 2.0);
        check("I=2 mu'_01", static_cast<double>(m.reversed.mu_prime[0][1]), 2.0 / 3);
        check("I=2 mu'_02", static_cast<double>(m.reversed.mu_prime[0][2]), 1.0 / 3);
        check("I=2 mu'_12", static_cast<double>(m.reversed.mu_prime[1][2]), 0.5);
        check("I=2 p(1,0)", static_cast<double>(m.weights.weight(1, 0)), 0.5);
        check("I=2 p(2,0)", static_cast<double>(m.weights.weight(2, 0)), 0.25);
        check("I=2 p(2,1)", static_cast<double>(m.weights.weight(2, 1)), 0.25);
        const double x = 0.7;
        check("I=2 g(x|2,1)", static_cast<double>(aoi::ep_eval(m.behind.density(2, 1), Real(x))),
              (3 * x + x * x) * std::exp(-2 * x));
        check("I=2 h(x|1)", static_cast<double>(aoi::ep_eval(m.ahead.h[1], Real(x))), (1 + 2 * x) * std::exp(-2 * x));
        check("I=2 integral", static_cast<double>(aoi::ep_integral(a.age.density)), 1.0);
    }
    std::cout << (failures ? "selftest FAILED" : "selftest passed") << "\n";
    return failures ? 1 : ok;
}

void add_params(CLI::App* cmd, Options& o)
{
    cmd->add_option("--lambda", o.lambda, "message generation rate");
    cmd->add_option("--mu", o.mu, "per-message delivery rate");
    cmd->add_option("--imax", o.imax, "window: informative messages in flight");
}

void add_output(CLI::App* cmd, Options& o)
{
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--output", o.output, "output file (stdout if omitted)");
}

void add_sim(CLI::App* cmd, Options& o)
{
    cmd->add_option("--messages", o.messages, "generated messages per run");
    cmd->add_option("--seed", o.seed, "PRNG seed");
    cmd->add_option("--warmup", o.warmup, "fraction of the horizon discarded");
}

} // namespace

int main(int argc, char** argv)
{
    Options o;
    CLI::App app{"Age of information in a windowed channel with overtaking"};
    app.require_subcommand(1);

    auto* analyze = app.add_subcommand("analyze", "exact stationary age law");
    add_params(analyze, o);
    analyze->add_option("--grid", o.grid, "start:stop:count");
    analyze->add_option("--epsilons", o.epsilons, "quantile levels, comma separated");
    add_output(analyze, o);

    auto* simulate = app.add_subcommand("simulate", "discrete-event simulation");
    add_params(simulate, o);
    add_sim(simulate, o);
    simulate->add_option("--grid", o.grid, "start:stop:count");
    add_output(simulate, o);

    auto* compare = app.add_subcommand("compare", "model against simulation");
    add_params(compare, o);
    add_sim(compare, o);
    compare->add_option("--grid", o.grid, "start:stop:count");
    compare->add_option("--ks-tol", o.ks_tol, "KS distance tolerance");
    compare->add_option("--z-tol", o.z_tol, "mean tolerance in standard errors");
    add_output(compare, o);

    auto* sweep = app.add_subcommand("sweep", "mean and quantiles over a parameter grid");
    sweep->add_option("--lambdas", o.lambdas, "comma separated");
    sweep->add_option("--mus", o.mus, "comma separated");
    sweep->add_option("--imax", o.imax, "window size");
    sweep->add_option("--epsilons", o.epsilons, "quantile levels, comma separated");
    sweep->add_option("--jobs", o.jobs, "worker threads");
    add_output(sweep, o);

    auto* selftest = app.add_subcommand("selftest", "worked examples for I_max = 1, 2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return invalid_input;
    }

    try {
        if (*analyze) return run_analyze(o);
        if (*simulate) return run_simulate(o);
        if (*compare) return run_compare(o);
        if (*sweep) return run_sweep(o);
        if (*selftest) return run_selftest();
    } catch (const aoi::parameter_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return invalid_input;
    } catch (const aoi::insufficient_data& e) {
        std::cerr << "error: insufficient data: " << e.what() << "\n";
        return no_data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return invalid_input;
}
