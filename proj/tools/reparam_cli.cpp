// reparam: command-line front end over the library checks.
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reparam/reparam.hpp"

using nlohmann::ordered_json;
using namespace reparam;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return detail::fmt_num(x);
}

ordered_json checks_json(const std::vector<Check>& checks) {
    ordered_json a = ordered_json::array();
    for (const auto& c : checks)
        a.push_back({{"name", c.name}, {"status", status_name(c.status)}, {"metric", c.metric}, {"threshold", c.threshold}});
    return a;
}

ordered_json vec_json(const std::vector<double>& v) { return ordered_json(v); }

ordered_json mat_json(const RealMat& m) {
    ordered_json a = ordered_json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        auto r = m.row(i);
        a.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return a;
}

ordered_json ci_json(const ConfidenceInterval& ci) {
    return {{"estimate", ci.estimate}, {"se", ci.se}, {"lower", ci.lower}, {"upper", ci.upper}};
}

ordered_json fit_json(const FitReport& f) {
    return {{"theta_hat", vec_json(f.theta_hat)},
            {"loglik", f.loglik},
            {"gradient", vec_json(f.gradient)},
            {"fisher", mat_json(f.fisher)},
            {"iterations", {{"init_draws", f.init_draws},
                            {"gradient", f.gradient_iterations},
                            {"newton", f.newton_iterations},
                            {"fallback", f.fallback_steps}}},
            {"converged", f.converged}};
}

void print_value(const std::string& key, const ordered_json& v, int indent) {
    const std::string pad(indent, ' ');
    if (v.is_object()) {
        std::cout << pad << key << ":\n";
        for (const auto& [k, x] : v.items()) print_value(k, x, indent + 2);
    } else if (v.is_number_float()) {
        std::cout << pad << key << ": " << num(v.get<double>()) << "\n";
    } else if (v.is_array() && !v.empty() && v[0].is_array()) {
        std::cout << pad << key << ":\n";
        for (const auto& row : v) print_value("", row, indent + 2);
    } else if (v.is_array()) {
        std::cout << pad << (key.empty() ? "" : key + ": ") << "[";
        for (std::size_t i = 0; i < v.size(); ++i)
            std::cout << (i ? ", " : "") << (v[i].is_number() ? num(v[i].get<double>()) : v[i].dump());
        std::cout << "]\n";
    } else {
        std::cout << pad << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
}

// Human form mirrors the JSON report; numbers print in round-trip form.
void print_human(const ordered_json& rep) {
    std::cout << rep["command"].get<std::string>() << "\n";
    for (const auto& c : rep["checks"]) {
        std::cout << "  [" << c["status"].get<std::string>() << "] " << c["name"].get<std::string>() << "  metric="
                  << (c["metric"].is_null() ? "inf" : num(c["metric"].get<double>()))
                  << " threshold=" << num(c["threshold"].get<double>()) << "\n";
    }
    if (rep.contains("result"))
        for (const auto& [k, v] : rep["result"].items()) print_value(k, v, 2);
    std::cout << "status: " << rep["status"].get<std::string>() << "\n";
}

int finish(ordered_json rep, const std::vector<Check>& checks, bool json, bool extra_fail = false) {
    const bool ok = all_pass(checks) && !extra_fail;
    rep["checks"] = checks_json(checks);
    rep["status"] = ok ? "pass" : "fail";
    // keep the status last for readability
    ordered_json out;
    for (const auto& key : {"command", "seed", "checks", "result", "status"})
        if (rep.contains(key)) out[key] = rep[key];
    if (json)
        std::cout << out.dump(2) << "\n";
    else
        print_human(out);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();
    CLI::App app{"Parametrization round trips, distribution checks, figure grids and MLE demos"};
    app.fallthrough();
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    bool json = false;
    double tol = 1e-7;
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_flag("--json", json, "emit a JSON report");
    app.add_option("--tol", tol, "round-trip tolerance")->capture_default_str()->check(CLI::PositiveNumber);

    auto* rt = app.add_subcommand("roundtrip", "random round trips over a spec");
    std::string spec_text;
    std::size_t trials = 1000;
    rt->add_option("--spec", spec_text, "spec in the text grammar")->required();
    rt->add_option("--trials", trials, "number of random theta")->capture_default_str();

    auto* dc = app.add_subcommand("distcheck", "Monte-Carlo distribution checks");
    std::string family;
    std::size_t dim = 2, samples = 100000;
    dc->add_option("--family", family, "simplex|sphere|halfsphere|ball|gaussian")
        ->required()
        ->check(CLI::IsMember({"simplex", "sphere", "halfsphere", "ball", "gaussian"}));
    dc->add_option("--dim", dim, "dimension n")->capture_default_str()->check(CLI::PositiveNumber);
    dc->add_option("--samples", samples, "sample size (>= 10000)")->capture_default_str();

    auto* gr = app.add_subcommand("grid", "map a 2-D grid (figure data) to CSV");
    std::string map, out_path = "-";
    double range = 5, step = 0.25;
    gr->add_option("--map", map, "simplex2|sphere2|halfsphere2|ball2")
        ->required()
        ->check(CLI::IsMember({"simplex2", "sphere2", "halfsphere2", "ball2"}));
    gr->add_option("--range", range, "grid covers [-R, R]^2")->capture_default_str();
    gr->add_option("--step", step, "grid step")->capture_default_str();
    gr->add_option("--out", out_path, "CSV path, - for stdout")->capture_default_str();

    auto* ml = app.add_subcommand("mle", "simulate, fit and report confidence intervals");
    std::string model;
    std::size_t n_obs = 1000;
    double mu0 = 5, beta0 = 2, beta_scale = 1, nu0 = 7;
    bool random_init = false;
    ml->add_option("model", model, "gumbel|student")->required()->check(CLI::IsMember({"gumbel", "student"}));
    ml->add_option("--n", n_obs, "sample size")->capture_default_str();
    ml->add_option("--mu", mu0, "Gumbel location")->capture_default_str();
    ml->add_option("--beta", beta0, "Gumbel scale")->capture_default_str()->check(CLI::PositiveNumber);
    ml->add_option("--beta-scale", beta_scale, "softplus scale of the beta parametrization")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    ml->add_option("--nu", nu0, "Student degrees of freedom")->capture_default_str()->check(CLI::PositiveNumber);
    ml->add_flag("--random-init", random_init, "start from a Logistic draw instead of moment estimates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    int rc = 0;
    try {
        ordered_json rep;
        rep["seed"] = seed;
        Rng rng(seed);
        if (*rt) {
            ParamSpec spec = parse_spec(spec_text);
            rep["command"] = "roundtrip --spec \"" + render(spec) + "\" --trials " + std::to_string(trials) +
                             " --seed " + std::to_string(seed) + " --tol " + num(tol);
            const auto s = roundtrip_trials(spec, trials, rng);
            std::vector<Check> checks{check_le("max theta round-trip error", s.max_theta_error, tol),
                                      check_le("max value round-trip error", s.max_value_error, tol),
                                      check_le("inverse failures", double(s.inverse_failures), 0)};
            rep["result"] = {{"spec", render(spec)},
                             {"size", s.size},
                             {"trials", s.trials},
                             {"max_theta_error", s.max_theta_error},
                             {"max_value_error", s.max_value_error},
                             {"inverse_failures", s.inverse_failures},
                             {"worst_theta", vec_json(s.worst_theta)}};
            rc = finish(rep, checks, json);
        } else if (*dc) {
            if (samples < 10000) throw UsageError("--samples must be >= 10000");
            rep["command"] = "distcheck --family " + family + " --dim " + std::to_string(dim) + " --samples " +
                             std::to_string(samples) + " --seed " + std::to_string(seed);
            rc = finish(rep, distcheck(family, dim, samples, rng), json);
        } else if (*gr) {
            rep["command"] = "grid --map " + map + " --range " + num(range) + " --step " + num(step) + " --out " +
                             out_path;
            const auto rows = grid_rows(map, range, step);
            std::ofstream file;
            if (out_path != "-") {
                file.open(out_path);
                if (!file) throw UsageError("cannot write " + out_path);
            }
            std::ostream& os = out_path == "-" ? std::cout : file;
            os << "x0,x1,y0,y1" << (rows.front().y.size() == 3 ? ",y2" : "") << "\n";
            for (const auto& r : rows) {
                os << num(r.x0) << "," << num(r.x1);
                for (double y : r.y) os << "," << num(y);
                os << "\n";
            }
            os.flush();
            if (!os) throw UsageError("failed writing " + out_path);
            rep["result"] = {{"rows", rows.size()}, {"path", out_path}};
            const auto checks = grid_membership(map, rows);
            if (out_path == "-") {
                // CSV owns stdout; the report goes to stderr
                std::streambuf* old = std::cout.rdbuf(std::cerr.rdbuf());
                rc = finish(rep, checks, json);
                std::cout.rdbuf(old);
            } else {
                rc = finish(rep, checks, json);
            }
        } else if (*ml) {
            if (model == "gumbel") {
                rep["command"] = "mle gumbel --n " + std::to_string(n_obs) + " --mu " + num(mu0) + " --beta " +
                                 num(beta0) + " --beta-scale " + num(beta_scale) + " --seed " + std::to_string(seed) +
                                 (random_init ? " --random-init" : "");
                const auto d = run_gumbel_demo(n_obs, mu0, beta0, seed, beta_scale, !random_init);
                const double width = d.beta_ci.upper - d.beta_ci.lower;
                std::vector<Check> checks{
                    {"converged", d.fit.converged ? Status::pass : Status::fail, d.fit.gradient_norm(),
                     1e-4 * std::max(1.0, std::abs(d.fit.loglik))},
                    check_ge("beta CI width >= 0.15", width, 0.15),
                    check_le("beta CI width <= 0.23", width, 0.23),
                    {"beta CI contains true beta", Status::info,
                     double(d.beta_ci.lower <= beta0 && beta0 <= d.beta_ci.upper), 1}};
                rep["result"] = {{"mu_hat", d.mu_hat},
                                 {"beta_hat", d.beta_hat},
                                 {"mu_ci", ci_json(d.mu_ci)},
                                 {"beta_ci", ci_json(d.beta_ci)},
                                 {"fit", fit_json(d.fit)}};
                rc = finish(rep, checks, json);
            } else {
                rep["command"] = "mle student --n " + std::to_string(n_obs) + " --nu " + num(nu0) + " --seed " +
                                 std::to_string(seed) + (random_init ? " --random-init" : "");
                const auto d = run_student_demo(n_obs, seed, nu0, !random_init);
                auto finite_pos = [](const ConfidenceInterval& ci) {
                    return std::isfinite(ci.lower) && std::isfinite(ci.upper) && ci.lower > 0;
                };
                std::vector<Check> checks{
                    {"converged", d.fit.converged ? Status::pass : Status::fail, d.fit.gradient_norm(),
                     1e-4 * std::max(1.0, std::abs(d.fit.loglik))},
                    {"nu CI finite and positive", finite_pos(d.nu_ci) ? Status::pass : Status::fail, d.nu_ci.lower, 0},
                    {"det Sigma CI finite and positive", finite_pos(d.det_ci) ? Status::pass : Status::fail,
                     d.det_ci.lower, 0},
                    {"nu CI contains true nu", Status::info, double(d.nu_ci.lower <= nu0 && nu0 <= d.nu_ci.upper), 1},
                    {"det Sigma CI contains 2.5", Status::info, double(d.det_ci.lower <= 2.5 && 2.5 <= d.det_ci.upper),
                     1}};
                rep["result"] = {{"mu_hat", vec_json(d.mu_hat)},
                                 {"Sigma_hat", mat_json(d.sigma_hat)},
                                 {"nu_hat", d.nu_hat},
                                 {"det_Sigma_hat", d.det_hat},
                                 {"nu_ci", ci_json(d.nu_ci)},
                                 {"det_Sigma_ci", ci_json(d.det_ci)},
                                 {"fit", fit_json(d.fit)}};
                rc = finish(rep, checks, json);
            }
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InitializationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "wall time: " << num(secs) << " s\n";
    return rc;
}
