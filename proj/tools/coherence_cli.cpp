// coherence: command-line front end.
//
// Exit codes: 0 ok, 1 property failure, 2 bad input, 3 resource cap.

#include <CLI11.hpp>
#include <coherence/coherence.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace coherence;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    double tol_edge = default_tolerances().tol_edge;
    double diag_cut = default_tolerances().diag_cut;

    Tolerances tolerances() const {
        Tolerances t;
        t.tol_edge = tol_edge;
        t.diag_cut = diag_cut;
        return t;
    }
};

void emit(const Common &c, const std::string &text) {
    if (c.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw InvalidArgument("cannot write '" + c.out + "'");
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Coherence measures, protocols and property suites for finite-dimensional states"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option values; unknown keys are rejected");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Common common;
    app.add_option("--seed", common.seed, "64-bit seed for every random choice")->capture_default_str();
    app.add_option("-o,--out", common.out, "write the result here instead of stdout");
    app.add_option("--tol-edge", common.tol_edge, "|R_ij| >= 1 - tol_edge marks a clique edge")->capture_default_str();
    app.add_option("--diag-cut", common.diag_cut, "diagonal entries below this are outside the support")
        ->capture_default_str();

    std::string state_path;
    std::size_t budget = 200, restarts = 4;

    auto *measure = app.add_subcommand("measure", "full report: Q, C_r, lambda, eta, mu_k, C_f estimate, C_f^U");
    bool no_mu = false;
    measure->add_option("--state", state_path, "state JSON file")->required();
    measure->add_option("--budget", budget, "column-generation rounds for C_f^U")->capture_default_str();
    measure->add_flag("--no-mu", no_mu, "skip the mu_k profile");

    auto *mu = app.add_subcommand("mu", "mu_k(rho), exact or flagged greedy; optionally smoothed");
    std::string k_opt = "all";
    double mu_eps = 0.0;
    mu->add_option("--state", state_path, "state JSON file")->required();
    mu->add_option("--k", k_opt, "a single k, or 'all' for 1..d")->capture_default_str();
    mu->add_option("--eps", mu_eps, "smoothing radius in trace norm (0: none)")->capture_default_str();

    auto *cfu = app.add_subcommand("cfu", "C_f^U bounds and the witness decomposition");
    cfu->add_option("--state", state_path, "state JSON file")->required();
    cfu->add_option("--budget", budget, "column-generation rounds per restart")->capture_default_str();
    cfu->add_option("--restarts", restarts, "independent restarts")->capture_default_str();

    auto *distill = app.add_subcommand("distill", "clique-block distillation with Monte Carlo outcome sampling");
    std::size_t copies = 1000, trials = 32;
    distill->add_option("--state", state_path, "state JSON file")->required();
    distill->add_option("--n", copies, "copies per trial")->capture_default_str();
    distill->add_option("--trials", trials, "independent trials")->capture_default_str();

    auto *dilute = app.add_subcommand("dilute", "plan and simulate dilution of Psi_k^(x)n from coherence bits");
    std::uint64_t dk = 3, dn = 100;
    double ddelta = 0.1, deps = 0.1;
    dilute->add_option("--k", dk, "target uniform state size")->capture_default_str();
    dilute->add_option("--n", dn, "target copies")->capture_default_str();
    dilute->add_option("--delta", ddelta, "rate slack")->capture_default_str();
    dilute->add_option("--eps", deps, "trace-norm error")->capture_default_str();
    dilute->add_option("--state", state_path, "dilute a mixed state through its C_f^U witness instead");

    auto *aep = app.add_subcommand("aep", "tweaked smoothed max-entropy scan of the block-label joint distribution");
    double aeps = 0.2;
    std::size_t nmax = 12;
    std::string format = "csv";
    aep->add_option("--state", state_path, "state JSON file")->required();
    aep->add_option("--eps", aeps, "smoothing radius")->capture_default_str();
    aep->add_option("--nmax", nmax, "largest n")->capture_default_str();
    aep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    auto *verify = app.add_subcommand("verify", "run the seeded property suites");
    std::string filter;
    double scale = 1.0;
    bool verify_json = false;
    verify->add_option("--filter", filter, "run properties whose name or group contains this");
    verify->add_option("--scale", scale, "multiply every case count")->capture_default_str();
    verify->add_flag("--json", verify_json, "emit the full JSON report");

    auto *rstate = app.add_subcommand("random-state", "draw a state from a seeded ensemble");
    std::size_t dim = 3;
    std::string ensemble = "hilbert-schmidt";
    std::vector<std::size_t> profile;
    rstate->add_option("--dim", dim, "dimension")->capture_default_str();
    rstate->add_option("--ensemble", ensemble, "hilbert-schmidt, pure, block-structured or diagonally-dominant")
        ->capture_default_str();
    rstate->add_option("--profile", profile, "block sizes for block-structured, e.g. 2,1")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const Tolerances tol = common.tolerances();
        if (*measure) {
            MeasureOptions opt;
            opt.tol = tol;
            opt.include_mu = !no_mu;
            opt.cfu.max_rounds = budget;
            opt.cfu.seed = common.seed;
            opt.cf.seed = common.seed;
            emit(common, report_to_json(measure_state(load_state(state_path, tol), opt)).dump(2));
        } else if (*mu) {
            const auto rho = load_state(state_path, tol);
            MuOptions mo;
            mo.tol = tol;
            nlohmann::json rows = nlohmann::json::array();
            std::size_t lo = 1, hi = rho.dim();
            if (k_opt != "all") {
                std::size_t pos = 0;
                unsigned long v = 0;
                try {
                    v = std::stoul(k_opt, &pos);
                } catch (const std::exception &) {
                    pos = 0;
                }
                if (pos != k_opt.size() || v < 1 || v > rho.dim())
                    throw InvalidArgument("--k must be 'all' or an integer in [1, " + std::to_string(rho.dim()) + "]");
                lo = hi = v;
            }
            for (std::size_t k = lo; k <= hi; ++k) {
                if (mu_eps > 0.0) {
                    const auto s = mu_k_smoothed_ball(rho, k, mu_eps, common.seed, 200, mo);
                    rows.push_back({{"k", k}, {"value", s.value}, {"epsilon", mu_eps}, {"route", s.route},
                                    {"heuristic_upper_bound", s.heuristic_upper_bound}});
                } else {
                    const auto r = mu_k(rho, k, mo);
                    rows.push_back({{"k", k}, {"value", r.value}, {"method", to_string(r.method)}, {"witness", r.witness}});
                }
            }
            emit(common, rows.dump(2));
        } else if (*cfu) {
            CfuOptions opt;
            opt.max_rounds = budget;
            opt.restarts = restarts;
            opt.seed = common.seed;
            emit(common, cfu_to_json(cfu_optimize(load_state(state_path, tol), opt), true).dump(2));
        } else if (*distill) {
            const auto r = distill_accounting(load_state(state_path, tol), copies, common.seed, trials, tol);
            nlohmann::json j{{"n", r.n},
                             {"trials", r.trials},
                             {"seed", r.seed},
                             {"block_probabilities", r.block_probabilities},
                             {"block_yields", r.block_yields},
                             {"outcome_counts", r.outcome_counts},
                             {"deterministic_rate", r.deterministic_rate},
                             {"empirical_rate", r.empirical_rate},
                             {"empirical_variance", r.empirical_variance},
                             {"standard_error", r.standard_error}};
            emit(common, j.dump(2));
        } else if (*dilute) {
            if (!state_path.empty()) {
                CfuOptions opt;
                opt.seed = common.seed;
                const auto rep = cfu_optimize(load_state(state_path, tol), opt);
                if (!rep.witness) throw NotApplicable("state has no uniform decomposition (C_f^U = inf)");
                const auto acc = mixed_dilution_accounting(*rep.witness, dn, ddelta, deps);
                nlohmann::json terms = nlohmann::json::array();
                for (const auto &t : acc.terms)
                    terms.push_back({{"k", t.k}, {"weight", t.weight}, {"copies", t.copies},
                                     {"M", t.plan.M}, {"feasible", t.k < 2 || t.plan.feasible}});
                emit(common, nlohmann::json{{"n", acc.n},
                                            {"delta", acc.delta},
                                            {"delta_term", acc.delta_term},
                                            {"terms", terms},
                                            {"total_bits", acc.total_bits},
                                            {"rate", acc.rate},
                                            {"rate_target", acc.rate_target},
                                            {"error_bound", acc.error_bound},
                                            {"feasible", acc.feasible}}
                                 .dump(2));
            } else {
                const auto plan = plan_dilution(dk, dn, ddelta, deps);
                nlohmann::json j{{"k", plan.k},        {"n", plan.n},
                                 {"delta", plan.delta}, {"epsilon", plan.epsilon},
                                 {"feasible", plan.feasible}, {"integer_log", plan.integer_log}};
                if (plan.feasible) {
                    const auto sim = simulate_dilution(plan);
                    j["M"] = plan.M;
                    j["N"] = plan.N;
                    j["success_probability"] = plan.success_probability;
                    j["error"] = sim.error;
                    j["rate"] = sim.rate;
                } else {
                    j["reason"] = plan.reason;
                }
                emit(common, j.dump(2));
            }
        } else if (*aep) {
            const auto rho = load_state(state_path, tol);
            const auto joint = joint_from_state(rho, clique_partition(rho, tol), tol);
            const auto points = aep_scan(joint, aeps, nmax);
            if (format == "csv") {
                std::ostringstream s;
                s << "n,value,upper_curve\n";
                for (const auto &p : points) s << p.n << ',' << num(p.value) << ',' << num(p.upper_curve) << '\n';
                emit(common, s.str());
            } else {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto &p : points)
                    rows.push_back({{"n", p.n}, {"value", p.value}, {"upper_curve", p.upper_curve},
                                    {"delta", p.delta}, {"enumerated", p.enumerated}});
                emit(common, rows.dump(2));
            }
        } else if (*verify) {
            VerifyOptions opt;
            opt.seed = common.seed;
            opt.filter = filter;
            opt.tol = tol;
            opt.scale = scale;
            const auto results = run_properties(opt);
            if (results.empty()) throw InvalidArgument("no property matches '" + filter + "'");
            bool all = true;
            nlohmann::json report = nlohmann::json::array();
            std::ostringstream s;
            for (const auto &r : results) {
                all = all && r.passed;
                report.push_back(property_to_json(r));
                s << (r.passed ? "PASS " : "FAIL ") << r.group << '/' << r.name << " (" << r.cases << " cases";
                if (!r.passed) s << ", " << r.failures << " failing): " << r.detail << "\n  counterexample: "
                                 << r.counterexample.dump();
                else s << ")";
                s << '\n';
            }
            emit(common, verify_json ? report.dump(2) : s.str());
            return all ? 0 : 1;
        } else if (*rstate) {
            CounterRng rng(common.seed, 0x5eed);
            emit(common, state_to_json(random_state(parse_ensemble(ensemble), dim, rng, profile)).dump(2));
        }
    } catch (const CapExceeded &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
