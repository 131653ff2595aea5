#pragma once

// MeasureReport: every rate-relevant quantity of one state, with the method
// that produced each value.

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

#include "formation.hpp"
#include "monotones.hpp"
#include "state_io.hpp"
#include "structure.hpp"

namespace coherence {

struct MeasureOptions {
    Tolerances tol = default_tolerances();
    Caps caps = default_caps();
    CfuOptions cfu;
    CfOptions cf;
    bool include_mu = true;
};

struct MeasureReport {
    std::size_t dim = 0;
    double Q = 0.0;
    double Cr = 0.0;
    double eta = 0.0;
    double lambda = 0.0;
    std::size_t l = 0;
    std::vector<IndexSet> blocks;
    std::vector<double> mu;            // mu[k-1] = mu_k
    double Cf = 0.0;                   // upper estimate
    CfuReport CfU;
    std::map<std::string, std::string> methods;
};

inline MeasureReport measure_state(const DensityMatrix &rho, const MeasureOptions &opt = {}) {
    MeasureReport r;
    r.dim = rho.dim();
    const auto s = analyze_structure(rho, opt.tol);
    r.Q = s.Q;
    r.Cr = s.Cr;
    r.eta = s.eta;
    r.lambda = s.lambda;
    r.l = s.l;
    r.blocks = s.partition.blocks;
    r.methods["Q"] = "blockwise entropy of the trimmed state";
    r.methods["Cr"] = "eigendecomposition";

    if (opt.include_mu) {
        MuOptions mo;
        mo.tol = opt.tol;
        mo.caps = opt.caps;
        mo.allow_greedy = true;
        bool greedy = false;
        for (std::size_t k = 1; k <= rho.dim(); ++k) {
            const auto m = mu_k(rho, k, mo);
            greedy = greedy || m.method == MuMethod::greedy_lower_bound;
            r.mu.push_back(m.value);
        }
        r.methods["mu"] = greedy ? "exact where enumerable, greedy lower bound elsewhere" : "exact-enumeration";
    }

    r.Cf = cf_estimate(rho, opt.cf).value;
    r.methods["Cf"] = "convex-roof search (upper bound)";
    r.CfU = cfu_optimize(rho, opt.cfu);
    r.methods["CfU"] = r.CfU.status == CfuStatus::infinite ? "co(U) necessary condition fails"
                                                            : "column generation with dual certificate";
    return r;
}

/// Infinite values are written as the string "inf".
inline nlohmann::json finite_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

inline nlohmann::json decomposition_to_json(const UniformDecomposition &dec) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &t : dec.terms) terms.push_back({{"weight", t.weight}, {"support", t.support}, {"phases", t.phases}});
    return {{"dim", dec.dim}, {"terms", terms}, {"residual", dec.residual}, {"cost", dec.cost()}};
}

inline nlohmann::json cfu_to_json(const CfuReport &r, bool with_witness) {
    nlohmann::json j{{"lower_bound", finite_or_inf(r.lower_bound)},
                     {"upper_bound", finite_or_inf(r.upper_bound)},
                     {"status", to_string(r.status)},
                     {"residual", finite_or_inf(r.residual)},
                     {"rounds", r.rounds}};
    if (with_witness && r.witness) j["witness"] = decomposition_to_json(*r.witness);
    return j;
}

inline nlohmann::json report_to_json(const MeasureReport &r) {
    nlohmann::json j{{"dim", r.dim},     {"Q", r.Q},       {"Cr", r.Cr},         {"eta", r.eta},
                     {"lambda", r.lambda}, {"l", r.l},     {"blocks", r.blocks}, {"Cf", r.Cf},
                     {"methods", r.methods}};
    if (!r.mu.empty()) j["mu"] = r.mu;
    j["CfU"] = r.CfU.status == CfuStatus::infinite || r.CfU.status == CfuStatus::presumed_infinite
                   ? nlohmann::json("inf")
                   : nlohmann::json(r.CfU.upper_bound);
    j["CfU_report"] = cfu_to_json(r.CfU, false);
    return j;
}

} // namespace coherence
