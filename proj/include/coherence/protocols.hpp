#pragma once

// Constructive protocols: distillation by the clique-block instrument with
// Monte Carlo outcome sampling, and dilution of uniformly coherent states
// from coherence bits.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "channels.hpp"
#include "formation.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace coherence {

struct DistillationRun {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> block_probabilities;    // P(s)
    std::vector<double> block_yields;           // S(Delta(rho_s)) of the normalized block
    std::vector<std::uint64_t> outcome_counts;  // summed over all trials
    double deterministic_rate = 0.0;            // sum_s P(s) S(Delta(rho_s))
    double empirical_rate = 0.0;                // mean of yield / n over trials
    double empirical_variance = 0.0;            // sample variance of yield / n
    double standard_error = 0.0;
};

/// Each trial draws n i.i.d. block outcomes from P(s); the yield of a trial is
/// sum_s count(s) S(Delta(rho_s)). Trial t uses the generator (seed, t).
inline DistillationRun distill_accounting(const DensityMatrix &rho, std::size_t n, std::uint64_t seed,
                                          std::size_t trials, const Tolerances &tol = default_tolerances(),
                                          std::size_t workers = 0) {
    if (n == 0 || trials == 0) throw InvalidArgument("distill_accounting needs n >= 1 and trials >= 1");
    const auto part = clique_partition(rho, tol);
    DistillationRun run;
    run.n = n;
    run.trials = trials;
    run.seed = seed;
    const std::size_t k = part.size();
    run.block_probabilities = part.block_weights;
    for (std::size_t s = 0; s < k; ++s) {
        RealVector diag = part.block_states[s].diagonal().real();
        run.block_yields.push_back(shannon_entropy(diag, tol.eig_zero));
        run.deterministic_rate += part.block_weights[s] * run.block_yields.back();
    }

    std::vector<double> cumulative(k);
    double acc = 0.0;
    for (std::size_t s = 0; s < k; ++s) cumulative[s] = acc += part.block_weights[s];

    std::vector<std::vector<std::uint64_t>> counts(trials, std::vector<std::uint64_t>(k, 0));
    std::vector<double> rates(trials);
    parallel_for(
        trials,
        [&](std::size_t t) {
            CounterRng rng(seed, t);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.uniform() * acc;
                const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
                ++counts[t][std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), k - 1)];
            }
            double yield = 0.0;
            for (std::size_t s = 0; s < k; ++s) yield += static_cast<double>(counts[t][s]) * run.block_yields[s];
            rates[t] = yield / static_cast<double>(n);
        },
        workers ? workers : thread_count());

    run.outcome_counts.assign(k, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t s = 0; s < k; ++s) run.outcome_counts[s] += counts[t][s];
        run.empirical_rate += rates[t];
    }
    run.empirical_rate /= static_cast<double>(trials);
    if (trials > 1) {
        for (double r : rates) run.empirical_variance += (r - run.empirical_rate) * (r - run.empirical_rate);
        run.empirical_variance /= static_cast<double>(trials - 1);
    }
    run.standard_error = std::sqrt(run.empirical_variance / static_cast<double>(trials));
    return run;
}

// ---------------------------------------------------------------------------
// Dilution of Psi_k^{(x)n} from M coherence bits.
//
// Relabel Psi_2^{(x)M} = Psi_{2^M}, measure {Pi_0, Pi_1} with Pi_0 onto k^N of
// the 2^M basis states, keep n of the N copies on outcome 0. The integers must
// satisfy  n log k <= M + log(1 - eps/2) <= N log k <= M <= n (log k + delta).

struct DilutionPlan {
    std::uint64_t k = 2;
    std::uint64_t n = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    std::uint64_t M = 0;
    std::uint64_t N = 0;
    bool feasible = false;
    bool integer_log = false;
    double success_probability = 0.0; // k^N / 2^M
    double achieved_error = 0.0;      // trace-norm distance of the output to Psi_k^{(x)n}
    double rate_used = 0.0;           // M / n
    std::string reason;               // why the search failed
};

namespace detail {

/// Checks the four inequalities in long double.
inline bool dilution_chain_holds(std::uint64_t k, std::uint64_t n, double delta, double eps, std::uint64_t m,
                                 std::uint64_t big_n) {
    const long double lk = std::log2(static_cast<long double>(k));
    const long double slack = std::log2(1.0L - static_cast<long double>(eps) / 2.0L);
    const long double nn = static_cast<long double>(n), mm = static_cast<long double>(m),
                      bn = static_cast<long double>(big_n);
    const long double tiny = 1e-15L * (1.0L + mm);
    return nn * lk <= mm + slack + tiny && mm + slack <= bn * lk + tiny && bn * lk <= mm + tiny &&
           mm <= nn * (lk + static_cast<long double>(delta)) + tiny;
}

inline double dilution_error(std::uint64_t k, std::uint64_t n, double success) {
    // Junk branch emits |0...0>, whose overlap with Psi_k^{(x)n} is k^{-n}.
    const double overlap = std::pow(static_cast<double>(k), -static_cast<double>(n));
    return (1.0 - success) * 2.0 * std::sqrt(std::max(0.0, 1.0 - overlap));
}

} // namespace detail

/// Smallest N >= n with M = ceil(N log2 k) satisfying the chain; failure status
/// when M exceeds n (log2 k + delta) first or the cap is reached.
inline DilutionPlan plan_dilution(std::uint64_t k, std::uint64_t n, double delta, double epsilon,
                                  std::uint64_t search_cap = 1000000) {
    if (k < 2) throw InvalidArgument("plan_dilution needs k >= 2");
    if (n < 1) throw InvalidArgument("plan_dilution needs n >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("plan_dilution needs 0 < delta < 1");
    if (!(epsilon > 0.0 && epsilon < 2.0)) throw InvalidArgument("plan_dilution needs 0 < eps < 2");
    DilutionPlan plan;
    plan.k = k;
    plan.n = n;
    plan.delta = delta;
    plan.epsilon = epsilon;

    if ((k & (k - 1)) == 0) {
        const auto bits = static_cast<std::uint64_t>(std::countr_zero(k));
        plan.integer_log = true;
        plan.feasible = true;
        plan.M = bits * n;
        plan.N = n;
        plan.success_probability = 1.0;
        plan.achieved_error = 0.0;
        plan.rate_used = static_cast<double>(bits);
        return plan;
    }

    const long double lk = std::log2(static_cast<long double>(k));
    const long double m_max = static_cast<long double>(n) * (lk + static_cast<long double>(delta));
    for (std::uint64_t big_n = n; big_n <= std::max(n, search_cap); ++big_n) {
        const auto m = static_cast<std::uint64_t>(std::ceil(static_cast<long double>(big_n) * lk));
        if (static_cast<long double>(m) > m_max + 1e-15L * m_max) {
            plan.reason = "no N in [" + std::to_string(n) + ", " + std::to_string(big_n - 1) +
                          "] satisfies the chain before M exceeds n(log2 k + delta)";
            return plan;
        }
        if (detail::dilution_chain_holds(k, n, delta, epsilon, m, big_n)) {
            plan.feasible = true;
            plan.M = m;
            plan.N = big_n;
            plan.success_probability =
                static_cast<double>(std::exp2(static_cast<long double>(big_n) * lk - static_cast<long double>(m)));
            plan.achieved_error = detail::dilution_error(k, n, plan.success_probability);
            plan.rate_used = static_cast<double>(m) / static_cast<double>(n);
            return plan;
        }
    }
    plan.reason = "search cap reached";
    return plan;
}

struct DilutionOutcome {
    double error = 0.0;
    double rate = 0.0;
};

/// Exact output: success_probability Psi_k^{(x)n} + (1 - success) |0..0><0..0|.
inline DilutionOutcome simulate_dilution(const DilutionPlan &plan) {
    if (!plan.feasible) throw InvalidArgument("simulate_dilution needs a feasible plan");
    const long double lk = std::log2(static_cast<long double>(plan.k));
    const double success = static_cast<double>(
        std::exp2(static_cast<long double>(plan.N) * lk - static_cast<long double>(plan.M)));
    return {detail::dilution_error(plan.k, plan.n, std::min(1.0, success)),
            static_cast<double>(plan.M) / static_cast<double>(plan.n)};
}

// ---------------------------------------------------------------------------
// Mixed-state dilution: a decomposition sum_a p_a Psi_a is diluted term by term
// over label sequences whose counts satisfy n_a <= n (p_a + delta').

struct TermDilution {
    std::uint64_t k = 1;
    double weight = 0.0;
    std::uint64_t copies = 0; // ceil(n (p_a + delta'))
    DilutionPlan plan;
};

struct MixedDilutionAccount {
    std::uint64_t n = 0;
    double delta = 0.0;
    double delta_term = 0.0; // delta' used per term
    std::vector<TermDilution> terms;
    std::uint64_t total_bits = 0;
    double rate = 0.0;          // total_bits / n
    double rate_target = 0.0;   // decomposition cost + delta
    double error_bound = 0.0;   // sum of term errors + atypicality (Hoeffding)
    bool feasible = true;
};

inline MixedDilutionAccount mixed_dilution_accounting(const UniformDecomposition &dec, std::uint64_t n, double delta,
                                                      double epsilon) {
    if (n < 1) throw InvalidArgument("mixed_dilution_accounting needs n >= 1");
    MixedDilutionAccount acc;
    acc.n = n;
    acc.delta = delta;
    const double d = static_cast<double>(std::max<std::size_t>(dec.dim, 2));
    acc.delta_term = delta / (d * d * (std::log2(d) + 1.0) + 1.0);
    acc.rate_target = dec.cost() + delta;
    const double per_term_eps = epsilon / (2.0 * static_cast<double>(std::max<std::size_t>(dec.terms.size(), 1)));
    for (const auto &t : dec.terms) {
        TermDilution td;
        td.k = t.support.size();
        td.weight = t.weight;
        td.copies = static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * (t.weight + acc.delta_term)));
        acc.error_bound += 2.0 * std::exp(-2.0 * static_cast<double>(n) * acc.delta_term * acc.delta_term);
        if (td.k >= 2) {
            td.plan = plan_dilution(td.k, td.copies, acc.delta_term, per_term_eps);
            if (!td.plan.feasible) acc.feasible = false;
            else {
                acc.total_bits += td.plan.M;
                acc.error_bound += td.plan.achieved_error;
            }
        }
        acc.terms.push_back(std::move(td));
    }
    acc.rate = static_cast<double>(acc.total_bits) / static_cast<double>(n);
    return acc;
}

} // namespace coherence
