#pragma once

// Seeded property suites. Each check draws its cases from (seed, case index)
// and records the first counterexample it meets.

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

#include "channels.hpp"
#include "classical.hpp"
#include "formation.hpp"
#include "monotones.hpp"
#include "parallel.hpp"
#include "protocols.hpp"
#include "random_states.hpp"
#include "state_io.hpp"
#include "structure.hpp"

namespace coherence {

struct PropertyResult {
    std::string name;
    std::string group;
    bool passed = true;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string detail;
    nlohmann::json counterexample;
};

inline nlohmann::json property_to_json(const PropertyResult &r) {
    nlohmann::json j{{"name", r.name}, {"group", r.group}, {"passed", r.passed}, {"cases", r.cases},
                     {"failures", r.failures}};
    if (!r.passed) {
        j["detail"] = r.detail;
        j["counterexample"] = r.counterexample;
    }
    return j;
}

namespace detail {

class Checker {
public:
    Checker(std::string name, std::string group) {
        r_.name = std::move(name);
        r_.group = std::move(group);
    }

    void count() { ++r_.cases; }

    /// Records a failure; only the first counterexample is kept.
    void fail(const std::string &what, nlohmann::json example) {
        if (r_.passed) {
            r_.detail = what;
            r_.counterexample = std::move(example);
        }
        r_.passed = false;
        ++r_.failures;
    }

    void expect(bool ok, const std::string &what, const std::function<nlohmann::json()> &example) {
        if (!ok) fail(what, example());
    }

    PropertyResult result() const { return r_; }

private:
    PropertyResult r_;
};

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Case `index` of the mixed ensemble: the four ensembles in rotation, 2 <= d <= d_max.
inline DensityMatrix generated_state(std::uint64_t seed, std::size_t index, std::size_t d_max = 5) {
    CounterRng rng(seed, 0x57a7e000 + index);
    const auto e = static_cast<Ensemble>(index % 4);
    const std::size_t d = 2 + rng.below(d_max - 1);
    return random_state(e, d, rng);
}

/// Random mixture of uniformly coherent states, a member of co(U) by construction.
inline DensityMatrix random_cou_state(std::size_t d, CounterRng &rng, UniformDecomposition *witness = nullptr) {
    const std::size_t terms = 1 + rng.below(d * d);
    const auto w = random_simplex(terms, rng);
    UniformDecomposition dec;
    dec.dim = d;
    for (std::size_t t = 0; t < terms; ++t) {
        IndexSet s;
        for (std::size_t i = 0; i < d; ++i)
            if (rng.uniform() < 0.5) s.push_back(i);
        if (s.empty()) s.push_back(rng.below(d));
        std::vector<double> ph(s.size(), 0.0);
        for (std::size_t a = 1; a < s.size(); ++a) ph[a] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        dec.terms.push_back({w[t], s, ph});
    }
    const Matrix m = dec.reconstruct();
    if (witness) *witness = dec;
    return DensityMatrix(m);
}

// ---------------------------------------------------------------------------
// Core state arithmetic.

inline PropertyResult check_core_state_laws(std::uint64_t seed, std::size_t cases, const Tolerances &tol = default_tolerances()) {
    detail::Checker c("core-state-laws", "core");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        const auto other = generated_state(seed, i + cases);
        auto ex = [&] { return state_to_json(rho); };
        const auto dr = dephase(rho);
        c.expect(dephase(dr).matrix() == dr.matrix() && std::abs(dr.matrix().trace().real() - 1.0) <= 1e-12,
                 "dephasing is not idempotent and trace preserving", ex);
        const double s = von_neumann_entropy(rho, tol), sd = von_neumann_entropy(dr, tol);
        c.expect(sd >= s - 1e-9, "S(Delta rho) = " + detail::fmt(sd) + " < S(rho) = " + detail::fmt(s), ex);
        if (other.dim() == rho.dim()) {
            const double before = trace_distance(rho, other), after = trace_distance(dr, dephase(other));
            c.expect(after <= before + 1e-9, "dephasing increases trace distance to " + detail::fmt(after), ex);
        }
        const double sab = von_neumann_entropy(tensor(rho, other), tol);
        const double so = von_neumann_entropy(other, tol);
        c.expect(std::abs(sab - s - so) <= 1e-9, "S(a x b) = " + detail::fmt(sab) + " vs " + detail::fmt(s + so), ex);
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Channels.

inline PropertyResult check_sio_commutes_with_dephasing(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("sio-commutes-with-dephasing", "channels");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        CounterRng rng(seed, 0x5100 + i);
        const auto ch = random_sio(rho.dim(), 1 + rng.below(4), rng());
        const double gap = trace_distance(dephase(apply_sio(ch, rho)), apply_sio(ch, dephase(rho)));
        c.expect(gap <= 1e-9, "||Delta(L(rho)) - L(Delta(rho))||_1 = " + detail::fmt(gap),
                 [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"channel", channel_to_json(ch)}}; });
    }
    return c.result();
}

inline PropertyResult check_pio_is_sio(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("pio-expands-to-sio", "channels");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        CounterRng rng(seed, 0x9100 + i);
        const auto ch = random_pio(rho.dim(), 1 + rng.below(3), rng());
        try {
            const SioKraus k = ch.expand_to_sio();
            const double gap = trace_distance(apply_pio(ch, rho), apply_sio(k, rho));
            c.expect(gap <= 1e-10, "expanded Kraus form disagrees by " + detail::fmt(gap),
                     [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"channel", channel_to_json(ch)}}; });
        } catch (const Error &e) {
            c.fail(std::string("expansion does not validate: ") + e.what(), channel_to_json(ch));
        }
    }
    return c.result();
}

/// q_s = Tr[rho Pi_s] of the clique instrument against the sampler's frequencies (3 sigma).
inline PropertyResult check_instrument_frequencies(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("instrument-frequencies", "channels");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0x1f00 + i);
        const auto rho = random_state(Ensemble::block_structured, 2 + rng.below(4), rng);
        const auto part = clique_partition(rho);
        const auto outcomes = pio_instrument(clique_instrument(part, rho.dim()), rho);
        const auto run = distill_accounting(rho, 500, rng(), 4);
        const double total = static_cast<double>(run.n * run.trials);
        for (std::size_t s = 0; s < part.size(); ++s) {
            const double q = outcomes[s].probability;
            const double f = static_cast<double>(run.outcome_counts[s]) / total;
            const double sigma = std::sqrt(q * (1.0 - q) / total);
            c.expect(std::abs(f - q) <= 3.0 * sigma + 1e-12,
                     "block " + std::to_string(s) + ": frequency " + detail::fmt(f) + " vs q " + detail::fmt(q),
                     [&] { return state_to_json(rho); });
        }
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Structure.

inline PropertyResult check_q_additivity(std::uint64_t seed, std::size_t cases, const Tolerances &tol = default_tolerances()) {
    detail::Checker c("q-additivity", "additivity");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto a = generated_state(seed, 2 * i, 4), b = generated_state(seed, 2 * i + 1, 4);
        const double qa = quintessential_coherence(a, tol), qb = quintessential_coherence(b, tol);
        const double qab = quintessential_coherence(tensor(a, b), tol);
        c.expect(std::abs(qab - qa - qb) <= 1e-9,
                 "Q(a x b) = " + detail::fmt(qab) + " but Q(a) + Q(b) = " + detail::fmt(qa + qb),
                 [&] { return nlohmann::json{{"a", state_to_json(a)}, {"b", state_to_json(b)}}; });
    }
    return c.result();
}

/// lambda and eta of a product equal the larger factor value up to rounding of
/// the products R_ij R_kl (relative 1e-12).
inline PropertyResult check_lambda_eta_tensorisation(std::uint64_t seed, std::size_t cases,
                                                     const Tolerances &tol = default_tolerances()) {
    detail::Checker c("lambda-eta-tensorisation", "additivity");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto a = generated_state(seed, 2 * i, 4), b = generated_state(seed, 2 * i + 1, 4);
        const auto la = lambda_and_eta(comparison_matrix(a, tol), tol);
        const auto lb = lambda_and_eta(comparison_matrix(b, tol), tol);
        const auto lab = lambda_and_eta(comparison_matrix(tensor(a, b), tol), tol);
        const double lam = std::max(la.lambda, lb.lambda), eta = std::max(la.eta, lb.eta);
        c.expect(std::abs(lab.lambda - lam) <= 1e-12 * std::max(1.0, lam) &&
                     std::abs(lab.eta - eta) <= 1e-12 * std::max(1.0, eta),
                 "lambda " + detail::fmt(lab.lambda) + " vs " + detail::fmt(lam) + ", eta " + detail::fmt(lab.eta) +
                     " vs " + detail::fmt(eta),
                 [&] { return nlohmann::json{{"a", state_to_json(a)}, {"b", state_to_json(b)}}; });
    }
    return c.result();
}

inline PropertyResult check_block_purity(std::uint64_t seed, std::size_t cases, const Tolerances &tol = default_tolerances()) {
    detail::Checker c("block-purity", "structure");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        try {
            const auto part = clique_partition(rho, tol);
            for (std::size_t s = 0; s < part.size(); ++s) {
                if (part.blocks[s].size() < 2) continue;
                const RealVector ev = hermitian_eigenvalues(part.block_states[s]);
                c.expect(ev(ev.size() - 2) <= tol.purity, "impure block " + std::to_string(s),
                         [&] { return state_to_json(rho); });
            }
        } catch (const StructuralInconsistency &e) {
            c.fail(e.what(), state_to_json(rho));
        }
    }
    return c.result();
}

inline PropertyResult check_trimmed_state(std::uint64_t seed, std::size_t cases, const Tolerances &tol = default_tolerances()) {
    detail::Checker c("trimmed-state", "structure");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        const auto part = clique_partition(rho, tol);
        const auto bar = trimmed_state(rho, part);
        const double min_ev = hermitian_eigenvalues(bar.matrix())(0);
        const double diag_gap = (bar.matrix().diagonal() - rho.matrix().diagonal()).cwiseAbs().maxCoeff();
        c.expect(min_ev >= -1e-10 && diag_gap == 0.0,
                 "min eigenvalue " + detail::fmt(min_ev) + ", diagonal gap " + detail::fmt(diag_gap),
                 [&] { return state_to_json(rho); });
        const double q = quintessential_coherence(rho, part, tol);
        const double cr_bar = relative_entropy_of_coherence(bar, tol);
        c.expect(std::abs(q - cr_bar) <= 1e-9, "Q = " + detail::fmt(q) + " but C_r(trimmed) = " + detail::fmt(cr_bar),
                 [&] { return state_to_json(rho); });
        const double cr = relative_entropy_of_coherence(rho, tol);
        c.expect(q <= cr + 1e-9, "Q = " + detail::fmt(q) + " exceeds C_r = " + detail::fmt(cr),
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Monotones.

/// mu_k non-increase under random SIO, mu_1 = 0, mu_2 = log2(1 + eta), the
/// Gershgorin upper bound, the overlap lower bound and the D_max form.
inline PropertyResult check_mu_suite(std::uint64_t seed, std::size_t cases, const Tolerances &tol = default_tolerances()) {
    detail::Checker c("mu-monotone-suite", "monotones");
    MuOptions mo;
    mo.tol = tol;
    mo.workers = 1;
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        CounterRng rng(seed, 0x3000 + i);
        const auto ch = random_sio(rho.dim(), 1 + rng.below(4), rng());
        const auto out = apply_sio(ch, rho);
        const auto s = analyze_structure(rho, tol);
        auto ex = [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"channel", channel_to_json(ch)}}; };
        for (std::size_t k = 1; k <= rho.dim(); ++k) {
            const double before = mu_k(rho, k, mo).value, after = mu_k(out, k, mo).value;
            c.expect(after <= before + 1e-9,
                     "mu_" + std::to_string(k) + " rises from " + detail::fmt(before) + " to " + detail::fmt(after), ex);
            const double gb = gershgorin_bound(rho, k, tol);
            c.expect(before <= gb + 1e-9,
                     "mu_" + std::to_string(k) + " = " + detail::fmt(before) + " exceeds Gershgorin " + detail::fmt(gb), ex);
            const double dm = mu_dmax_crosscheck(rho, k, mo);
            c.expect(std::abs(dm - before) <= 1e-8,
                     "mu_" + std::to_string(k) + " = " + detail::fmt(before) + " but D_max form " + detail::fmt(dm), ex);
            if (k == 1) c.expect(before == 0.0, "mu_1 = " + detail::fmt(before), ex);
            if (k == 2) {
                const double expect2 = std::log2(1.0 + s.eta);
                c.expect(std::abs(before - expect2) <= 1e-9,
                         "mu_2 = " + detail::fmt(before) + " but log2(1 + eta) = " + detail::fmt(expect2), ex);
            }
        }
        std::vector<double> phases(rho.dim());
        for (auto &p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
        IndexSet all(rho.dim());
        for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
        const auto psi = PureState::uniform(rho.dim(), all, phases);
        const double lb = overlap_lower_bound(rho, psi), top = mu_k(rho, rho.dim(), mo).value;
        c.expect(top >= lb - 1e-9, "mu_d = " + detail::fmt(top) + " below overlap bound " + detail::fmt(lb), ex);
    }
    return c.result();
}

/// Witness variational form, profile monotonicity, and the V_eps laws:
/// lambda never grows, blocks align with rho's, smoothed mu_k is SIO monotone.
inline PropertyResult check_mu_structure(std::uint64_t seed, std::size_t cases, double epsilon = 0.5,
                                         const Tolerances &tol = default_tolerances()) {
    detail::Checker c("mu-structure", "monotones");
    MuOptions mo;
    mo.tol = tol;
    mo.workers = 1;
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        CounterRng rng(seed, 0x3100 + i);
        const auto ch = random_sio(rho.dim(), 1 + rng.below(4), rng());
        auto ex = [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"channel", channel_to_json(ch)}}; };
        const Matrix delta = dephase(rho).matrix();
        double prev = 0.0;
        for (std::size_t k = 1; k <= rho.dim(); ++k) {
            const auto r = mu_k(rho, k, mo);
            c.expect(r.value >= prev - 1e-12, "profile decreases at k = " + std::to_string(k), ex);
            prev = r.value;
            Matrix proj = Matrix::Zero(delta.rows(), delta.cols());
            for (auto a : r.witness) proj(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;
            const Matrix gap = std::exp2(r.value) * delta - proj * rho.matrix() * proj;
            const double min_ev = hermitian_eigenvalues((gap + gap.adjoint()) * 0.5)(0);
            c.expect(min_ev >= -1e-8, "witness of mu_" + std::to_string(k) + " violates the variational form by " +
                                          detail::fmt(min_ev), ex);
        }

        const auto base = analyze_structure(rho, tol);
        const auto set = v_epsilon(rho, epsilon, tol);
        for (const auto &m : set.members) {
            const auto s = analyze_structure(m.state, tol);
            c.expect(s.lambda <= base.lambda + 1e-12,
                     "member lambda " + detail::fmt(s.lambda) + " exceeds " + detail::fmt(base.lambda), ex);
            for (const auto &blk : s.partition.blocks) {
                bool inside = false;
                for (const auto &big : base.partition.blocks)
                    inside = inside || std::includes(big.begin(), big.end(), blk.begin(), blk.end());
                c.expect(inside, "member block is not inside a block of rho", ex);
            }
            const auto image = apply_sio(ch, m.state);
            for (std::size_t k = 2; k <= rho.dim(); ++k)
                c.expect(mu_k(image, k, mo).value <= mu_k(m.state, k, mo).value + 1e-9,
                         "mu_" + std::to_string(k) + " rises on a V_eps member", ex);
        }
        for (std::size_t k = 2; k <= rho.dim(); ++k) {
            const double before = mu_k_smoothed_V(rho, k, epsilon, mo).value;
            // Channel applied to every member: min mu_k(Lambda sigma) <= min mu_k(sigma).
            double after = kInfinity;
            for (const auto &m : set.members) after = std::min(after, mu_k(apply_sio(ch, m.state), k, mo).value);
            c.expect(after <= before + 1e-9, "smoothed mu_" + std::to_string(k) + " rises from " +
                                                 detail::fmt(before) + " to " + detail::fmt(after), ex);
        }
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Entropies.

inline PropertyResult check_entropy_identities(std::uint64_t seed, std::size_t cases,
                                               const Tolerances &tol = default_tolerances()) {
    detail::Checker c("entropy-identities", "entropy");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        const auto s = analyze_structure(rho, tol);
        const auto joint = joint_from_state(rho, s.partition, tol);
        const double h = cond_entropy(joint, tol.eig_zero), hmax = cond_max_entropy(joint, tol.eig_zero);
        c.expect(std::abs(h - s.Q) <= 1e-9, "H(J|S) = " + detail::fmt(h) + " but Q = " + detail::fmt(s.Q),
                 [&] { return state_to_json(rho); });
        c.expect(hmax == std::log2(static_cast<double>(s.l)),
                 "H_max(J|S) = " + detail::fmt(hmax) + " but log2 l = " + detail::fmt(std::log2(static_cast<double>(s.l))),
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

inline PropertyResult check_smoothing_sandwich(std::uint64_t seed, std::size_t cases,
                                               const std::vector<double> &epsilons = {0.1, 0.5},
                                               const Tolerances &tol = default_tolerances()) {
    detail::Checker c("smoothing-sandwich", "entropy");
    for (std::size_t i = 0; i < cases; ++i) {
        const auto rho = generated_state(seed, i);
        for (double eps : epsilons) {
            c.count();
            const auto cmp = restricted_smoothing_comparison(rho, eps, tol);
            c.expect(cmp.classical_eps <= cmp.quantum_eps && cmp.quantum_eps <= cmp.classical_eps2_over_4,
                     "eps " + detail::fmt(eps) + ": " + detail::fmt(cmp.classical_eps) + " <= " +
                         detail::fmt(cmp.quantum_eps) + " <= " + detail::fmt(cmp.classical_eps2_over_4) + " fails",
                     [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"epsilon", eps}}; });
        }
    }
    return c.result();
}

/// Tweaked H_max of p^n never exceeds the typical-set curve n (H + delta_n),
/// nor the unsmoothed n H_max.
inline PropertyResult check_aep_curve(std::uint64_t seed, std::size_t cases, double epsilon = 0.2,
                                      const Tolerances &tol = default_tolerances()) {
    detail::Checker c("aep-below-typical-curve", "entropy");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xae00 + i);
        const auto rho = random_state(Ensemble::block_structured, 2 + rng.below(2), rng);
        const auto joint = joint_from_state(rho, clique_partition(rho, tol), tol);
        const double hmax = cond_max_entropy(joint, tol.eig_zero);
        for (const auto &pt : aep_scan(joint, epsilon, 5)) {
            c.expect(pt.value <= pt.upper_curve + 1e-12 && pt.value <= hmax + 1e-12,
                     "n = " + std::to_string(pt.n) + ": value " + detail::fmt(pt.value) + ", curve " +
                         detail::fmt(pt.upper_curve) + ", H_max " + detail::fmt(hmax),
                     [&] { return state_to_json(rho); });
        }
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Uniform coherence of formation.

inline PropertyResult check_cfu_sandwich(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("cfu-sandwich", "formation");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xcf00 + i);
        const std::size_t d = 2 + rng.below(3);
        const auto rho = i % 2 == 0 ? random_cou_state(d, rng) : random_diagonally_dominant(d, rng);
        CfuOptions opt;
        opt.seed = rng();
        opt.restarts = 2;
        opt.workers = 1;
        const auto r = cfu_optimize(rho, opt);
        c.expect(r.status != CfuStatus::infinite && r.lower_bound <= r.upper_bound + 1e-7 &&
                     r.residual <= 1e-7 && cfu_lower_bound(rho) <= r.upper_bound + 1e-7,
                 std::string("status ") + to_string(r.status) + ", bounds [" + detail::fmt(r.lower_bound) + ", " +
                     detail::fmt(r.upper_bound) + "], residual " + detail::fmt(r.residual),
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

inline PropertyResult check_diagonally_dominant(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("diagonally-dominant-decomposition", "formation");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xdd00 + i);
        const auto rho = random_diagonally_dominant(2 + rng.below(4), rng);
        const auto dec = diagonally_dominant_decomposition(rho);
        double offsum = 0.0;
        for (std::size_t a = 0; a < rho.dim(); ++a)
            for (std::size_t b = a + 1; b < rho.dim(); ++b) offsum += std::abs(rho(a, b));
        if (!dec) {
            c.fail("no decomposition for a diagonally dominant state", state_to_json(rho));
            continue;
        }
        c.expect(dec->residual <= 1e-7 && std::abs(dec->total_weight() - 1.0) <= 1e-9,
                 "residual " + detail::fmt(dec->residual), [&] { return state_to_json(rho); });
        c.expect(dec->cost() <= 2.0 * offsum + 1e-9 && dec->cost() <= 1.0 + 1e-9,
                 "cost " + detail::fmt(dec->cost()) + " vs 2 sum|rho_ij| = " + detail::fmt(2.0 * offsum),
                 [&] { return state_to_json(rho); });
        c.expect(co_u_necessary_test(rho), "necessary test rejects a diagonally dominant state",
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

/// Upper bound non-increase under PIO and co(U) closure. The optimizer of the
/// output is warm-started with the pushed-forward witness of the input.
inline PropertyResult check_cfu_pio_monotone(std::uint64_t seed, std::size_t cases, double slack = 2e-3) {
    detail::Checker c("cfu-pio-monotone", "formation");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xa100 + i);
        const std::size_t d = 2 + rng.below(3);
        const auto rho = i % 2 == 0 ? random_cou_state(d, rng) : random_diagonally_dominant(d, rng);
        const auto ch = random_pio(d, 1 + rng.below(3), rng());
        CfuOptions opt;
        opt.seed = rng();
        opt.restarts = 2;
        opt.workers = 1;
        const auto in = cfu_optimize(rho, opt);
        const auto out_state = apply_pio(ch, rho);
        auto ex = [&] { return nlohmann::json{{"state", state_to_json(rho)}, {"channel", channel_to_json(ch)}}; };
        if (!in.witness) {
            c.fail("no witness for a co(U) state", ex());
            continue;
        }
        c.expect(co_u_necessary_test(out_state), "output leaves co(U)", ex);
        opt.warm_start = push_forward(*in.witness, ch);
        const auto out = cfu_optimize(out_state, opt);
        c.expect(out.upper_bound <= in.upper_bound + slack,
                 "upper bound rises from " + detail::fmt(in.upper_bound) + " to " + detail::fmt(out.upper_bound), ex);
    }
    return c.result();
}

inline PropertyResult check_cfu_product(std::uint64_t seed, std::size_t cases, double slack = 2e-3) {
    detail::Checker c("cfu-product-additivity", "formation");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xb200 + i);
        const auto a = random_cou_state(2, rng);
        const auto b = random_cou_state(2 + rng.below(2), rng);
        CfuOptions opt;
        opt.seed = rng();
        opt.restarts = 1;
        opt.workers = 1;
        const auto ra = cfu_optimize(a, opt), rb = cfu_optimize(b, opt);
        auto ex = [&] { return nlohmann::json{{"a", state_to_json(a)}, {"b", state_to_json(b)}}; };
        if (!ra.witness || !rb.witness) {
            c.fail("missing factor witness", ex());
            continue;
        }
        auto prod = product_decomposition(*ra.witness, *rb.witness);
        const auto ab = tensor(a, b);
        prod.residual = prod.residual_against(ab);
        c.expect(prod.residual <= 1e-7, "product decomposition residual " + detail::fmt(prod.residual), ex);
        opt.warm_start = prod;
        const auto rab = cfu_optimize(ab, opt);
        c.expect(rab.upper_bound <= ra.upper_bound + rb.upper_bound + slack,
                 "product bound " + detail::fmt(rab.upper_bound) + " exceeds " +
                     detail::fmt(ra.upper_bound + rb.upper_bound),
                 ex);
    }
    return c.result();
}

inline PropertyResult check_cf_above_cr(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("cf-above-cr", "formation");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i, 4);
        CfOptions opt;
        opt.sweeps = 60;
        opt.random_starts = 1;
        const double cf = cf_estimate(rho, opt).value;
        const double cr = relative_entropy_of_coherence(rho);
        c.expect(cr <= cf + 1e-6, "C_f estimate " + detail::fmt(cf) + " below C_r " + detail::fmt(cr),
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Protocols and I/O.

inline PropertyResult check_distillation_rate(std::uint64_t seed, std::size_t cases,
                                              const Tolerances &tol = default_tolerances()) {
    detail::Checker c("distillation-rate", "protocols");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xd500 + i);
        const auto rho = random_state(Ensemble::block_structured, 2 + rng.below(4), rng);
        const auto run = distill_accounting(rho, 100, rng(), 2, tol, 1);
        const double q = quintessential_coherence(rho, tol), cr = relative_entropy_of_coherence(rho, tol);
        c.expect(std::abs(run.deterministic_rate - q) <= 1e-9 && run.deterministic_rate <= cr + 1e-9,
                 "rate " + detail::fmt(run.deterministic_rate) + ", Q " + detail::fmt(q) + ", C_r " + detail::fmt(cr),
                 [&] { return state_to_json(rho); });
    }
    return c.result();
}

inline PropertyResult check_dilution_plans(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("dilution-plans", "protocols");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        CounterRng rng(seed, 0xd170 + i);
        const std::uint64_t k = 2 + rng.below(7);
        const std::uint64_t n = 10 + rng.below(300);
        const double delta = rng.uniform(0.05, 0.5), eps = rng.uniform(0.05, 0.9);
        const auto plan = plan_dilution(k, n, delta, eps);
        if (!plan.feasible) continue;
        const auto sim = simulate_dilution(plan);
        const bool chain = plan.integer_log || detail::dilution_chain_holds(k, n, delta, eps, plan.M, plan.N);
        c.expect(chain && sim.rate <= std::log2(static_cast<double>(k)) + delta + 1e-12 && sim.error <= eps + 1e-12,
                 "k " + std::to_string(k) + ", n " + std::to_string(n) + ": error " + detail::fmt(sim.error) +
                     ", rate " + detail::fmt(sim.rate),
                 [&] { return nlohmann::json{{"k", k}, {"n", n}, {"delta", delta}, {"epsilon", eps}}; });
    }
    return c.result();
}

inline PropertyResult check_state_roundtrip(std::uint64_t seed, std::size_t cases) {
    detail::Checker c("state-roundtrip", "io");
    for (std::size_t i = 0; i < cases; ++i) {
        c.count();
        const auto rho = generated_state(seed, i);
        const auto back = state_from_json(nlohmann::json::parse(state_to_json(rho).dump()));
        c.expect(back.matrix() == rho.matrix(), "matrix changed in a JSON round trip", [&] { return state_to_json(rho); });
    }
    return c.result();
}

// ---------------------------------------------------------------------------
// Runner.

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::string filter;       // substring of a property name or group; empty runs all
    Tolerances tol = default_tolerances();
    double scale = 1.0;       // multiplies every case count
    std::size_t workers = 0;
};

struct PropertySpec {
    std::string name;
    std::string group;
    std::size_t cases;
    std::function<PropertyResult(std::uint64_t, std::size_t, const Tolerances &)> run;
};

inline std::vector<PropertySpec> property_catalogue() {
    using T = const Tolerances &;
    return {
        {"core-state-laws", "core", 200, [](auto s, auto n, T t) { return check_core_state_laws(s, n, t); }},
        {"sio-commutes-with-dephasing", "channels", 100, [](auto s, auto n, T) { return check_sio_commutes_with_dephasing(s, n); }},
        {"pio-expands-to-sio", "channels", 100, [](auto s, auto n, T) { return check_pio_is_sio(s, n); }},
        {"instrument-frequencies", "channels", 20, [](auto s, auto n, T) { return check_instrument_frequencies(s, n); }},
        {"q-additivity", "additivity", 100, [](auto s, auto n, T t) { return check_q_additivity(s, n, t); }},
        {"lambda-eta-tensorisation", "additivity", 100, [](auto s, auto n, T t) { return check_lambda_eta_tensorisation(s, n, t); }},
        {"block-purity", "structure", 200, [](auto s, auto n, T t) { return check_block_purity(s, n, t); }},
        {"trimmed-state", "structure", 200, [](auto s, auto n, T t) { return check_trimmed_state(s, n, t); }},
        {"mu-monotone-suite", "monotones", 100, [](auto s, auto n, T t) { return check_mu_suite(s, n, t); }},
        {"mu-structure", "monotones", 50, [](auto s, auto n, T t) { return check_mu_structure(s, n, 0.5, t); }},
        {"entropy-identities", "entropy", 200, [](auto s, auto n, T t) { return check_entropy_identities(s, n, t); }},
        {"smoothing-sandwich", "entropy", 50, [](auto s, auto n, T t) { return check_smoothing_sandwich(s, n, {0.1, 0.5}, t); }},
        {"aep-below-typical-curve", "entropy", 20, [](auto s, auto n, T t) { return check_aep_curve(s, n, 0.2, t); }},
        {"cfu-sandwich", "formation", 20, [](auto s, auto n, T) { return check_cfu_sandwich(s, n); }},
        {"diagonally-dominant-decomposition", "formation", 100, [](auto s, auto n, T) { return check_diagonally_dominant(s, n); }},
        {"cfu-pio-monotone", "formation", 50, [](auto s, auto n, T) { return check_cfu_pio_monotone(s, n); }},
        {"cfu-product-additivity", "formation", 10, [](auto s, auto n, T) { return check_cfu_product(s, n); }},
        {"cf-above-cr", "formation", 20, [](auto s, auto n, T) { return check_cf_above_cr(s, n); }},
        {"distillation-rate", "protocols", 200, [](auto s, auto n, T t) { return check_distillation_rate(s, n, t); }},
        {"dilution-plans", "protocols", 200, [](auto s, auto n, T) { return check_dilution_plans(s, n); }},
        {"state-roundtrip", "io", 100, [](auto s, auto n, T) { return check_state_roundtrip(s, n); }},
    };
}

inline bool property_selected(const PropertySpec &p, const std::string &filter) {
    return filter.empty() || p.name.find(filter) != std::string::npos || p.group.find(filter) != std::string::npos;
}

/// Exact name or group matches win; otherwise the filter is a substring.
inline std::vector<PropertySpec> select_properties(const std::string &filter) {
    std::vector<PropertySpec> exact, loose;
    for (auto &p : property_catalogue()) {
        if (p.name == filter || p.group == filter) exact.push_back(p);
        if (property_selected(p, filter)) loose.push_back(std::move(p));
    }
    return exact.empty() ? loose : exact;
}

/// Runs the selected suites in parallel; results come back in catalogue order.
inline std::vector<PropertyResult> run_properties(const VerifyOptions &opt) {
    std::vector<PropertySpec> selected = select_properties(opt.filter);
    std::vector<PropertyResult> results(selected.size());
    parallel_for(
        selected.size(),
        [&](std::size_t i) {
            const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(selected[i].cases) * opt.scale));
            try {
                results[i] = selected[i].run(opt.seed, n, opt.tol);
            } catch (const Error &e) {
                results[i].name = selected[i].name;
                results[i].group = selected[i].group;
                results[i].passed = false;
                results[i].detail = std::string("suite aborted: ") + e.what();
            }
        },
        opt.workers ? opt.workers : thread_count());
    return results;
}

} // namespace coherence
