#pragma once

// The mu_k family: log2 of the largest top eigenvalue over k x k principal
// submatrices of R. Also its max-relative-entropy form, the Gershgorin and
// overlap bounds, the conditioning sets V_eps(rho) and the smoothed variants
// consumed by the converse bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "classical.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace coherence {

enum class MuMethod { exact, greedy_lower_bound };

inline const char *to_string(MuMethod m) { return m == MuMethod::exact ? "exact-enumeration" : "greedy-lower-bound"; }

struct MuResult {
    double value = 0.0;
    IndexSet witness;
    MuMethod method = MuMethod::exact;
};

struct MuOptions {
    bool allow_greedy = false;
    Tolerances tol = default_tolerances();
    Caps caps = default_caps();
    std::size_t workers = 0; // 0: thread_count()
};

namespace detail {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (r > 1.8e19L) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(r)));
}

/// The combination of rank `rank` (lexicographic) of k elements from [0, n).
inline std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
    std::vector<std::size_t> c;
    c.reserve(k);
    std::size_t next = 0;
    for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t v = next;; ++v) {
            const std::uint64_t block = binomial(n - v - 1, k - pos - 1);
            if (rank < block) {
                c.push_back(v);
                next = v + 1;
                break;
            }
            rank -= block;
        }
    }
    return c;
}

inline bool next_combination(std::vector<std::size_t> &c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline double top_eigen_of_subset(const Matrix &r, const IndexSet &subset) {
    if (subset.size() == 1) return 1.0;
    if (subset.size() == 2)
        return 1.0 + std::abs(r(static_cast<Eigen::Index>(subset[0]), static_cast<Eigen::Index>(subset[1])));
    return top_eigenvalue(principal_submatrix(r, subset));
}

} // namespace detail

/// mu_k(rho) together with a maximizing index set.
inline MuResult mu_k(const DensityMatrix &rho, std::size_t k, const MuOptions &opt = {}) {
    if (k < 1 || k > rho.dim())
        throw InvalidArgument("mu_k needs 1 <= k <= d (k = " + std::to_string(k) + ")");
    const ComparisonMatrix cm = comparison_matrix(rho, opt.tol);
    const IndexSet support = cm.supported_indices();
    const std::size_t m = support.size();
    const std::size_t kk = std::min(k, m);
    MuResult out;
    if (kk <= 1) {
        out.witness = {support.front()};
        return out;
    }
    // Work on the supported block only.
    const Matrix r = principal_submatrix(cm.entries, support);
    const Eigen::MatrixXd abs_r = r.cwiseAbs();

    const std::uint64_t total = detail::binomial(m, kk);
    const bool exact = total <= opt.caps.subset_enumeration;
    if (!exact && !opt.allow_greedy)
        throw CapExceeded("mu_k: C(" + std::to_string(m) + "," + std::to_string(kk) + ") subsets exceed the cap");

    IndexSet local;
    double best = 0.0;
    if (exact) {
        const std::size_t workers = opt.workers ? opt.workers : thread_count();
        const std::size_t chunks = std::max<std::size_t>(1, std::min<std::uint64_t>(total, workers * 4));
        std::vector<double> chunk_best(chunks, -1.0);
        std::vector<IndexSet> chunk_witness(chunks);
        parallel_for(
            chunks,
            [&](std::size_t c) {
                const std::uint64_t begin = total * c / chunks, end = total * (c + 1) / chunks;
                if (begin >= end) return;
                auto comb = detail::unrank_combination(begin, m, kk);
                double cb = -1.0;
                IndexSet cw;
                for (std::uint64_t rank = begin; rank < end; ++rank) {
                    double gersh = 0.0;
                    for (auto i : comb) {
                        double row = 0.0;
                        for (auto j : comb) row += abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                        gersh = std::max(gersh, row);
                    }
                    if (gersh + 1e-12 >= cb) {
                        const double v = detail::top_eigen_of_subset(r, comb);
                        if (v > cb) {
                            cb = v;
                            cw = comb;
                        }
                    }
                    if (rank + 1 < end) detail::next_combination(comb, m);
                }
                chunk_best[c] = cb;
                chunk_witness[c] = std::move(cw);
            },
            workers);
        best = -1.0;
        for (std::size_t c = 0; c < chunks; ++c)
            if (chunk_best[c] > best) {
                best = chunk_best[c];
                local = chunk_witness[c];
            }
    } else {
        out.method = MuMethod::greedy_lower_bound;
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >
                    abs_r(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(bj))) {
                    bi = i;
                    bj = j;
                }
        local = {bi, bj};
        best = detail::top_eigen_of_subset(r, local);
        std::vector<bool> used(m, false);
        used[bi] = used[bj] = true;
        while (local.size() < kk) {
            double grow_best = -1.0;
            std::size_t grow_idx = 0;
            for (std::size_t c = 0; c < m; ++c) {
                if (used[c]) continue;
                IndexSet trial = local;
                trial.insert(std::upper_bound(trial.begin(), trial.end(), c), c);
                const double v = detail::top_eigen_of_subset(r, trial);
                if (v > grow_best) {
                    grow_best = v;
                    grow_idx = c;
                }
            }
            used[grow_idx] = true;
            local.insert(std::upper_bound(local.begin(), local.end(), grow_idx), grow_idx);
            best = grow_best;
        }
    }
    out.value = std::max(0.0, std::log2(best));
    for (auto i : local) out.witness.push_back(support[i]);
    return out;
}

struct MonotoneProfile {
    std::vector<MuResult> entries; // entries[k-1] is mu_k

    double value(std::size_t k) const { return entries.at(k - 1).value; }
};

inline MonotoneProfile mu_profile(const DensityMatrix &rho, const MuOptions &opt = {}) {
    MonotoneProfile p;
    for (std::size_t k = 1; k <= rho.dim(); ++k) p.entries.push_back(mu_k(rho, k, opt));
    return p;
}

/// mu_k recomputed as max_I D_max(Pi_I rho Pi_I || Delta(rho)) with full d x d
/// matrices and the inverse square root taken on the support of Delta(rho).
inline double mu_dmax_crosscheck(const DensityMatrix &rho, std::size_t k, const MuOptions &opt = {}) {
    if (k < 1 || k > rho.dim()) throw InvalidArgument("mu_dmax_crosscheck needs 1 <= k <= d");
    const std::size_t d = rho.dim();
    RealVector w = RealVector::Zero(static_cast<Eigen::Index>(d));
    IndexSet support;
    for (std::size_t i = 0; i < d; ++i) {
        const double p = rho(i, i).real();
        if (p > opt.tol.diag_cut) {
            w(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(p);
            support.push_back(i);
        }
    }
    const std::size_t kk = std::min(k, support.size());
    if (detail::binomial(support.size(), kk) > opt.caps.subset_enumeration)
        throw CapExceeded("mu_dmax_crosscheck: subset count exceeds the cap");
    double best = 0.0;
    std::vector<std::size_t> comb(kk);
    for (std::size_t i = 0; i < kk; ++i) comb[i] = i;
    do {
        IndexSet subset;
        for (auto c : comb) subset.push_back(support[c]);
        const Matrix sigma = compress(rho.matrix(), subset);
        const Matrix scaled = w.asDiagonal() * sigma * w.asDiagonal();
        best = std::max(best, top_eigenvalue(scaled));
    } while (detail::next_combination(comb, support.size()));
    return std::max(0.0, std::log2(best));
}

/// log2[l + lambda (k - l)] for k >= l, log2 k below that.
inline double gershgorin_bound(const DensityMatrix &rho, std::size_t k, const Tolerances &tol = default_tolerances()) {
    if (k < 1) throw InvalidArgument("gershgorin_bound needs k >= 1");
    const auto cm = comparison_matrix(rho, tol);
    const std::size_t l = max_pure_block_size(cm, tol);
    const double lambda = lambda_and_eta(cm, tol).lambda;
    if (k < l) return std::log2(static_cast<double>(k));
    return std::log2(static_cast<double>(l) + lambda * static_cast<double>(k - l));
}

/// log2 d + log2 <Psi_d|rho|Psi_d> for a maximally coherent Psi_d.
inline double overlap_lower_bound(const DensityMatrix &rho, const PureState &psi) {
    require_same_dim(rho.dim(), psi.dim(), "overlap_lower_bound");
    if (psi.support().size() != psi.dim() || !psi.is_uniformly_coherent())
        throw InvalidArgument("overlap_lower_bound needs a uniformly coherent state of full size");
    return std::log2(static_cast<double>(rho.dim())) + log2_safe(overlap_with_pure(rho, psi));
}

// ---------------------------------------------------------------------------
// Conditionings V_eps(rho).

struct Conditioning {
    IndexSet subset;
    DensityMatrix state;
    double distance = 0.0;
};

struct VEpsilonSet {
    double epsilon = 0.0;
    std::vector<Conditioning> members;
};

/// All Pi_I rho Pi_I / Tr[rho Pi_I] within trace distance eps, I ranging over
/// nonempty subsets of the support.
inline VEpsilonSet v_epsilon(const DensityMatrix &rho, double epsilon, const Tolerances &tol = default_tolerances(),
                             const Caps &caps = default_caps()) {
    IndexSet support;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        if (rho(i, i).real() > tol.diag_cut) support.push_back(i);
    if (support.size() > caps.v_epsilon_dim)
        throw CapExceeded("v_epsilon: support size " + std::to_string(support.size()) + " exceeds the cap " +
                          std::to_string(caps.v_epsilon_dim));
    VEpsilonSet out;
    out.epsilon = epsilon;
    const std::size_t s = support.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << s); ++mask) {
        IndexSet subset;
        for (std::size_t b = 0; b < s; ++b)
            if (mask >> b & 1U) subset.push_back(support[b]);
        double w = 0.0;
        for (auto i : subset) w += rho(i, i).real();
        // Gentle-measurement lower bound on the distance: 2(1 - w) <= ||.||_1.
        if (2.0 * (1.0 - w) > epsilon + 1e-12) continue;
        DensityMatrix sigma = condition_on(rho, subset, tol.diag_cut);
        const double dist = trace_distance(rho, sigma);
        if (dist <= epsilon + 1e-12) out.members.push_back({std::move(subset), std::move(sigma), dist});
    }
    return out;
}

struct SmoothedMu {
    double value = 0.0;
    IndexSet subset;              // conditioning achieving the minimum (V route)
    bool heuristic_upper_bound = false;
    std::string route;            // which candidate achieved the value
};

/// min of mu_k over V_eps(rho).
inline SmoothedMu mu_k_smoothed_V(const DensityMatrix &rho, std::size_t k, double epsilon, const MuOptions &opt = {}) {
    const auto v = v_epsilon(rho, epsilon, opt.tol, opt.caps);
    SmoothedMu out;
    out.value = std::numeric_limits<double>::infinity();
    out.route = "conditioning";
    for (const auto &m : v.members) {
        const double mu = mu_k(m.state, std::min(k, m.state.dim()), opt).value;
        if (mu < out.value) {
            out.value = mu;
            out.subset = m.subset;
        }
    }
    return out;
}

namespace detail {

/// Nearest density matrix in Frobenius norm: clip negative eigenvalues, renormalize.
inline DensityMatrix project_to_states(const Matrix &m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) * 0.5);
    RealVector ev = solver.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (!(tr > 0.0)) ev.setConstant(1.0 / static_cast<double>(ev.size()));
    else ev /= tr;
    return DensityMatrix::assume_valid(solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint());
}

} // namespace detail

/// Heuristic upper bound on min over the trace-norm ball: the best of the V_eps
/// minimum, a partial dephasing and a seeded random local descent.
inline SmoothedMu mu_k_smoothed_ball(const DensityMatrix &rho, std::size_t k, double epsilon, std::uint64_t seed = 1,
                                     std::size_t iterations = 200, const MuOptions &opt = {}) {
    SmoothedMu out;
    out.heuristic_upper_bound = true;
    out.value = mu_k(rho, k, opt).value;
    out.route = "identity";
    if (!(epsilon > 0.0)) return out;

    try {
        auto v = mu_k_smoothed_V(rho, k, epsilon, opt);
        if (v.value < out.value) {
            out.value = v.value;
            out.subset = v.subset;
            out.route = "conditioning";
        }
    } catch (const CapExceeded &) {
    }

    DensityMatrix current = rho;
    double current_mu = mu_k(rho, k, opt).value;
    const Matrix offdiag = rho.matrix() - dephase(rho).matrix();
    const double gap = trace_distance(rho, dephase(rho));
    if (gap > 0.0) {
        const double t = std::min(1.0, epsilon / gap);
        DensityMatrix mixed = DensityMatrix::assume_valid(rho.matrix() - t * offdiag);
        const double mu = mu_k(mixed, k, opt).value;
        if (mu < current_mu) {
            current = mixed;
            current_mu = mu;
        }
        if (mu < out.value) {
            out.value = mu;
            out.route = "partial-dephasing";
        }
    }

    CounterRng rng(seed, 0x6d75);
    const auto d = static_cast<Eigen::Index>(rho.dim());
    double step = std::max(1e-3, epsilon / 4.0);
    for (std::size_t it = 0; it < iterations; ++it) {
        Matrix h(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) h(i, j) = Complex(rng.normal(), rng.normal());
        h = ((h + h.adjoint()) * 0.5).eval();
        h /= h.norm();
        DensityMatrix trial = detail::project_to_states(current.matrix() + step * h);
        if (trace_distance(trial, rho) > epsilon) {
            step *= 0.7;
            continue;
        }
        const double mu = mu_k(trial, k, opt).value;
        if (mu < current_mu) {
            current = std::move(trial);
            current_mu = mu;
            if (mu < out.value) {
                out.value = mu;
                out.route = "local-descent";
            }
        } else {
            step *= 0.95;
        }
        if (step < 1e-6) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Converse bound for distillation at rate r.

struct ConverseBound {
    std::size_t log2_k = 0;    // floor(r n)
    double lambda = 0.0;
    double h_tilde = 0.0;      // tweaked H_max^{eps^2/4}(J^n | S^n)
    std::uint64_t fiber_cap = 1; // 2^h_tilde
    double printed_rhs = 0.0;  // log k + log lambda + log[1 + 2^h/(k lambda)]
    double chain_bound = 0.0;  // log[L + lambda (k - L)] (log k if k < L)
    double bound = 0.0;        // min of the two; both bound mu_k^eps(rho^n) from above
    double threshold = 0.0;    // floor(r n) + log2(1 - eps/2)
    bool violates = false;     // bound < threshold: rate r is not achievable at this (n, eps)
};

/// Upper bound on mu_{2^floor(rn)}^eps(rho^{(x)n}) built from lambda(rho) and the
/// tweaked max entropy of the block-label distribution. Requires lambda > 0.
inline ConverseBound converse_bound(const DensityMatrix &rho, double rate, std::size_t n, double epsilon,
                                    const Tolerances &tol = default_tolerances(), const Caps &caps = default_caps()) {
    if (n == 0) throw InvalidArgument("converse_bound needs n >= 1");
    if (!(epsilon > 0.0 && epsilon < 2.0)) throw InvalidArgument("converse_bound needs 0 < eps < 2");
    if (!(rate >= 0.0)) throw InvalidArgument("converse_bound needs a nonnegative rate");
    const auto s = analyze_structure(rho, tol);
    if (!(s.lambda > 0.0))
        throw NotApplicable("lambda(rho) = 0: rho equals its trimmed state; use the relative entropy route");
    ConverseBound out;
    out.lambda = s.lambda;
    out.log2_k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
    const double k = std::ldexp(1.0, static_cast<int>(out.log2_k));

    const JointDistribution joint = joint_from_state(rho, s.partition, tol);
    const double smoothing = epsilon * epsilon / 4.0;
    const double atoms = std::pow(static_cast<double>(joint.atoms().size()), static_cast<double>(n));
    const TweakedHmax th = atoms <= static_cast<double>(caps.product_atoms)
                               ? tweaked_hmax(product_power(joint, n, caps), smoothing)
                               : tweaked_hmax_product(joint, n, smoothing);
    out.h_tilde = th.value;
    out.fiber_cap = th.cap;
    const double big_l = static_cast<double>(th.cap);

    out.printed_rhs = out.log2_k + std::log2(s.lambda) + std::log2(1.0 + big_l / (k * s.lambda));
    out.chain_bound = k >= big_l ? std::log2(big_l + s.lambda * (k - big_l)) : static_cast<double>(out.log2_k);
    out.bound = std::min(out.printed_rhs, out.chain_bound);
    out.threshold = static_cast<double>(out.log2_k) + std::log2(1.0 - epsilon / 2.0);
    out.violates = out.bound < out.threshold;
    return out;
}

// ---------------------------------------------------------------------------
// Classical versus quantum restricted smoothing of H_max(J | S^rho).

struct SmoothingComparison {
    double classical_eps = 0.0;       // min over V_eps(delta_rho)
    double quantum_eps = 0.0;         // min over V_eps(rho) of f(delta_sigma)
    double classical_eps2_over_4 = 0.0; // min over V_{eps^2/4}(delta_rho)
};

inline SmoothingComparison restricted_smoothing_comparison(const DensityMatrix &rho, double epsilon,
                                                           const Tolerances &tol = default_tolerances(),
                                                           const Caps &caps = default_caps()) {
    const auto part = clique_partition(rho, tol);
    auto f = [&](const RealVector &q) {
        return cond_max_entropy(joint_from_diagonal(q, part.label, part.size(), tol.diag_cut));
    };
    auto classical_min = [&](double eps) {
        const auto v = v_epsilon_classical(rho.diagonal_probs(), eps, caps, tol.diag_cut);
        double best = std::numeric_limits<double>::infinity();
        for (const auto &m : v.members) best = std::min(best, f(m.q));
        return best;
    };
    SmoothingComparison out;
    out.classical_eps = classical_min(epsilon);
    out.classical_eps2_over_4 = classical_min(epsilon * epsilon / 4.0);
    out.quantum_eps = std::numeric_limits<double>::infinity();
    for (const auto &m : v_epsilon(rho, epsilon, tol, caps).members)
        out.quantum_eps = std::min(out.quantum_eps, f(m.state.diagonal_probs()));
    return out;
}

} // namespace coherence
