#pragma once

// Uniform coherence of formation C_f^U: the convex roof of log2 |J| over
// decompositions into uniformly coherent pure states, +inf outside co(U).
// Also a convex-roof estimate of the ordinary coherence of formation C_f.

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "channels.hpp"
#include "lp.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace coherence {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// p |Psi><Psi| with Psi = |J|^{-1/2} sum_{a} e^{i phases[a]} |support[a]>.
struct UniformTerm {
    double weight = 0.0;
    IndexSet support;
    std::vector<double> phases; // phases[0] = 0
};

struct UniformDecomposition {
    std::size_t dim = 0;
    std::vector<UniformTerm> terms;
    double residual = 0.0; // trace norm of reconstruction minus target

    Matrix reconstruct() const {
        const auto d = static_cast<Eigen::Index>(dim);
        Matrix m = Matrix::Zero(d, d);
        for (const auto &t : terms) {
            const double k = static_cast<double>(t.support.size());
            for (std::size_t a = 0; a < t.support.size(); ++a)
                for (std::size_t b = 0; b < t.support.size(); ++b)
                    m(static_cast<Eigen::Index>(t.support[a]), static_cast<Eigen::Index>(t.support[b])) +=
                        t.weight / k * std::polar(1.0, t.phases[a] - t.phases[b]);
        }
        return m;
    }

    double cost() const {
        double c = 0.0;
        for (const auto &t : terms) c += t.weight * std::log2(static_cast<double>(t.support.size()));
        return c;
    }

    double total_weight() const {
        double w = 0.0;
        for (const auto &t : terms) w += t.weight;
        return w;
    }

    double residual_against(const DensityMatrix &rho) const {
        const Matrix diff = reconstruct() - rho.matrix();
        return hermitian_eigenvalues((diff + diff.adjoint()) * 0.5).cwiseAbs().sum();
    }
};

enum class CfuStatus { exact, sandwich, infinite, presumed_infinite };

inline const char *to_string(CfuStatus s) {
    switch (s) {
    case CfuStatus::exact: return "exact";
    case CfuStatus::sandwich: return "sandwich";
    case CfuStatus::infinite: return "infinite";
    case CfuStatus::presumed_infinite: return "presumed-infinite";
    }
    return "?";
}

struct CfuReport {
    double lower_bound = 0.0;
    double upper_bound = kInfinity;
    std::optional<UniformDecomposition> witness;
    CfuStatus status = CfuStatus::sandwich;
    double residual = 0.0;
    std::size_t rounds = 0;
};

// ---------------------------------------------------------------------------
// Closed forms and bounds.

/// |rho_ij| <= min(rho_ii, rho_jj) for all pairs; failure means C_f^U = inf.
inline bool co_u_necessary_test(const DensityMatrix &rho, double tol = 1e-10) {
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = i + 1; j < rho.dim(); ++j)
            if (std::abs(rho(i, j)) > std::min(rho(i, i).real(), rho(j, j).real()) + tol) return false;
    return true;
}

/// Pair terms of weight 2|rho_ij| plus singletons, when rho_ii >= sum_j |rho_ij|.
inline std::optional<UniformDecomposition> diagonally_dominant_decomposition(const DensityMatrix &rho,
                                                                              double tol = 1e-12) {
    const std::size_t d = rho.dim();
    std::vector<double> rest(d);
    for (std::size_t i = 0; i < d; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (j != i) off += std::abs(rho(i, j));
        rest[i] = rho(i, i).real() - off;
        if (rest[i] < -tol) return std::nullopt;
    }
    UniformDecomposition dec;
    dec.dim = d;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const Complex z = rho(i, j);
            if (std::abs(z) <= 0.0) continue;
            dec.terms.push_back({2.0 * std::abs(z), {i, j}, {0.0, -std::arg(z)}});
        }
    for (std::size_t i = 0; i < d; ++i)
        if (rest[i] > 0.0) dec.terms.push_back({rest[i], {i}, {0.0}});
    dec.residual = dec.residual_against(rho);
    return dec;
}

/// 2 max_{i != j} |rho_ij|.
inline double cfu_lower_bound(const DensityMatrix &rho) {
    double m = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = i + 1; j < rho.dim(); ++j) m = std::max(m, std::abs(rho(i, j)));
    return 2.0 * m;
}

/// 2|z| if |z| <= min(p, 1-p), +inf otherwise.
inline double cfu_qubit(const DensityMatrix &rho, double tol = 1e-10) {
    if (rho.dim() != 2) throw DimensionMismatch("cfu_qubit needs a 2x2 state");
    const double p = rho(0, 0).real();
    const double z = std::abs(rho(0, 1));
    return z <= std::min(p, 1.0 - p) + tol ? 2.0 * z : kInfinity;
}

// ---------------------------------------------------------------------------
// Decomposition transforms.

/// Image of a decomposition under a PIO: each branch cuts a uniform term to a
/// uniform term on the surviving support, so the result decomposes Lambda(rho).
inline UniformDecomposition push_forward(const UniformDecomposition &dec, const PioChannel &ch) {
    require_same_dim(dec.dim, ch.dim(), "push_forward");
    UniformDecomposition out;
    out.dim = dec.dim;
    for (const auto &t : dec.terms)
        for (const auto &e : ch.mixture())
            for (const auto &b : e.branches) {
                std::vector<std::pair<std::size_t, double>> kept;
                for (std::size_t a = 0; a < t.support.size(); ++a) {
                    const auto i = t.support[a];
                    if (std::binary_search(b.support.begin(), b.support.end(), i))
                        kept.emplace_back(b.perm[i], t.phases[a] + b.phase[i]);
                }
                if (kept.empty()) continue;
                std::sort(kept.begin(), kept.end());
                UniformTerm nt;
                nt.weight = t.weight * e.weight * static_cast<double>(kept.size()) / static_cast<double>(t.support.size());
                if (nt.weight <= 0.0) continue;
                const double gauge = kept.front().second;
                for (const auto &[i, ph] : kept) {
                    nt.support.push_back(i);
                    nt.phases.push_back(ph - gauge);
                }
                out.terms.push_back(std::move(nt));
            }
    return out;
}

/// Decomposition of rho (x) sigma from decompositions of the factors.
inline UniformDecomposition product_decomposition(const UniformDecomposition &a, const UniformDecomposition &b) {
    UniformDecomposition out;
    out.dim = a.dim * b.dim;
    for (const auto &ta : a.terms)
        for (const auto &tb : b.terms) {
            UniformTerm t;
            t.weight = ta.weight * tb.weight;
            for (std::size_t x = 0; x < ta.support.size(); ++x)
                for (std::size_t y = 0; y < tb.support.size(); ++y) {
                    t.support.push_back(ta.support[x] * b.dim + tb.support[y]);
                    t.phases.push_back(ta.phases[x] + tb.phases[y]);
                }
            out.terms.push_back(std::move(t));
        }
    return out;
}

// ---------------------------------------------------------------------------
// C_f^U by column generation.
//
// The restricted master problem is the LP  min sum_J p_J log2|J|  subject to
// sum_J p_J Psi_J = rho (d^2 real equations), p >= 0, over a finite dictionary
// of uniform states. Slack columns of cost kSlackCost keep it feasible. New
// columns come from maximizing <Psi|Y|Psi> over phases for the dual Y. Any
// Y - t I with <Psi|Y|Psi> - t <= log2|J| for all uniform Psi is dual feasible,
// so tr(Y rho) - t is a certified lower bound.

struct CfuOptions {
    std::size_t max_rounds = 200;
    std::size_t restarts = 4;
    std::uint64_t seed = 1;
    std::optional<UniformDecomposition> warm_start;
    std::size_t workers = 0;
};

namespace detail {

inline constexpr double kSlackCost = 100.0;

inline std::size_t constraint_count(std::size_t d) { return d * d; }

/// Row layout: d diagonal rows, then (re, im) for each i < j.
inline Eigen::VectorXd constraint_column(const UniformTerm &t, std::size_t d) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d * d));
    const double k = static_cast<double>(t.support.size());
    for (auto i : t.support) col(static_cast<Eigen::Index>(i)) = 1.0 / k;
    for (std::size_t a = 0; a < t.support.size(); ++a)
        for (std::size_t b = a + 1; b < t.support.size(); ++b) {
            const std::size_t i = t.support[a], j = t.support[b];
            const Complex z = std::polar(1.0 / k, t.phases[a] - t.phases[b]);
            const std::size_t row = d + 2 * (i * d - i * (i + 1) / 2 + (j - i - 1));
            col(static_cast<Eigen::Index>(row)) = z.real();
            col(static_cast<Eigen::Index>(row + 1)) = z.imag();
        }
    return col;
}

inline Eigen::VectorXd target_vector(const DensityMatrix &rho) {
    const std::size_t d = rho.dim();
    Eigen::VectorXd b(static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < d; ++i) b(static_cast<Eigen::Index>(i)) = rho(i, i).real();
    std::size_t row = d;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            b(static_cast<Eigen::Index>(row)) = rho(i, j).real();
            b(static_cast<Eigen::Index>(row + 1)) = rho(i, j).imag();
            row += 2;
        }
    return b;
}

/// Hermitian Y with tr(Y Psi) = y . column(Psi).
inline Matrix dual_matrix(const Eigen::VectorXd &y, std::size_t d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(i));
    std::size_t row = d;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const Complex yji(y(static_cast<Eigen::Index>(row)) / 2.0, -y(static_cast<Eigen::Index>(row + 1)) / 2.0);
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = yji;
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::conj(yji);
            row += 2;
        }
    return m;
}

inline void gauge_fix(std::vector<double> &phases) {
    const double g = phases.front();
    for (auto &p : phases) p = std::remainder(p - g, 2.0 * std::numbers::pi);
}

/// (1/k) sum_{a,b} e^{-i t_a} M_ab e^{i t_b}.
inline double uniform_form(const Matrix &m, const IndexSet &s, const std::vector<double> &ph) {
    Complex acc = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = 0; b < s.size(); ++b)
            acc += std::polar(1.0, ph[b] - ph[a]) * m(static_cast<Eigen::Index>(s[a]), static_cast<Eigen::Index>(s[b]));
    return acc.real() / static_cast<double>(s.size());
}

/// Phases of the top eigenvector of M restricted to s.
inline std::vector<double> eigen_phases(const Matrix &m, const IndexSet &s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(principal_submatrix(m, s));
    const Vector v = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    std::vector<double> ph(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) ph[a] = std::abs(v(static_cast<Eigen::Index>(a))) > 0.0 ? std::arg(v(static_cast<Eigen::Index>(a))) : 0.0;
    gauge_fix(ph);
    return ph;
}

/// Coordinate ascent on the phases: t_a <- arg sum_{b != a} M_ab e^{i t_b}.
inline std::pair<double, std::vector<double>> maximize_phases(const Matrix &m, const IndexSet &s,
                                                               std::vector<double> ph) {
    double value = uniform_form(m, s, ph);
    for (int sweep = 0; sweep < 100; ++sweep) {
        for (std::size_t a = 0; a < s.size(); ++a) {
            Complex acc = 0.0;
            for (std::size_t b = 0; b < s.size(); ++b)
                if (b != a) acc += m(static_cast<Eigen::Index>(s[a]), static_cast<Eigen::Index>(s[b])) * std::polar(1.0, ph[b]);
            if (std::abs(acc) > 0.0) ph[a] = std::arg(acc);
        }
        const double next = uniform_form(m, s, ph);
        const bool done = next - value < 1e-14;
        value = std::max(value, next);
        if (done) break;
    }
    gauge_fix(ph);
    return {uniform_form(m, s, ph), ph};
}

/// Rigorous upper bound on max over phases of the uniform form on s.
inline double uniform_form_bound(const Matrix &m, const IndexSet &s) {
    if (s.size() == 1) return m(static_cast<Eigen::Index>(s[0]), static_cast<Eigen::Index>(s[0])).real();
    if (s.size() == 2) {
        const auto i = static_cast<Eigen::Index>(s[0]), j = static_cast<Eigen::Index>(s[1]);
        return 0.5 * (m(i, i).real() + m(j, j).real()) + std::abs(m(i, j));
    }
    double tri = 0.0;
    for (auto a : s)
        for (auto b : s) tri += a == b ? m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)).real()
                                       : std::abs(m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    tri /= static_cast<double>(s.size());
    return std::min(tri, top_eigenvalue(principal_submatrix(m, s)));
}

/// Tighter certified bound: for any real diagonal D,
/// max_{|u_a| = 1} u^dagger M u <= k lambda_max(M - D) + tr D.
/// D follows gradient steps on a log-sum-exp smoothing of lambda_max with a
/// sharpening temperature; the exact bound is evaluated at every iterate.
inline double uniform_form_certificate(const Matrix &m, const IndexSet &s) {
    const double cheap = uniform_form_bound(m, s);
    if (s.size() <= 2) return cheap;
    const Matrix sub = principal_submatrix(m, s);
    const Eigen::Index n = sub.rows();
    const auto k = static_cast<double>(n);
    const double scale = std::max(1e-6, sub.cwiseAbs().maxCoeff());
    double best = cheap * k;

    // Returns the smoothed value and fills the gradient; updates `best`.
    auto eval = [&](const RealVector &dsh, double beta, RealVector *grad) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub - Matrix(dsh.cast<Complex>().asDiagonal()));
        const RealVector &ev = es.eigenvalues();
        const double top = ev(n - 1);
        best = std::min(best, k * top + dsh.sum());
        const RealVector w = ((ev.array() - top) * beta).exp().matrix();
        const double z = w.sum();
        if (grad) {
            *grad = RealVector::Ones(n);
            for (Eigen::Index i = 0; i < n; ++i) *grad -= k * (w(i) / z) * es.eigenvectors().col(i).cwiseAbs2();
        }
        return k * (top + std::log(z) / beta) + dsh.sum();
    };

    RealVector dsh = RealVector::Zero(n);
    for (double temp : {10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
        const double beta = temp / scale;
        double step = scale;
        RealVector grad;
        double f = eval(dsh, beta, &grad);
        for (int it = 0; it < 80 && step > 1e-14 * scale; ++it) {
            const RealVector trial = dsh - step * grad;
            RealVector tgrad;
            const double ft = eval(trial, beta, &tgrad);
            if (ft < f) {
                dsh = trial;
                f = ft;
                grad = std::move(tgrad);
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
    }
    return best / k;
}

inline constexpr std::size_t kEnumerateDim = 12;

inline std::vector<IndexSet> all_subsets(std::size_t d, std::size_t min_size) {
    std::vector<IndexSet> out;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << d); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) < min_size) continue;
        IndexSet s;
        for (std::size_t b = 0; b < d; ++b)
            if (mask >> b & 1U) s.push_back(b);
        out.push_back(std::move(s));
    }
    return out;
}

inline IndexSet random_subset(std::size_t d, CounterRng &rng) {
    // Sizes weighted toward small: P(k) proportional to 1/k^2 for k >= 2.
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t k = 2; k <= d; ++k) {
        w.push_back(1.0 / static_cast<double>(k * k));
        total += w.back();
    }
    double u = rng.uniform() * total;
    std::size_t k = 2;
    for (std::size_t a = 0; a < w.size(); ++a, ++k) {
        if (u < w[a]) break;
        u -= w[a];
    }
    k = std::min(k, d);
    IndexSet all(d);
    for (std::size_t i = 0; i < d; ++i) all[i] = i;
    for (std::size_t a = 0; a < k; ++a) std::swap(all[a], all[a + rng.below(d - a)]);
    IndexSet s(all.begin(), all.begin() + static_cast<long>(k));
    std::sort(s.begin(), s.end());
    return s;
}

struct PricedColumn {
    double reduced_cost;
    UniformTerm term;
};

/// Columns with negative reduced cost log2|J| - <Psi|Y|Psi>, most negative first.
inline std::vector<PricedColumn> price(const Matrix &y, const std::vector<IndexSet> &candidates, std::size_t keep) {
    std::vector<PricedColumn> out;
    for (const auto &s : candidates) {
        const double cost = std::log2(static_cast<double>(s.size()));
        if (s.size() >= 2 && uniform_form_bound(y, s) - cost > -1e-10) {
            auto [v1, p1] = maximize_phases(y, s, eigen_phases(y, s));
            auto [v2, p2] = maximize_phases(y, s, std::vector<double>(s.size(), 0.0));
            if (v2 > v1) {
                v1 = v2;
                p1 = std::move(p2);
            }
            if (cost - v1 < -1e-9) out.push_back({cost - v1, {0.0, s, std::move(p1)}});
        } else if (s.size() == 1) {
            const double v = y(static_cast<Eigen::Index>(s[0]), static_cast<Eigen::Index>(s[0])).real();
            if (-v < -1e-9) out.push_back({-v, {0.0, s, {0.0}}});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.reduced_cost < b.reduced_cost; });
    if (out.size() > keep) out.resize(keep);
    return out;
}

struct CfuRun {
    double upper = kInfinity;
    double lower = 0.0;
    double slack = kInfinity;
    std::size_t rounds = 0;
    UniformDecomposition decomposition;
};

/// Column generation with Wentges dual smoothing: columns are priced at
/// alpha * center + (1 - alpha) * y, where the center is the dual with the best
/// Lagrangian bound b.y + min(0, min reduced cost) seen so far. Since every
/// column has unit trace, that bound is valid for the full problem whenever
/// pricing finds the true minimum.
inline CfuRun cfu_column_generation(const DensityMatrix &rho, std::vector<UniformTerm> dictionary,
                                    const CfuOptions &opt, std::uint64_t restart) {
    const std::size_t d = rho.dim();
    const std::size_t m = constraint_count(d);
    const Eigen::VectorXd b = target_vector(rho);
    CounterRng rng(opt.seed, 0xcf0 + restart);
    constexpr double kAlpha = 0.5;

    std::vector<IndexSet> enumerated;
    if (d <= kEnumerateDim) enumerated = all_subsets(d, 1);
    auto candidates = [&] {
        if (!enumerated.empty()) return enumerated;
        std::vector<IndexSet> c;
        for (std::size_t i = 0; i < d; ++i) c.push_back({i});
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) c.push_back({i, j});
        for (std::size_t r = 0; r < 8 * d; ++r) c.push_back(random_subset(d, rng));
        return c;
    };

    CfuRun run;
    Eigen::VectorXd center, last_duals;
    double center_bound = -kInfinity;
    for (run.rounds = 1; run.rounds <= opt.max_rounds; ++run.rounds) {
        const auto n = static_cast<Eigen::Index>(dictionary.size());
        Eigen::MatrixXd a(static_cast<Eigen::Index>(m), n + 2 * static_cast<Eigen::Index>(m));
        Eigen::VectorXd c(n + 2 * static_cast<Eigen::Index>(m));
        for (Eigen::Index j = 0; j < n; ++j) {
            a.col(j) = constraint_column(dictionary[static_cast<std::size_t>(j)], d);
            c(j) = std::log2(static_cast<double>(dictionary[static_cast<std::size_t>(j)].support.size()));
        }
        a.rightCols(2 * static_cast<Eigen::Index>(m)).setZero();
        for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(m); ++r) {
            a(r, n + 2 * r) = 1.0;
            a(r, n + 2 * r + 1) = -1.0;
        }
        c.tail(2 * static_cast<Eigen::Index>(m)).setConstant(kSlackCost);
        const LpResult lp = solve_lp(a, b, c);
        if (lp.status != LpStatus::optimal) break;

        run.slack = lp.x.tail(2 * static_cast<Eigen::Index>(m)).sum();
        run.decomposition = UniformDecomposition{d, {}, 0.0};
        for (Eigen::Index j = 0; j < n; ++j)
            if (lp.x(j) > 1e-15) {
                UniformTerm t = dictionary[static_cast<std::size_t>(j)];
                t.weight = lp.x(j);
                run.decomposition.terms.push_back(std::move(t));
            }
        run.upper = run.decomposition.cost();
        last_duals = lp.duals;
        if (center.size() == 0) center = lp.duals;

        const auto cand = candidates();
        // Misprice loop: if the smoothed dual yields nothing, price at y itself.
        bool added = false;
        for (double alpha : {kAlpha, 0.0}) {
            const Eigen::VectorXd ys = alpha * center + (1.0 - alpha) * lp.duals;
            auto priced = price(dual_matrix(ys, d), cand, 2 * d);
            const double bound = b.dot(ys) + (priced.empty() ? 0.0 : std::min(0.0, priced.front().reduced_cost));
            if (bound > center_bound) {
                center_bound = bound;
                center = ys;
            }
            for (auto &p : priced) dictionary.push_back(std::move(p.term));
            if (!priced.empty()) {
                added = true;
                break;
            }
        }
        if (!added || lp.objective - center_bound <= 1e-10 * std::max(1.0, std::abs(lp.objective))) break;
    }
    run.rounds = std::min(run.rounds, opt.max_rounds);

    if (last_duals.size() > 0 && d <= kEnumerateDim) {
        for (const Eigen::VectorXd *yv : {&last_duals, &center}) {
            const Matrix y = dual_matrix(*yv, d);
            double t = 0.0;
            for (const auto &s : enumerated)
                t = std::max(t, uniform_form_certificate(y, s) - std::log2(static_cast<double>(s.size())));
            run.lower = std::max(run.lower, (y * rho.matrix()).trace().real() - t);
        }
    }
    return run;
}

inline std::vector<UniformTerm> initial_dictionary(const DensityMatrix &rho, const CfuOptions &opt,
                                                   std::uint64_t restart) {
    const std::size_t d = rho.dim();
    std::vector<UniformTerm> dict;
    for (std::size_t i = 0; i < d; ++i) dict.push_back({0.0, {i}, {0.0}});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) dict.push_back({0.0, {i, j}, {0.0, -std::arg(rho(i, j))}});
    try {
        const auto part = clique_partition(rho);
        for (const auto &block : part.blocks)
            if (block.size() > 2) dict.push_back({0.0, block, eigen_phases(rho.matrix(), block)});
    } catch (const StructuralInconsistency &) {
    }
    if (opt.warm_start)
        for (auto t : opt.warm_start->terms) {
            t.weight = 0.0;
            dict.push_back(std::move(t));
        }
    CounterRng rng(opt.seed, 0xd1c + restart);
    if (d > 2)
        for (std::size_t r = 0; r < 4 * d; ++r) {
            const IndexSet s = random_subset(d, rng);
            dict.push_back({0.0, s, eigen_phases(rho.matrix(), s)});
        }
    return dict;
}

} // namespace detail

inline CfuReport cfu_optimize(const DensityMatrix &rho, const CfuOptions &opt = {}) {
    CfuReport rep;
    if (!co_u_necessary_test(rho)) {
        rep.status = CfuStatus::infinite;
        rep.lower_bound = kInfinity;
        rep.upper_bound = kInfinity;
        return rep;
    }
    const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
    std::vector<detail::CfuRun> runs(restarts);
    parallel_for(
        restarts,
        [&](std::size_t r) { runs[r] = detail::cfu_column_generation(rho, detail::initial_dictionary(rho, opt, r), opt, r); },
        opt.workers ? opt.workers : thread_count());

    // Merge in restart order: smallest feasible upper bound, largest lower bound.
    std::optional<std::size_t> best;
    double lower = cfu_lower_bound(rho);
    for (std::size_t r = 0; r < restarts; ++r) {
        lower = std::max(lower, runs[r].lower);
        rep.rounds += runs[r].rounds;
        if (runs[r].slack <= 1e-9 && (!best || runs[r].upper < runs[*best].upper)) best = r;
    }
    if (opt.warm_start) {
        const double res = opt.warm_start->residual_against(rho);
        if (res <= 1e-7 && (!best || opt.warm_start->cost() < runs[*best].upper)) {
            runs.push_back({opt.warm_start->cost(), 0.0, 0.0, 0, *opt.warm_start});
            best = runs.size() - 1;
        }
    }

    if (!best) {
        double slack = kInfinity;
        for (const auto &r : runs) slack = std::min(slack, r.slack);
        rep.residual = slack;
        rep.lower_bound = lower;
        rep.upper_bound = kInfinity;
        rep.status = slack > 1e-4 ? CfuStatus::presumed_infinite : CfuStatus::sandwich;
        return rep;
    }
    UniformDecomposition w = runs[*best].decomposition;
    w.residual = w.residual_against(rho);
    rep.residual = w.residual;
    rep.upper_bound = w.cost();
    rep.witness = std::move(w);
    if (rho.dim() == 2) {
        const double exact = cfu_qubit(rho);
        rep.lower_bound = std::min(exact, rep.upper_bound);
        rep.status = CfuStatus::exact;
        return rep;
    }
    rep.lower_bound = std::min(lower, rep.upper_bound);
    rep.status = rep.upper_bound - rep.lower_bound <= 1e-6 ? CfuStatus::exact : CfuStatus::sandwich;
    return rep;
}

// ---------------------------------------------------------------------------
// Coherence of formation estimate.
//
// Decompositions of rho are the factorizations W W^dagger = rho; the columns
// of W are unnormalized pure terms. Givens rotations between two columns keep
// W W^dagger fixed, so coordinate descent over them searches the convex roof.

struct CfOptions {
    std::size_t sweeps = 150;
    std::size_t random_starts = 2;
    std::uint64_t seed = 1;
};

namespace detail {

/// ||w||^2 H(|w_j|^2 / ||w||^2) in bits.
inline double term_entropy(const Vector &w) {
    const double n2 = w.squaredNorm();
    if (n2 <= 1e-300) return 0.0;
    double h = n2 * std::log2(n2);
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double a = std::norm(w(j));
        if (a > 1e-300) h -= a * std::log2(a);
    }
    return std::max(0.0, h);
}

inline double roof_objective(const Matrix &w) {
    double f = 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) f += term_entropy(w.col(c));
    return f;
}

inline double givens_descent(Matrix &w, std::size_t sweeps) {
    double step = std::numbers::pi / 4.0;
    double f = roof_objective(w);
    const Eigen::Index m = w.cols();
    static constexpr double kPhases[] = {0.0, std::numbers::pi / 2.0, std::numbers::pi, 3.0 * std::numbers::pi / 2.0};
    for (std::size_t s = 0; s < sweeps && step > 1e-7; ++s) {
        bool improved = false;
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = a + 1; b < m; ++b) {
                const Vector wa = w.col(a), wb = w.col(b);
                if (wa.squaredNorm() + wb.squaredNorm() <= 1e-300) continue;
                const double before = term_entropy(wa) + term_entropy(wb);
                double best = before;
                Vector best_a, best_b;
                for (double sign : {1.0, -1.0})
                    for (double phi : kPhases) {
                        const double c = std::cos(sign * step), sn = std::sin(sign * step);
                        const Complex e = std::polar(1.0, phi);
                        Vector na = c * wa + sn * e * wb;
                        Vector nb = -sn * std::conj(e) * wa + c * wb;
                        const double v = term_entropy(na) + term_entropy(nb);
                        if (v < best - 1e-15) {
                            best = v;
                            best_a = std::move(na);
                            best_b = std::move(nb);
                        }
                    }
                if (best < before - 1e-15) {
                    w.col(a) = best_a;
                    w.col(b) = best_b;
                    f -= before - best;
                    improved = true;
                }
            }
        if (!improved) step *= 0.5;
    }
    return roof_objective(w);
}

} // namespace detail

struct CfEstimate {
    double value = kInfinity;
    std::string seed_route;
};

/// Upper bound on C_f(rho); never below C_r(rho).
inline CfEstimate cf_estimate(const DensityMatrix &rho, const CfOptions &opt = {}) {
    const auto d = static_cast<Eigen::Index>(rho.dim());
    const Eigen::Index m = std::max<Eigen::Index>(d * d, 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    Matrix spectral = Matrix::Zero(d, m);
    for (Eigen::Index c = 0; c < d; ++c) {
        const double ev = std::max(0.0, es.eigenvalues()(c));
        spectral.col(c) = std::sqrt(ev) * es.eigenvectors().col(c);
    }

    std::vector<std::pair<std::string, Matrix>> starts{{"spectral", spectral}};
    try {
        const auto part = clique_partition(rho);
        const DensityMatrix bar = trimmed_state(rho, part);
        if ((bar.matrix() - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-12) {
            Matrix blocks = Matrix::Zero(d, m);
            for (std::size_t s = 0; s < part.size(); ++s) {
                Eigen::SelfAdjointEigenSolver<Matrix> bs(part.block_states[s]);
                const Vector v = bs.eigenvectors().col(bs.eigenvectors().cols() - 1);
                for (std::size_t a = 0; a < part.blocks[s].size(); ++a)
                    blocks(static_cast<Eigen::Index>(part.blocks[s][a]), static_cast<Eigen::Index>(s)) =
                        std::sqrt(part.block_weights[s]) * v(static_cast<Eigen::Index>(a));
            }
            starts.emplace_back("blocks", blocks);
        }
    } catch (const StructuralInconsistency &) {
    }
    CounterRng rng(opt.seed, 0xcf1);
    for (std::size_t r = 0; r < opt.random_starts; ++r) {
        Matrix g(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
        Eigen::HouseholderQR<Matrix> qr(g);
        const Matrix u = qr.householderQ();
        starts.emplace_back("random", spectral * u);
    }

    CfEstimate best;
    for (auto &[name, w] : starts) {
        const double v = detail::givens_descent(w, opt.sweeps);
        if (v < best.value) {
            best.value = v;
            best.seed_route = name;
        }
    }
    return best;
}

} // namespace coherence
