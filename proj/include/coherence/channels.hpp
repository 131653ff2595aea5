#pragma once

// Strictly incoherent (SIO) and physically incoherent (PIO) channels in their
// structured Kraus forms: every operator is a permutation times a diagonal.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "quantum_core.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace coherence {

using Permutation = std::vector<std::size_t>;

namespace detail {

inline void require_permutation(const Permutation &p, std::size_t d) {
    if (p.size() != d) throw InvalidArgument("permutation has length " + std::to_string(p.size()) + ", expected " +
                                             std::to_string(d));
    std::vector<bool> seen(d, false);
    for (auto v : p) {
        if (v >= d || seen[v]) throw InvalidArgument("not a permutation of [d]");
        seen[v] = true;
    }
}

} // namespace detail

/// K = U_pi D with U_pi |i> = |pi(i)>.
struct SioTerm {
    Permutation perm;
    Vector diag;
};

class SioKraus {
public:
    SioKraus(std::size_t dim, std::vector<SioTerm> terms, double tol = 1e-10) : dim_(dim), terms_(std::move(terms)) {
        if (dim_ == 0) throw InvalidArgument("SIO channel needs d >= 1");
        if (terms_.empty()) throw InvalidArgument("SIO channel needs at least one Kraus term");
        RealVector col = RealVector::Zero(static_cast<Eigen::Index>(dim_));
        for (const auto &t : terms_) {
            detail::require_permutation(t.perm, dim_);
            if (static_cast<std::size_t>(t.diag.size()) != dim_) throw InvalidArgument("diagonal length mismatch");
            col += t.diag.cwiseAbs2();
        }
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (std::abs(col(i) - 1.0) > tol)
                throw InvalidArgument("trace preservation fails at index " + std::to_string(i) + ": sum |d(i)|^2 = " +
                                      std::to_string(col(i)));
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<SioTerm> &terms() const noexcept { return terms_; }

    static SioKraus identity(std::size_t d) {
        Permutation p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = i;
        return SioKraus(d, {{p, Vector::Ones(static_cast<Eigen::Index>(d))}});
    }

    static SioKraus full_dephasing(std::size_t d) {
        Permutation p(d);
        for (std::size_t i = 0; i < d; ++i) p[i] = i;
        std::vector<SioTerm> t;
        for (std::size_t i = 0; i < d; ++i) {
            Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
            e(static_cast<Eigen::Index>(i)) = 1.0;
            t.push_back({p, e});
        }
        return SioKraus(d, std::move(t));
    }

    static SioKraus permutation(const Permutation &p) {
        return SioKraus(p.size(), {{p, Vector::Ones(static_cast<Eigen::Index>(p.size()))}});
    }

private:
    std::size_t dim_;
    std::vector<SioTerm> terms_;
};

inline DensityMatrix apply_sio(const SioKraus &ch, const DensityMatrix &rho) {
    require_same_dim(ch.dim(), rho.dim(), "apply_sio");
    const auto d = static_cast<Eigen::Index>(rho.dim());
    Matrix out = Matrix::Zero(d, d);
    const Matrix &m = rho.matrix();
    for (const auto &t : ch.terms())
        for (Eigen::Index i = 0; i < d; ++i) {
            const Complex di = t.diag(i);
            if (di == 0.0) continue;
            const auto pi = static_cast<Eigen::Index>(t.perm[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < d; ++j)
                out(pi, static_cast<Eigen::Index>(t.perm[static_cast<std::size_t>(j)])) +=
                    di * m(i, j) * std::conj(t.diag(j));
        }
    return DensityMatrix::assume_valid(std::move(out));
}

// ---------------------------------------------------------------------------
// PIO: mixtures of elementary channels sum_b U_b Pi_b (.) Pi_b U_b^dagger.

/// U |i> = e^{i phase_i} |perm(i)>, applied after projecting onto `support`.
struct PioBranch {
    Permutation perm;
    std::vector<double> phase;
    IndexSet support;
};

struct PioElementary {
    double weight = 1.0;
    std::vector<PioBranch> branches;
};

class PioChannel {
public:
    PioChannel(std::size_t dim, std::vector<PioElementary> mixture, double tol = 1e-10)
        : dim_(dim), mixture_(std::move(mixture)) {
        if (mixture_.empty()) throw InvalidArgument("PIO channel needs at least one elementary term");
        double total = 0.0;
        for (auto &e : mixture_) {
            if (!(e.weight >= 0.0)) throw InvalidArgument("negative PIO mixture weight");
            total += e.weight;
            std::vector<int> cover(dim_, 0);
            for (auto &b : e.branches) {
                detail::require_permutation(b.perm, dim_);
                if (b.phase.empty()) b.phase.assign(dim_, 0.0);
                if (b.phase.size() != dim_) throw InvalidArgument("phase vector length mismatch");
                std::sort(b.support.begin(), b.support.end());
                for (auto i : b.support) {
                    if (i >= dim_) throw InvalidArgument("projector index out of range");
                    ++cover[i];
                }
            }
            for (std::size_t i = 0; i < dim_; ++i)
                if (cover[i] != 1)
                    throw InvalidArgument("incomplete projector family: index " + std::to_string(i) + " covered " +
                                          std::to_string(cover[i]) + " times");
        }
        if (std::abs(total - 1.0) > tol) throw InvalidArgument("PIO mixture weights sum to " + std::to_string(total));
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<PioElementary> &mixture() const noexcept { return mixture_; }

    /// Kraus operators sqrt(p_a) U_b Pi_b as an SIO.
    SioKraus expand_to_sio() const {
        std::vector<SioTerm> terms;
        for (const auto &e : mixture_)
            for (const auto &b : e.branches) {
                Vector diag = Vector::Zero(static_cast<Eigen::Index>(dim_));
                for (auto i : b.support) diag(static_cast<Eigen::Index>(i)) = std::polar(std::sqrt(e.weight), b.phase[i]);
                terms.push_back({b.perm, std::move(diag)});
            }
        return SioKraus(dim_, std::move(terms), 1e-9);
    }

private:
    std::size_t dim_;
    std::vector<PioElementary> mixture_;
};

namespace detail {

/// U_b Pi_b rho Pi_b U_b^dagger (unnormalized).
inline Matrix apply_branch(const PioBranch &b, const Matrix &m) {
    const auto d = m.rows();
    Matrix out = Matrix::Zero(d, d);
    for (auto i : b.support)
        for (auto j : b.support)
            out(static_cast<Eigen::Index>(b.perm[i]), static_cast<Eigen::Index>(b.perm[j])) =
                std::polar(1.0, b.phase[i] - b.phase[j]) * m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

} // namespace detail

inline DensityMatrix apply_pio(const PioChannel &ch, const DensityMatrix &rho) {
    require_same_dim(ch.dim(), rho.dim(), "apply_pio");
    const auto d = static_cast<Eigen::Index>(rho.dim());
    Matrix out = Matrix::Zero(d, d);
    for (const auto &e : ch.mixture())
        for (const auto &b : e.branches) out += e.weight * detail::apply_branch(b, rho.matrix());
    return DensityMatrix::assume_valid(std::move(out));
}

struct InstrumentOutcome {
    double probability = 0.0;
    std::optional<DensityMatrix> state; // empty when the outcome has probability zero
};

/// Outcome probabilities q_b = Tr[rho Pi_b] and normalized post-states.
inline std::vector<InstrumentOutcome> pio_instrument(const PioElementary &e, const DensityMatrix &rho) {
    std::vector<InstrumentOutcome> out;
    std::vector<int> cover(rho.dim(), 0);
    for (const auto &b : e.branches)
        for (auto i : b.support) {
            if (i >= rho.dim()) throw InvalidArgument("projector index out of range");
            ++cover[i];
        }
    for (auto c : cover)
        if (c != 1) throw InvalidArgument("incomplete projector family");
    for (const auto &b : e.branches) {
        InstrumentOutcome o;
        for (auto i : b.support) o.probability += rho(i, i).real();
        if (o.probability > 1e-15)
            o.state = DensityMatrix::assume_valid(detail::apply_branch(b, rho.matrix()) / o.probability);
        out.push_back(std::move(o));
    }
    return out;
}

/// The instrument {Pi_{I_s}} of the clique blocks, completed by singletons on
/// unsupported indices.
inline PioElementary clique_instrument(const CliquePartition &part, std::size_t d) {
    Permutation id(d);
    for (std::size_t i = 0; i < d; ++i) id[i] = i;
    PioElementary e;
    for (const auto &block : part.blocks) e.branches.push_back({id, std::vector<double>(d, 0.0), block});
    for (std::size_t i = 0; i < d; ++i)
        if (part.label[i] < 0) e.branches.push_back({id, std::vector<double>(d, 0.0), {i}});
    return e;
}

// ---------------------------------------------------------------------------
// Seeded generators.

/// Columns (d_a(i))_a are independent Haar unit vectors; permutations uniform.
inline SioKraus random_sio(std::size_t dim, std::size_t n_terms, std::uint64_t seed) {
    if (n_terms < 1) throw InvalidArgument("random_sio needs n_terms >= 1");
    CounterRng rng(seed, 0x510);
    std::vector<SioTerm> terms(n_terms);
    for (auto &t : terms) {
        t.perm = random_permutation(dim, rng);
        t.diag = Vector::Zero(static_cast<Eigen::Index>(dim));
    }
    for (std::size_t i = 0; i < dim; ++i) {
        Vector g(static_cast<Eigen::Index>(n_terms));
        for (Eigen::Index a = 0; a < g.size(); ++a) g(a) = Complex(rng.normal(), rng.normal());
        g /= g.norm();
        for (std::size_t a = 0; a < n_terms; ++a) terms[a].diag(static_cast<Eigen::Index>(i)) = g(static_cast<Eigen::Index>(a));
    }
    return SioKraus(dim, std::move(terms));
}

namespace detail {

inline std::vector<double> bell_numbers(std::size_t n) {
    // Bell triangle.
    std::vector<double> bell{1.0};
    std::vector<double> row{1.0};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<double> next{row.back()};
        for (double v : row) next.push_back(next.back() + v);
        row = std::move(next);
        bell.push_back(row.front());
    }
    return bell;
}

/// Uniform set partition of [d]: the block of the smallest remaining element
/// takes k companions with probability C(m-1, k) B(m-1-k) / B(m).
inline std::vector<IndexSet> random_set_partition(std::size_t d, CounterRng &rng) {
    const auto bell = bell_numbers(d);
    IndexSet rest(d);
    for (std::size_t i = 0; i < d; ++i) rest[i] = i;
    std::vector<IndexSet> blocks;
    while (!rest.empty()) {
        const std::size_t m = rest.size();
        double u = rng.uniform() * bell[m];
        std::size_t k = 0;
        double binom = 1.0; // C(m-1, k)
        for (; k + 1 < m; ++k) {
            const double w = binom * bell[m - 1 - k];
            if (u < w) break;
            u -= w;
            binom = binom * static_cast<double>(m - 1 - k) / static_cast<double>(k + 1);
        }
        IndexSet others(rest.begin() + 1, rest.end());
        for (std::size_t a = 0; a < k; ++a) std::swap(others[a], others[a + rng.below(others.size() - a)]);
        IndexSet block{rest.front()};
        block.insert(block.end(), others.begin(), others.begin() + static_cast<long>(k));
        std::sort(block.begin(), block.end());
        blocks.push_back(block);
        IndexSet remaining;
        std::set_difference(rest.begin(), rest.end(), block.begin(), block.end(), std::back_inserter(remaining));
        rest = std::move(remaining);
    }
    return blocks;
}

} // namespace detail

inline PioChannel random_pio(std::size_t dim, std::size_t n_elementary, std::uint64_t seed) {
    if (n_elementary < 1) throw InvalidArgument("random_pio needs n_elementary >= 1");
    CounterRng rng(seed, 0x910);
    const auto weights = random_simplex(n_elementary, rng);
    std::vector<PioElementary> mixture;
    for (std::size_t a = 0; a < n_elementary; ++a) {
        PioElementary e;
        e.weight = weights[a];
        for (auto &block : detail::random_set_partition(dim, rng)) {
            PioBranch b;
            b.perm = random_permutation(dim, rng);
            b.phase.resize(dim);
            for (auto &ph : b.phase) ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
            b.support = std::move(block);
            e.branches.push_back(std::move(b));
        }
        mixture.push_back(std::move(e));
    }
    return PioChannel(dim, std::move(mixture), 1e-9);
}

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json channel_to_json(const SioKraus &ch) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &t : ch.terms()) {
        std::vector<double> re, im;
        for (Eigen::Index i = 0; i < t.diag.size(); ++i) {
            re.push_back(t.diag(i).real());
            im.push_back(t.diag(i).imag());
        }
        terms.push_back({{"perm", t.perm}, {"diag_re", re}, {"diag_im", im}});
    }
    return {{"kind", "sio"}, {"dim", ch.dim()}, {"terms", terms}};
}

inline nlohmann::json channel_to_json(const PioChannel &ch) {
    nlohmann::json mixture = nlohmann::json::array();
    for (const auto &e : ch.mixture()) {
        nlohmann::json branches = nlohmann::json::array();
        for (const auto &b : e.branches)
            branches.push_back({{"perm", b.perm}, {"phase", b.phase}, {"support", b.support}});
        mixture.push_back({{"weight", e.weight}, {"branches", branches}});
    }
    return {{"kind", "pio"}, {"dim", ch.dim()}, {"mixture", mixture}};
}

inline SioKraus sio_from_json(const nlohmann::json &j) {
    try {
        if (j.at("kind") != "sio") throw InvalidArgument("channel kind is not 'sio'");
        const auto d = j.at("dim").get<std::size_t>();
        std::vector<SioTerm> terms;
        for (const auto &t : j.at("terms")) {
            const auto re = t.at("diag_re").get<std::vector<double>>();
            const auto im = t.contains("diag_im") ? t.at("diag_im").get<std::vector<double>>() : std::vector<double>(re.size());
            if (im.size() != re.size()) throw InvalidArgument("diag_re/diag_im length mismatch");
            Vector diag(static_cast<Eigen::Index>(re.size()));
            for (std::size_t i = 0; i < re.size(); ++i) diag(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
            terms.push_back({t.at("perm").get<Permutation>(), diag});
        }
        return SioKraus(d, std::move(terms));
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed SIO channel: ") + e.what());
    }
}

inline PioChannel pio_from_json(const nlohmann::json &j) {
    try {
        if (j.at("kind") != "pio") throw InvalidArgument("channel kind is not 'pio'");
        const auto d = j.at("dim").get<std::size_t>();
        std::vector<PioElementary> mixture;
        for (const auto &e : j.at("mixture")) {
            PioElementary el;
            el.weight = e.at("weight").get<double>();
            for (const auto &b : e.at("branches"))
                el.branches.push_back({b.at("perm").get<Permutation>(),
                                       b.contains("phase") ? b.at("phase").get<std::vector<double>>() : std::vector<double>{},
                                       b.at("support").get<IndexSet>()});
            mixture.push_back(std::move(el));
        }
        return PioChannel(d, std::move(mixture));
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed PIO channel: ") + e.what());
    }
}

} // namespace coherence
