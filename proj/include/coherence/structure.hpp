#pragma once

// Comparison matrix R = D^{-1/2} rho D^{-1/2}, its modulus-one edge graph,
// the clique partition and the measures derived from it.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "quantum_core.hpp"

namespace coherence {

struct ComparisonMatrix {
    Matrix entries;
    std::vector<bool> support; // rho_ii > diag_cut

    std::size_t dim() const noexcept { return support.size(); }
    double modulus(std::size_t i, std::size_t j) const {
        return std::abs(entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    IndexSet supported_indices() const {
        IndexSet s;
        for (std::size_t i = 0; i < support.size(); ++i)
            if (support[i]) s.push_back(i);
        return s;
    }
};

struct CliquePartition {
    std::vector<IndexSet> blocks;          // sorted, ordered by smallest element
    std::vector<double> block_weights;     // P(s) = Tr[Pi_s rho]
    std::vector<Matrix> block_states;      // |I_s| x |I_s|, trace one, rank one
    std::vector<long> label;               // block index of each j, -1 if unsupported

    std::size_t size() const noexcept { return blocks.size(); }
    std::size_t max_block_size() const {
        std::size_t l = 0;
        for (const auto &b : blocks) l = std::max(l, b.size());
        return l;
    }
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

} // namespace detail

/// R_ij = rho_ij / sqrt(rho_ii rho_jj) on the support, zero elsewhere.
inline ComparisonMatrix comparison_matrix(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    const std::size_t d = rho.dim();
    ComparisonMatrix r;
    r.support.resize(d);
    RealVector inv_sqrt = RealVector::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const double p = rho(i, i).real();
        r.support[i] = p > tol.diag_cut;
        if (r.support[i]) inv_sqrt(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(p);
    }
    r.entries = inv_sqrt.asDiagonal() * rho.matrix() * inv_sqrt.asDiagonal();
    for (std::size_t i = 0; i < d; ++i)
        if (r.support[i]) r.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return r;
}

inline bool is_edge(const ComparisonMatrix &r, std::size_t i, std::size_t j, const Tolerances &tol) {
    return r.support[i] && r.support[j] && r.modulus(i, j) >= 1.0 - tol.tol_edge;
}

/// Connected components of the thresholded edge graph. Each component must be
/// a clique carrying a pure block; otherwise StructuralInconsistency is thrown.
inline CliquePartition edge_graph_and_cliques(const ComparisonMatrix &r, const DensityMatrix &rho,
                                              const Tolerances &tol = default_tolerances()) {
    require_same_dim(r.dim(), rho.dim(), "edge_graph_and_cliques");
    const std::size_t d = r.dim();
    detail::UnionFind uf(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (is_edge(r, i, j, tol)) uf.unite(i, j);

    CliquePartition part;
    part.label.assign(d, -1);
    std::vector<long> root_block(d, -1);
    for (std::size_t i = 0; i < d; ++i) {
        if (!r.support[i]) continue;
        const std::size_t root = uf.find(i);
        if (root_block[root] < 0) {
            root_block[root] = static_cast<long>(part.blocks.size());
            part.blocks.emplace_back();
        }
        part.blocks[static_cast<std::size_t>(root_block[root])].push_back(i);
        part.label[i] = root_block[root];
    }

    for (const auto &block : part.blocks) {
        for (std::size_t a = 0; a < block.size(); ++a)
            for (std::size_t b = a + 1; b < block.size(); ++b)
                if (!is_edge(r, block[a], block[b], tol))
                    throw StructuralInconsistency("component containing " + std::to_string(block[a]) + " and " +
                                                  std::to_string(block[b]) + " is not a clique");
        Matrix sub = principal_submatrix(rho.matrix(), block);
        const double w = sub.trace().real();
        sub /= w;
        if (block.size() > 1) {
            const RealVector ev = hermitian_eigenvalues(sub);
            const double second = ev(ev.size() - 2);
            if (second > tol.purity)
                throw StructuralInconsistency("block starting at index " + std::to_string(block.front()) +
                                              " is not pure: second eigenvalue " + std::to_string(second));
        }
        part.block_weights.push_back(w);
        part.block_states.push_back(std::move(sub));
    }
    return part;
}

inline CliquePartition clique_partition(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    return edge_graph_and_cliques(comparison_matrix(rho, tol), rho, tol);
}

/// rho-bar: rho with every entry outside the clique blocks cut off.
inline DensityMatrix trimmed_state(const DensityMatrix &rho, const CliquePartition &part) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rho.dim()), static_cast<Eigen::Index>(rho.dim()));
    for (const auto &block : part.blocks)
        for (auto i : block)
            for (auto j : block) {
                const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
                out(a, b) = rho.matrix()(a, b);
            }
    return DensityMatrix::assume_valid(std::move(out));
}

/// S(Delta(rho)) - S(rho-bar), with S(rho-bar) summed blockwise.
inline double quintessential_coherence(const DensityMatrix &rho, const CliquePartition &part,
                                       const Tolerances &tol = default_tolerances()) {
    const double s_diag = shannon_entropy(rho.diagonal_probs(), tol.eig_zero);
    double s_bar = 0.0;
    for (std::size_t s = 0; s < part.size(); ++s) {
        RealVector ev = hermitian_eigenvalues(part.block_states[s]) * part.block_weights[s];
        s_bar += shannon_entropy(ev, tol.eig_zero);
    }
    return std::max(0.0, s_diag - s_bar);
}

inline double quintessential_coherence(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    return quintessential_coherence(rho, clique_partition(rho, tol), tol);
}

/// C_r(rho) = S(Delta(rho)) - S(rho).
inline double relative_entropy_of_coherence(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    return std::max(0.0, shannon_entropy(rho.diagonal_probs(), tol.eig_zero) - von_neumann_entropy(rho, tol));
}

/// C(phi) = S(Delta(phi)) for a pure state.
inline double entropy_of_coherence(const PureState &psi) {
    return shannon_entropy(RealVector(psi.amplitudes().cwiseAbs2()));
}

struct LambdaEta {
    double lambda = 0.0; // largest off-diagonal modulus below the edge threshold
    double eta = 0.0;    // largest off-diagonal modulus
};

inline LambdaEta lambda_and_eta(const ComparisonMatrix &r, const Tolerances &tol = default_tolerances()) {
    LambdaEta out;
    const std::size_t d = r.dim();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double m = r.modulus(i, j);
            out.eta = std::max(out.eta, m);
            if (!is_edge(r, i, j, tol)) out.lambda = std::max(out.lambda, m);
        }
    out.eta = std::min(out.eta, 1.0);
    return out;
}

/// l(rho): the largest number of modulus-one entries in a row of R.
inline std::size_t max_pure_block_size(const ComparisonMatrix &r, const Tolerances &tol = default_tolerances()) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < r.dim(); ++i) {
        if (!r.support[i]) continue;
        std::size_t count = 1;
        for (std::size_t j = 0; j < r.dim(); ++j)
            if (j != i && is_edge(r, i, j, tol)) ++count;
        best = std::max(best, count);
    }
    return best;
}

/// Everything the structural analysis yields for one state.
struct StructureSummary {
    ComparisonMatrix comparison;
    CliquePartition partition;
    double Q = 0.0;
    double Cr = 0.0;
    double lambda = 0.0;
    double eta = 0.0;
    std::size_t l = 0;
};

inline StructureSummary analyze_structure(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    StructureSummary s;
    s.comparison = comparison_matrix(rho, tol);
    s.partition = edge_graph_and_cliques(s.comparison, rho, tol);
    s.Q = quintessential_coherence(rho, s.partition, tol);
    s.Cr = relative_entropy_of_coherence(rho, tol);
    const auto le = lambda_and_eta(s.comparison, tol);
    s.lambda = le.lambda;
    s.eta = le.eta;
    s.l = max_pure_block_size(s.comparison, tol);
    return s;
}

} // namespace coherence
