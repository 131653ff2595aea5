#pragma once

// Validated density-matrix arithmetic. Every spectral quantity (entropy,
// trace distance, positivity) goes through one Hermitian eigensolver.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"

namespace coherence {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;

/// Eigenvalues of a Hermitian matrix in ascending order.
inline RealVector hermitian_eigenvalues(const Matrix &m) {
    if (m.rows() == 0) return RealVector{};
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

/// Largest eigenvalue of a Hermitian matrix.
inline double top_eigenvalue(const Matrix &m) {
    if (m.rows() == 0) return 0.0;
    if (m.rows() == 1) return m(0, 0).real();
    return hermitian_eigenvalues(m)(m.rows() - 1);
}

inline double log2_safe(double x) { return x > 0.0 ? std::log2(x) : -INFINITY; }

/// -sum p log2 p over entries above `cut`.
inline double shannon_entropy(std::span<const double> probs, double cut = 1e-12) {
    double h = 0.0;
    for (double p : probs)
        if (p > cut) h -= p * std::log2(p);
    return h;
}

inline double shannon_entropy(const RealVector &probs, double cut = 1e-12) {
    return shannon_entropy(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), cut);
}

class PureState {
public:
    /// Normalized vector; throws InvalidState if the norm is off by more than 1e-10.
    explicit PureState(Vector amplitudes, double tol = 1e-10) : amp_(std::move(amplitudes)) {
        if (amp_.size() == 0) throw InvalidState("shape", "empty amplitude vector");
        const double norm = amp_.norm();
        if (!std::isfinite(norm) || std::abs(norm - 1.0) > tol)
            throw InvalidState("norm", "amplitude norm " + std::to_string(norm) + " is not 1");
    }

    /// Normalizes an arbitrary nonzero vector.
    static PureState normalized(const Vector &v) {
        const double norm = v.norm();
        if (!(norm > 0.0)) throw InvalidState("norm", "zero vector");
        return PureState(v / norm);
    }

    /// Uniformly coherent state on `support` with the given phases (radians);
    /// an empty phase list means all phases zero.
    static PureState uniform(std::size_t dim, const IndexSet &support, std::span<const double> phases = {}) {
        if (support.empty()) throw InvalidArgument("uniformly coherent state needs a nonempty support");
        Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
        const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
        for (std::size_t a = 0; a < support.size(); ++a) {
            if (support[a] >= dim) throw InvalidArgument("support index out of range");
            const double theta = phases.empty() ? 0.0 : phases[a];
            v(static_cast<Eigen::Index>(support[a])) = std::polar(amp, theta);
        }
        return PureState(v);
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(amp_.size()); }
    const Vector &amplitudes() const noexcept { return amp_; }

    IndexSet support(double cut = 1e-12) const {
        IndexSet s;
        for (Eigen::Index i = 0; i < amp_.size(); ++i)
            if (std::abs(amp_(i)) > cut) s.push_back(static_cast<std::size_t>(i));
        return s;
    }

    /// All nonzero amplitudes share the same modulus.
    bool is_uniformly_coherent(double tol = 1e-10) const {
        const auto s = support();
        const double target = 1.0 / std::sqrt(static_cast<double>(s.size()));
        for (auto i : s)
            if (std::abs(std::abs(amp_(static_cast<Eigen::Index>(i))) - target) > tol) return false;
        return true;
    }

    Matrix projector() const { return amp_ * amp_.adjoint(); }

private:
    Vector amp_;
};

class DensityMatrix {
public:
    /// Validates hermiticity, unit trace and positivity. Asymmetry within
    /// tolerance is removed by (M + M^dagger)/2.
    explicit DensityMatrix(const Matrix &m, const Tolerances &tol = default_tolerances()) : m_(m) {
        if (m_.rows() == 0 || m_.rows() != m_.cols())
            throw InvalidState("shape", "matrix must be square and nonempty");
        if (!m_.allFinite()) throw InvalidState("finite", "matrix has non-finite entries");
        const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (asym > tol.herm)
            throw InvalidState("hermitian", "max |M - M^dagger| = " + std::to_string(asym));
        m_ = ((m_ + m_.adjoint()) * 0.5).eval();
        const double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > tol.herm)
            throw InvalidState("trace", "trace = " + std::to_string(tr));
        const double min_eig = hermitian_eigenvalues(m_)(0);
        if (min_eig < -tol.herm)
            throw InvalidState("positivity", "min eigenvalue = " + std::to_string(min_eig));
    }

    /// Wraps a matrix that is a density matrix by construction (products,
    /// channel outputs, marginals). Only hermiticity is enforced.
    static DensityMatrix assume_valid(Matrix m) {
        DensityMatrix r;
        r.m_ = (m + m.adjoint()) * 0.5;
        return r;
    }

    static DensityMatrix from_pure(const PureState &psi) { return assume_valid(psi.projector()); }

    static DensityMatrix diagonal(std::span<const double> probs) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(probs.size()), static_cast<Eigen::Index>(probs.size()));
        for (std::size_t i = 0; i < probs.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = probs[i];
        return DensityMatrix(m);
    }

    static DensityMatrix maximally_mixed(std::size_t d) {
        return assume_valid(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) /
                            static_cast<double>(d));
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix &matrix() const noexcept { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    /// The diagonal as a probability vector.
    RealVector diagonal_probs() const { return m_.diagonal().real(); }

    /// Eigenvalues with the tiny negative tail clamped to zero.
    RealVector eigenvalues() const {
        RealVector ev = hermitian_eigenvalues(m_);
        for (auto &x : ev)
            if (x < 0.0) x = 0.0;
        return ev;
    }

private:
    DensityMatrix() = default;
    Matrix m_;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char *what) {
    if (a != b)
        throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(a) + " and " +
                                std::to_string(b) + " differ");
}

/// Erases all off-diagonal entries.
inline DensityMatrix dephase(const DensityMatrix &rho) {
    Matrix d = rho.matrix().diagonal().asDiagonal();
    return DensityMatrix::assume_valid(std::move(d));
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const DensityMatrix &rho, const Tolerances &tol = default_tolerances()) {
    const RealVector ev = rho.eigenvalues();
    return shannon_entropy(ev, tol.eig_zero);
}

/// Trace norm ||a - b||_1 (ranges over [0, 2]).
inline double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "trace_distance");
    return hermitian_eigenvalues(a.matrix() - b.matrix()).cwiseAbs().sum();
}

/// Kronecker product with index (i, l) -> i * d_b + l.
inline DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b,
                            const Caps &caps = default_caps()) {
    const std::size_t da = a.dim(), db = b.dim();
    if (da * db > caps.max_dim)
        throw CapExceeded("tensor product dimension " + std::to_string(da * db) + " exceeds cap " +
                          std::to_string(caps.max_dim));
    const auto ea = static_cast<Eigen::Index>(da), eb = static_cast<Eigen::Index>(db);
    Matrix m(ea * eb, ea * eb);
    for (Eigen::Index i = 0; i < ea; ++i)
        for (Eigen::Index j = 0; j < ea; ++j) m.block(i * eb, j * eb, eb, eb) = a.matrix()(i, j) * b.matrix();
    return DensityMatrix::assume_valid(std::move(m));
}

inline DensityMatrix tensor_power(const DensityMatrix &rho, std::size_t n, const Caps &caps = default_caps()) {
    if (n == 0) throw InvalidArgument("tensor_power needs n >= 1");
    DensityMatrix out = rho;
    for (std::size_t k = 1; k < n; ++k) out = tensor(out, rho, caps);
    return out;
}

/// <psi|rho|psi>.
inline double overlap_with_pure(const DensityMatrix &rho, const PureState &psi) {
    require_same_dim(rho.dim(), psi.dim(), "overlap_with_pure");
    const Vector &v = psi.amplitudes();
    return v.dot(rho.matrix() * v).real();
}

enum class Subsystem { A, B };

/// Marginal of a bipartite state on d_A x d_B.
inline DensityMatrix partial_trace(const DensityMatrix &rho, std::size_t dim_a, std::size_t dim_b, Subsystem keep) {
    if (dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim())
        throw DimensionMismatch("partial_trace: " + std::to_string(dim_a) + " x " + std::to_string(dim_b) +
                                " does not match dimension " + std::to_string(rho.dim()));
    const auto da = static_cast<Eigen::Index>(dim_a), db = static_cast<Eigen::Index>(dim_b);
    const Matrix &m = rho.matrix();
    if (keep == Subsystem::A) {
        Matrix out = Matrix::Zero(da, da);
        for (Eigen::Index i = 0; i < da; ++i)
            for (Eigen::Index j = 0; j < da; ++j)
                for (Eigen::Index l = 0; l < db; ++l) out(i, j) += m(i * db + l, j * db + l);
        return DensityMatrix::assume_valid(std::move(out));
    }
    Matrix out = Matrix::Zero(db, db);
    for (Eigen::Index l = 0; l < db; ++l)
        for (Eigen::Index n = 0; n < db; ++n)
            for (Eigen::Index i = 0; i < da; ++i) out(l, n) += m(i * db + l, i * db + n);
    return DensityMatrix::assume_valid(std::move(out));
}

/// Pi_I rho Pi_I as a d x d matrix (not normalized).
inline Matrix compress(const Matrix &m, const IndexSet &subset) {
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (auto i : subset)
        for (auto j : subset) {
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            out(a, b) = m(a, b);
        }
    return out;
}

/// The |I| x |I| principal submatrix.
inline Matrix principal_submatrix(const Matrix &m, const IndexSet &subset) {
    const auto k = static_cast<Eigen::Index>(subset.size());
    Matrix out(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            out(a, b) = m(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(a)]),
                          static_cast<Eigen::Index>(subset[static_cast<std::size_t>(b)]));
    return out;
}

/// Pi_I rho Pi_I / Tr[rho Pi_I]; throws if the weight vanishes.
inline DensityMatrix condition_on(const DensityMatrix &rho, const IndexSet &subset, double cut = 1e-12) {
    double w = 0.0;
    for (auto i : subset) w += rho(i, i).real();
    if (!(w > cut)) throw InvalidArgument("conditioning on a subset of zero weight");
    return DensityMatrix::assume_valid(compress(rho.matrix(), subset) / w);
}

} // namespace coherence
