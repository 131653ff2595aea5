#pragma once

// Seeded state ensembles for property tests and the random-state command.

#include <algorithm>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "quantum_core.hpp"
#include "rng.hpp"

namespace coherence {

enum class Ensemble { hilbert_schmidt, pure, block_structured, diagonally_dominant };

inline const char *to_string(Ensemble e) {
    switch (e) {
    case Ensemble::hilbert_schmidt: return "hilbert-schmidt";
    case Ensemble::pure: return "pure";
    case Ensemble::block_structured: return "block-structured";
    case Ensemble::diagonally_dominant: return "diagonally-dominant";
    }
    return "?";
}

inline Ensemble parse_ensemble(const std::string &s) {
    if (s == "hilbert-schmidt") return Ensemble::hilbert_schmidt;
    if (s == "pure") return Ensemble::pure;
    if (s == "block-structured") return Ensemble::block_structured;
    if (s == "diagonally-dominant") return Ensemble::diagonally_dominant;
    throw InvalidArgument("unknown ensemble '" + s +
                          "' (expected hilbert-schmidt, pure, block-structured or diagonally-dominant)");
}

inline Vector gaussian_vector(std::size_t d, CounterRng &rng) {
    Vector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v;
}

/// G G^dagger / Tr for a complex Ginibre G.
inline DensityMatrix random_hilbert_schmidt(std::size_t d, CounterRng &rng) {
    Matrix g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) = gaussian_vector(d, rng);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix(m);
}

inline PureState random_pure(std::size_t d, CounterRng &rng) { return PureState::normalized(gaussian_vector(d, rng)); }

/// rho = (1 - t) sum_s w_s psi_s psi_s^dagger + t |v><v| with v = sum_s c_s psi_s
/// and psi_s a random pure state on block s. Every block compresses to a rank-one
/// state while the cross-block coherences stay strictly below modulus one.
inline DensityMatrix random_block_structured(const std::vector<std::size_t> &profile, CounterRng &rng) {
    if (profile.empty()) throw InvalidArgument("block profile is empty");
    const std::size_t d = std::accumulate(profile.begin(), profile.end(), std::size_t{0});
    for (auto s : profile)
        if (s == 0) throw InvalidArgument("block sizes must be positive");
    const auto order = random_permutation(d, rng);
    const auto w = random_simplex(profile.size(), rng);
    const double t = rng.uniform(0.05, 0.5);
    const auto dd = static_cast<Eigen::Index>(d);
    Matrix m = Matrix::Zero(dd, dd);
    Vector v = Vector::Zero(dd);
    std::size_t pos = 0;
    Vector c = gaussian_vector(profile.size(), rng);
    c /= c.norm();
    for (std::size_t s = 0; s < profile.size(); ++s) {
        Vector psi = Vector::Zero(dd);
        Vector local = gaussian_vector(profile[s], rng);
        local /= local.norm();
        for (std::size_t a = 0; a < profile[s]; ++a) psi(static_cast<Eigen::Index>(order[pos + a])) = local(static_cast<Eigen::Index>(a));
        pos += profile[s];
        m += (1.0 - t) * w[s] * psi * psi.adjoint();
        v += c(static_cast<Eigen::Index>(s)) * psi;
    }
    m += t * v * v.adjoint();
    m /= m.trace().real();
    return DensityMatrix(m);
}

/// Random diagonal p and off-diagonals with |rho_ij| <= min(p_i, p_j)/(d-1),
/// so rho_ii >= sum_j |rho_ij| and the matrix is positive by Gershgorin.
inline DensityMatrix random_diagonally_dominant(std::size_t d, CounterRng &rng) {
    const auto p = random_simplex(d, rng);
    const auto dd = static_cast<Eigen::Index>(d);
    Matrix m = Matrix::Zero(dd, dd);
    for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p[i];
    if (d > 1)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                const double r = rng.uniform() * std::min(p[i], p[j]) / static_cast<double>(d - 1);
                const Complex z = std::polar(r, rng.uniform(0.0, 2.0 * std::numbers::pi));
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z;
                m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(z);
            }
    return DensityMatrix(m);
}

/// A random composition of d into positive parts; the first part has size
/// at least two when d >= 2, so the profile is never all singletons.
inline std::vector<std::size_t> random_profile(std::size_t d, CounterRng &rng) {
    std::vector<std::size_t> out;
    std::size_t left = d;
    if (d >= 2) {
        out.push_back(2 + rng.below(d - 1));
        left -= out.back();
    }
    while (left > 0) {
        const std::size_t s = 1 + rng.below(left);
        out.push_back(s);
        left -= s;
    }
    return out;
}

/// `profile` is used by the block-structured ensemble; empty means random.
inline DensityMatrix random_state(Ensemble e, std::size_t d, CounterRng &rng,
                                  const std::vector<std::size_t> &profile = {}) {
    if (d == 0) throw InvalidArgument("dimension must be positive");
    switch (e) {
    case Ensemble::hilbert_schmidt: return random_hilbert_schmidt(d, rng);
    case Ensemble::pure: return DensityMatrix::from_pure(random_pure(d, rng));
    case Ensemble::block_structured: {
        if (!profile.empty() && std::accumulate(profile.begin(), profile.end(), std::size_t{0}) != d)
            throw InvalidArgument("block profile does not sum to the dimension");
        return random_block_structured(profile.empty() ? random_profile(d, rng) : profile, rng);
    }
    case Ensemble::diagonally_dominant: return random_diagonally_dominant(d, rng);
    }
    throw InvalidArgument("unknown ensemble");
}

} // namespace coherence
