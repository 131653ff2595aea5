#pragma once

#include <cstddef>
#include <cstdint>

namespace coherence {

/// Numerical tolerances shared by the whole library.
struct Tolerances {
    double herm = 1e-10;       // hermiticity, trace and PSD validation
    double eig_zero = 1e-12;   // eigenvalues below this count as zero in entropies
    double diag_cut = 1e-12;   // support of the dephased state
    double tol_edge = 1e-9;    // |R_ij| >= 1 - tol_edge marks a clique edge
    double purity = 1e-8;      // max second eigenvalue of a normalized clique block
    double amp_support = 1e-12;
};

/// Size caps for enumerations and tensor products.
struct Caps {
    std::size_t max_dim = 4096;
    std::uint64_t subset_enumeration = 2'000'000; // C(d,k) for exact mu_k
    std::size_t v_epsilon_dim = 16;               // 2^d subsets for quantum V_eps
    std::size_t v_epsilon_classical = 22;         // 2^support for classical V_eps
    std::uint64_t product_atoms = 2'000'000;      // support^n for p^n
    std::uint64_t dilution_search = 1'000'000;    // largest N tried by plan_dilution
};

inline const Tolerances &default_tolerances() {
    static const Tolerances t{};
    return t;
}

inline const Caps &default_caps() {
    static const Caps c{};
    return c;
}

} // namespace coherence
