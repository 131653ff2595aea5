#pragma once

// Independent reference computations. Nothing here calls the library's
// algorithms; only its matrix types are shared.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;

inline double entropy_bits(const std::vector<double> &p) {
    double h = 0.0;
    for (double x : p)
        if (x > 1e-15) h -= x * std::log2(x);
    return h;
}

/// Eigenvalues of the real symmetric [[a, b], [b, c]].
inline std::pair<double, double> eig2(double a, double b, double c) {
    const double mid = 0.5 * (a + c), rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return {mid - rad, mid + rad};
}

inline M kron(const M &a, const M &b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

inline std::vector<double> eigenvalues(const M &m) {
    Eigen::SelfAdjointEigenSolver<M> es(m);
    const Eigen::VectorXd ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

inline double vn_entropy(const M &m) { return entropy_bits(eigenvalues(m)); }

inline double trace_norm(const M &m) {
    double s = 0.0;
    for (double x : eigenvalues(m)) s += std::abs(x);
    return s;
}

/// max over |I| = k of log2 lambda_max(Pi_I R Pi_I), by bitmask enumeration.
inline double mu_bruteforce(const M &rho, std::size_t k) {
    const auto d = rho.rows();
    M r = M::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double w = std::sqrt(rho(i, i).real() * rho(j, j).real());
            if (w > 0.0) r(i, j) = rho(i, j) / w;
        }
    double best = 1.0;
    for (std::uint32_t mask = 1; mask < (1U << d); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<Eigen::Index> idx;
        for (Eigen::Index b = 0; b < d; ++b)
            if (mask >> b & 1U) idx.push_back(b);
        M sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b)
                sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r(idx[a], idx[b]);
        best = std::max(best, eigenvalues(sub).back());
    }
    return std::log2(best);
}

/// Smallest N >= n with M = ceil(N log2 k) satisfying
/// n log k <= M + log(1 - eps/2) <= N log k <= M <= n (log k + delta).
struct Plan {
    bool found = false;
    std::uint64_t M = 0, N = 0;
};

inline Plan dilution_search(std::uint64_t k, std::uint64_t n, double delta, double eps, std::uint64_t cap = 1000000) {
    const long double lk = std::log2(static_cast<long double>(k));
    const long double slack = std::log2(1.0L - eps / 2.0L);
    for (std::uint64_t big_n = n; big_n <= cap; ++big_n) {
        const auto m = static_cast<std::uint64_t>(std::ceil(big_n * lk));
        if (m > n * (lk + delta)) return {};
        const long double mm = m;
        if (n * lk <= mm + slack && mm + slack <= big_n * lk && big_n * lk <= mm) return {true, m, big_n};
    }
    return {};
}

/// Joint atom (x, y, p).
struct Atom {
    std::uint64_t x, y;
    double p;
};

/// min over subsets I of atoms with 2 (1 - P(I)) <= eps of log2 max_y |{x : (x,y) in I}|.
inline double tweaked_hmax_bruteforce(const std::vector<Atom> &atoms, double eps) {
    const std::size_t n = atoms.size();
    double best = INFINITY;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        double mass = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            if (mask >> a & 1U) mass += atoms[a].p;
        if (2.0 * (1.0 - mass) > eps + 1e-12) continue;
        std::vector<std::pair<std::uint64_t, int>> count;
        int widest = 0;
        for (std::size_t a = 0; a < n; ++a) {
            if (!(mask >> a & 1U)) continue;
            auto it = std::find_if(count.begin(), count.end(), [&](auto &c) { return c.first == atoms[a].y; });
            if (it == count.end()) count.push_back({atoms[a].y, 1}), widest = std::max(widest, 1);
            else widest = std::max(widest, ++it->second);
        }
        best = std::min(best, std::log2(static_cast<double>(widest)));
    }
    return best;
}

/// n-fold product of a joint distribution; x and y sequences encoded in base x_size / y_size.
inline std::vector<Atom> product(const std::vector<Atom> &atoms, std::size_t n, std::uint64_t xs, std::uint64_t ys) {
    std::vector<Atom> out{{0, 0, 1.0}};
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<Atom> next;
        for (const auto &a : out)
            for (const auto &b : atoms) next.push_back({a.x * xs + b.x, a.y * ys + b.y, a.p * b.p});
        out = std::move(next);
    }
    return out;
}

/// max over phases of u^dagger m u with |u_a| = 1 on a 3-element support, by a grid
/// of 720 x 720 phase pairs (first phase fixed to 0).
inline double uniform_form_grid3(const M &m) {
    double best = -INFINITY;
    const int steps = 720;
    for (int s = 0; s < steps; ++s)
        for (int t = 0; t < steps; ++t) {
            Eigen::VectorXcd u(3);
            u << 1.0, std::polar(1.0, 2.0 * M_PI * s / steps), std::polar(1.0, 2.0 * M_PI * t / steps);
            best = std::max(best, u.dot(m * u).real());
        }
    return best;
}

} // namespace oracle
