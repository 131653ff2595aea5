#pragma once

// Classical distributions derived from states, conditional Shannon and max
// entropies, restricted smoothing over conditionings V_eps(p), typical sets
// and the tweaked asymptotic equipartition scan.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "structure.hpp"

namespace coherence {

struct Atom {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    double p = 0.0;
};

/// Sparse joint distribution p_XY; only atoms with positive mass are stored.
class JointDistribution {
public:
    JointDistribution(std::uint64_t x_size, std::uint64_t y_size, std::vector<Atom> atoms, double tol = 1e-12)
        : x_size_(x_size), y_size_(y_size), atoms_(std::move(atoms)) {
        double total = 0.0;
        for (const auto &a : atoms_) {
            if (a.x >= x_size_ || a.y >= y_size_) throw InvalidArgument("atom index out of range");
            if (!(a.p >= 0.0) || !std::isfinite(a.p)) throw InvalidArgument("negative or non-finite probability");
            total += a.p;
        }
        if (std::abs(total - 1.0) > tol)
            throw InvalidArgument("joint distribution sums to " + std::to_string(total));
        std::erase_if(atoms_, [](const Atom &a) { return a.p <= 0.0; });
    }

    /// From a dense x_size x y_size matrix of probabilities.
    static JointDistribution from_matrix(const Eigen::MatrixXd &m, double tol = 1e-12) {
        std::vector<Atom> atoms;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (m(i, j) != 0.0)
                    atoms.push_back({static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), m(i, j)});
        return JointDistribution(static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()),
                                 std::move(atoms), tol);
    }

    std::uint64_t x_size() const noexcept { return x_size_; }
    std::uint64_t y_size() const noexcept { return y_size_; }
    const std::vector<Atom> &atoms() const noexcept { return atoms_; }

    double prob(std::uint64_t x, std::uint64_t y) const {
        double p = 0.0;
        for (const auto &a : atoms_)
            if (a.x == x && a.y == y) p += a.p;
        return p;
    }

    std::map<std::uint64_t, double> y_marginal() const {
        std::map<std::uint64_t, double> m;
        for (const auto &a : atoms_) m[a.y] += a.p;
        return m;
    }

private:
    std::uint64_t x_size_, y_size_;
    std::vector<Atom> atoms_;
};

/// X = basis index j, Y = label of the clique block containing j, P(j, s) = rho_jj.
inline JointDistribution joint_from_diagonal(const RealVector &diag, const std::vector<long> &labels,
                                             std::size_t n_blocks, double cut = 1e-12) {
    std::vector<Atom> atoms;
    double total = 0.0;
    for (Eigen::Index j = 0; j < diag.size(); ++j) {
        const double p = diag(j);
        if (p <= cut) continue;
        const long s = labels[static_cast<std::size_t>(j)];
        if (s < 0) throw InvalidArgument("mass on an index outside every block");
        atoms.push_back({static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(s), p});
        total += p;
    }
    for (auto &a : atoms) a.p /= total;
    return JointDistribution(static_cast<std::uint64_t>(diag.size()), std::max<std::uint64_t>(n_blocks, 1),
                             std::move(atoms), 1e-9);
}

inline JointDistribution joint_from_state(const DensityMatrix &rho, const CliquePartition &part,
                                          const Tolerances &tol = default_tolerances()) {
    return joint_from_diagonal(rho.diagonal_probs(), part.label, part.size(), tol.diag_cut);
}

/// H(X|Y) = H(XY) - H(Y) in bits.
inline double cond_entropy(const JointDistribution &p, double cut = 1e-12) {
    double hxy = 0.0;
    for (const auto &a : p.atoms())
        if (a.p > cut) hxy -= a.p * std::log2(a.p);
    double hy = 0.0;
    for (const auto &[y, py] : p.y_marginal())
        if (py > cut) hy -= py * std::log2(py);
    return std::max(0.0, hxy - hy);
}

/// H_max(X|Y) = max_y log2 |supp p_{X|y}|.
inline double cond_max_entropy(const JointDistribution &p, double cut = 1e-12) {
    std::map<std::uint64_t, std::uint64_t> support;
    for (const auto &a : p.atoms())
        if (a.p > cut) ++support[a.y];
    std::uint64_t best = 0;
    for (const auto &[y, n] : support) best = std::max(best, n);
    return best == 0 ? 0.0 : std::log2(static_cast<double>(best));
}

/// n-fold i.i.d. product, materialized atom by atom. Sequence indices are
/// mixed-radix with the first copy as the most significant digit.
inline JointDistribution product_power(const JointDistribution &p, std::size_t n, const Caps &caps = default_caps()) {
    if (n == 0) throw InvalidArgument("product_power needs n >= 1");
    const std::size_t s = p.atoms().size();
    long double atoms_needed = std::pow(static_cast<long double>(s), static_cast<long double>(n));
    if (atoms_needed > static_cast<long double>(caps.product_atoms))
        throw CapExceeded("product distribution would have " + std::to_string(static_cast<double>(atoms_needed)) +
                          " atoms");
    const long double xs = std::pow(static_cast<long double>(p.x_size()), static_cast<long double>(n));
    const long double ys = std::pow(static_cast<long double>(p.y_size()), static_cast<long double>(n));
    if (xs > 9.0e18L || ys > 9.0e18L) throw CapExceeded("product alphabet does not fit 64-bit indices");

    std::vector<Atom> cur = p.atoms();
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<Atom> next;
        next.reserve(cur.size() * s);
        for (const auto &a : cur)
            for (const auto &b : p.atoms())
                next.push_back({a.x * p.x_size() + b.x, a.y * p.y_size() + b.y, a.p * b.p});
        cur = std::move(next);
    }
    return JointDistribution(static_cast<std::uint64_t>(xs), static_cast<std::uint64_t>(ys), std::move(cur), 1e-9);
}

// ---------------------------------------------------------------------------
// Conditionings V_eps(p) of a plain distribution vector.

struct ClassicalConditioning {
    IndexSet subset;
    RealVector q;
    double distance = 0.0; // l1 distance to p
};

struct ClassicalVEpsilon {
    double epsilon = 0.0;
    bool greedy = false;
    std::vector<ClassicalConditioning> members;
};

inline ClassicalConditioning classical_condition(const RealVector &p, const IndexSet &subset) {
    ClassicalConditioning c;
    c.subset = subset;
    c.q = RealVector::Zero(p.size());
    double w = 0.0;
    for (auto i : subset) w += p(static_cast<Eigen::Index>(i));
    for (auto i : subset) c.q(static_cast<Eigen::Index>(i)) = p(static_cast<Eigen::Index>(i)) / w;
    c.distance = (c.q - p).cwiseAbs().sum();
    return c;
}

/// Exhaustive over nonempty subsets of the support when it has at most
/// caps.v_epsilon_classical atoms; otherwise nested subsets obtained by
/// dropping the lightest atom first (flagged greedy).
inline ClassicalVEpsilon v_epsilon_classical(const RealVector &p, double epsilon, const Caps &caps = default_caps(),
                                             double cut = 1e-12) {
    ClassicalVEpsilon out;
    out.epsilon = epsilon;
    IndexSet support;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > cut) support.push_back(static_cast<std::size_t>(i));
    const std::size_t s = support.size();
    if (s <= caps.v_epsilon_classical) {
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << s); ++mask) {
            IndexSet subset;
            for (std::size_t b = 0; b < s; ++b)
                if (mask >> b & 1U) subset.push_back(support[b]);
            auto c = classical_condition(p, subset);
            if (c.distance <= epsilon + 1e-12) out.members.push_back(std::move(c));
        }
        return out;
    }
    out.greedy = true;
    IndexSet order = support;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p(static_cast<Eigen::Index>(a)) < p(static_cast<Eigen::Index>(b));
    });
    for (std::size_t drop = 0; drop < s; ++drop) {
        IndexSet subset(order.begin() + static_cast<long>(drop), order.end());
        std::sort(subset.begin(), subset.end());
        auto c = classical_condition(p, subset);
        if (c.distance > epsilon + 1e-12) break;
        out.members.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tweaked smoothed max entropy: min of H_max(X|Y)_q over conditionings q of p
// with |q - p|_1 = 2 (1 - P(I)) <= eps.
//
// For a cap K on the fiber support sizes, keeping the K heaviest atoms of each
// fiber y removes the least mass, so the minimum is log2 of the smallest K whose
// top-K conditioning stays within eps. This is exact.

struct TweakedHmax {
    double value = 0.0;          // log2 K
    std::uint64_t cap = 1;       // K
    double removed_mass = 0.0;   // 1 - P(I) at the optimum
};

namespace detail {

/// A fiber described by groups of equal-probability atoms, replicated
/// `copies` times (identical fibers are merged).
struct FiberGroups {
    double copies = 1.0;
    std::vector<std::pair<double, double>> groups; // (atom probability, count), heaviest first
    double total = 0.0;                            // mass of a single copy
    double size = 0.0;                             // atom count of a single copy
};

inline double fiber_removed(const FiberGroups &f, double k) {
    if (k >= f.size) return 0.0;
    double kept = 0.0, left = k;
    for (const auto &[p, c] : f.groups) {
        if (left <= 0.0) break;
        const double take = std::min(left, c);
        kept += take * p;
        left -= take;
    }
    return f.copies * std::max(0.0, f.total - kept);
}

inline TweakedHmax minimal_fiber_cap(const std::vector<FiberGroups> &fibers, double epsilon) {
    const double budget = epsilon / 2.0 + 1e-12;
    double max_size = 1.0;
    for (const auto &f : fibers) max_size = std::max(max_size, f.size);
    auto removed = [&](double k) {
        double r = 0.0;
        for (const auto &f : fibers) r += fiber_removed(f, k);
        return r;
    };
    // removed(K) is nonincreasing in K; find the smallest feasible K.
    double lo = 1.0, hi = max_size;
    if (removed(lo) <= budget) hi = lo;
    while (hi - lo > 0.5) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (mid <= lo) break;
        if (removed(mid) <= budget)
            hi = mid;
        else
            lo = mid;
    }
    TweakedHmax out;
    out.cap = static_cast<std::uint64_t>(hi);
    out.value = std::log2(hi);
    out.removed_mass = removed(hi);
    return out;
}

} // namespace detail

inline TweakedHmax tweaked_hmax(const JointDistribution &p, double epsilon) {
    std::map<std::uint64_t, std::vector<double>> by_fiber;
    for (const auto &a : p.atoms()) by_fiber[a.y].push_back(a.p);
    std::vector<detail::FiberGroups> fibers;
    fibers.reserve(by_fiber.size());
    for (auto &[y, probs] : by_fiber) {
        std::sort(probs.begin(), probs.end(), std::greater<>());
        detail::FiberGroups f;
        for (double q : probs) {
            f.groups.emplace_back(q, 1.0);
            f.total += q;
        }
        f.size = static_cast<double>(probs.size());
        fibers.push_back(std::move(f));
    }
    return detail::minimal_fiber_cap(fibers, epsilon);
}

namespace detail {

/// All compositions of `total` into `parts` nonnegative parts.
inline void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t> &cur,
                         std::vector<std::vector<std::size_t>> &out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t first = 0; first <= total; ++first) {
        cur.push_back(first);
        compositions(total - first, parts - 1, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<std::size_t>> compositions(std::size_t total, std::size_t parts) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    if (parts == 0) return out;
    compositions(total, parts, cur, out);
    return out;
}

inline double log_multinomial(std::size_t n, const std::vector<std::size_t> &counts) {
    double r = std::lgamma(static_cast<double>(n) + 1.0);
    for (auto c : counts) r -= std::lgamma(static_cast<double>(c) + 1.0);
    return r;
}

/// Type-class description of p^n: one entry per y-type; each y-type carries
/// the joint types compatible with it.
struct TypeClassEntry {
    double log_prob = 0.0;       // log of one atom sequence's probability (natural log)
    double log_count = 0.0;      // log of the number of such sequences inside one fiber
    double log2_cond = 0.0;      // log2 p(x^n | y^n)
};

struct YTypeClass {
    double log_fibers = 0.0;                // log of the number of y^n with this type
    std::vector<TypeClassEntry> entries;
};

inline std::vector<YTypeClass> product_type_classes(const JointDistribution &p, std::size_t n) {
    std::map<std::uint64_t, std::vector<double>> atoms_by_y;
    for (const auto &a : p.atoms()) atoms_by_y[a.y].push_back(a.p);
    std::vector<std::vector<double>> groups;
    std::vector<double> py;
    for (auto &[y, probs] : atoms_by_y) {
        groups.push_back(probs);
        py.push_back(std::accumulate(probs.begin(), probs.end(), 0.0));
    }
    const std::size_t ny = groups.size();
    std::vector<YTypeClass> out;
    for (const auto &ytype : compositions(n, ny)) {
        YTypeClass cls;
        cls.log_fibers = log_multinomial(n, ytype);
        // Cartesian product over y of compositions of t_y over that y's atoms.
        std::vector<std::vector<std::vector<std::size_t>>> per_y(ny);
        for (std::size_t y = 0; y < ny; ++y) per_y[y] = compositions(ytype[y], groups[y].size());
        std::vector<std::size_t> idx(ny, 0);
        while (true) {
            TypeClassEntry e;
            for (std::size_t y = 0; y < ny; ++y) {
                const auto &c = per_y[y][idx[y]];
                e.log_count += log_multinomial(ytype[y], c);
                for (std::size_t a = 0; a < c.size(); ++a) {
                    e.log_prob += static_cast<double>(c[a]) * std::log(groups[y][a]);
                    e.log2_cond += static_cast<double>(c[a]) * std::log2(groups[y][a] / py[y]);
                }
            }
            cls.entries.push_back(e);
            std::size_t y = 0;
            while (y < ny && ++idx[y] == per_y[y].size()) idx[y++] = 0;
            if (y == ny) break;
        }
        out.push_back(std::move(cls));
    }
    return out;
}

} // namespace detail

/// Same quantity as tweaked_hmax(product_power(p, n), eps), computed over type
/// classes so that it scales polynomially in n.
inline TweakedHmax tweaked_hmax_product(const JointDistribution &p, std::size_t n, double epsilon) {
    if (n == 0) throw InvalidArgument("tweaked_hmax_product needs n >= 1");
    std::vector<detail::FiberGroups> fibers;
    for (const auto &cls : detail::product_type_classes(p, n)) {
        detail::FiberGroups f;
        f.copies = std::exp(cls.log_fibers);
        for (const auto &e : cls.entries) {
            const double prob = std::exp(e.log_prob);
            const double count = std::round(std::exp(e.log_count));
            f.groups.emplace_back(prob, count);
            f.total += prob * count;
            f.size += count;
        }
        std::sort(f.groups.begin(), f.groups.end(), [](auto &a, auto &b) { return a.first > b.first; });
        fibers.push_back(std::move(f));
    }
    return detail::minimal_fiber_cap(fibers, epsilon);
}

// ---------------------------------------------------------------------------
// Weakly typical sets and the AEP scan.

/// Conditionally typical atoms: |-(1/n) log2 p(x^n|y^n) - H(X|Y)| <= delta.
struct TypicalSet {
    std::size_t n = 1;
    double delta = 0.0;
    double entropy = 0.0; // H(X|Y) of the single-copy distribution

    bool contains(double log2_cond_prob) const {
        return std::abs(-log2_cond_prob / static_cast<double>(n) - entropy) <= delta + 1e-12;
    }

    /// Members of a materialized product distribution (indices into atoms()).
    std::vector<std::size_t> members(const JointDistribution &pn) const {
        const auto ym = pn.y_marginal();
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < pn.atoms().size(); ++i) {
            const auto &a = pn.atoms()[i];
            if (contains(std::log2(a.p / ym.at(a.y)))) out.push_back(i);
        }
        return out;
    }
};

/// Smallest delta whose typical set carries at least 1 - eps/2 of the mass.
inline TypicalSet minimal_typical_set(const JointDistribution &p, std::size_t n, double epsilon) {
    const double h = cond_entropy(p);
    std::vector<std::pair<double, double>> dev_mass; // (deviation, mass)
    for (const auto &cls : detail::product_type_classes(p, n))
        for (const auto &e : cls.entries)
            dev_mass.emplace_back(std::abs(-e.log2_cond / static_cast<double>(n) - h),
                                  std::exp(cls.log_fibers + e.log_count + e.log_prob));
    std::sort(dev_mass.begin(), dev_mass.end());
    double acc = 0.0;
    TypicalSet t{n, 0.0, h};
    for (const auto &[dev, mass] : dev_mass) {
        acc += mass;
        t.delta = dev;
        if (acc >= 1.0 - epsilon / 2.0 - 1e-12) break;
    }
    return t;
}

struct AepPoint {
    std::size_t n = 0;
    double value = 0.0;        // (1/n) tweaked H_max^eps(X^n|Y^n)
    double upper_curve = 0.0;  // H(X|Y) + delta_n from the minimal typical set
    double delta = 0.0;
    bool enumerated = false;   // true: materialized atoms; false: type classes
};

inline std::vector<AepPoint> aep_scan(const JointDistribution &p, double epsilon, std::size_t n_max,
                                      const Caps &caps = default_caps()) {
    std::vector<AepPoint> out;
    const double s = static_cast<double>(p.atoms().size());
    for (std::size_t n = 1; n <= n_max; ++n) {
        AepPoint pt;
        pt.n = n;
        TweakedHmax th;
        if (std::pow(s, static_cast<double>(n)) <= static_cast<double>(caps.product_atoms)) {
            th = tweaked_hmax(product_power(p, n, caps), epsilon);
            pt.enumerated = true;
        } else {
            th = tweaked_hmax_product(p, n, epsilon);
        }
        pt.value = th.value / static_cast<double>(n);
        const auto typical = minimal_typical_set(p, n, epsilon);
        pt.delta = typical.delta;
        pt.upper_curve = typical.entropy + typical.delta;
        out.push_back(pt);
    }
    return out;
}

} // namespace coherence
