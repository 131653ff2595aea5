#pragma once

// Dense two-phase simplex for min c'x subject to Ax = b, x >= 0.
// Sized for the few-dozen-row programs of the formation optimizer.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace coherence {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd duals; // y with c - A'y >= 0 at optimality
    std::size_t iterations = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(const Eigen::MatrixXd &a, const Eigen::VectorXd &b) : m_(a.rows()), n_(a.cols()) {
        t_ = Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1);
        sign_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            sign_(i) = b(i) < 0.0 ? -1.0 : 1.0;
            t_.row(i).head(n_) = sign_(i) * a.row(i);
            t_(i, n_ + i) = 1.0;
            t_(i, rhs()) = sign_(i) * b(i);
        }
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
        original_ = t_.topRows(m_);
    }

    /// Rebuilds B^{-1} [A | I | b] and the cost row from the original data,
    /// discarding the rounding drift of incremental pivots.
    void refactor() {
        Eigen::MatrixXd b(m_, m_);
        for (Eigen::Index i = 0; i < m_; ++i) b.col(i) = original_.col(basis_[static_cast<std::size_t>(i)]);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
        t_.topRows(m_) = lu.solve(original_);
        set_costs(cost_);
    }

    Eigen::Index rhs() const { return n_ + m_; }

    void set_costs(const Eigen::VectorXd &c_full) {
        cost_ = c_full;
        t_.row(m_).setZero();
        t_.row(m_).head(n_ + m_) = c_full.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = c_full(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
        }
    }

    /// Pivots over entering columns [0, allowed).
    LpStatus run(Eigen::Index allowed, std::size_t max_iter, std::size_t &iterations, double tol) {
        std::size_t degenerate = 0, since_refactor = 0;
        bool fresh = false;
        while (iterations < max_iter) {
            if (++since_refactor > 100) {
                refactor();
                since_refactor = 0;
            }
            const bool bland = degenerate > 50;
            Eigen::Index enter = -1;
            double best = -tol;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                const double rc = t_(m_, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) {
                if (fresh) return LpStatus::optimal;
                refactor();
                since_refactor = 0;
                fresh = true;
                continue;
            }
            fresh = false;
            // Harris two-pass ratio test: bound the step with a small feasibility
            // relaxation, then take the largest pivot element within it.
            constexpr double kPivot = 1e-9, kRelax = 1e-12;
            double bound = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = t_(i, enter);
                if (a > kPivot) bound = std::min(bound, (std::max(0.0, t_(i, rhs())) + kRelax) / a);
            }
            Eigen::Index leave = -1;
            double ratio = 0.0;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = t_(i, enter);
                if (a <= kPivot) continue;
                const double r = std::max(0.0, t_(i, rhs())) / a;
                if (r > bound) continue;
                const bool better = leave < 0 ||
                                    (bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                           : a > t_(leave, enter));
                if (better) {
                    leave = i;
                    ratio = r;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            degenerate = ratio < 1e-14 ? degenerate + 1 : 0;
            pivot(leave, enter);
            ++iterations;
        }
        return LpStatus::iteration_limit;
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    /// Pivots artificial variables out of the basis where a structural column allows it.
    void expel_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            for (Eigen::Index j = 0; j < n_; ++j)
                if (std::abs(t_(i, j)) > 1e-9) {
                    pivot(i, j);
                    break;
                }
        }
    }

    double objective() const { return -t_(m_, rhs()); }

    Eigen::VectorXd solution() const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) x(j) = std::max(0.0, t_(i, rhs()));
        }
        return x;
    }

    Eigen::VectorXd duals() const {
        // B^{-1} sits in the artificial block; undo the row sign flips.
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = cost_(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) y += cb * t_.row(i).segment(n_, m_).transpose();
        }
        return y.cwiseProduct(sign_);
    }

private:
    Eigen::Index m_, n_;
    Eigen::MatrixXd t_, original_;
    Eigen::VectorXd sign_, cost_;
    std::vector<Eigen::Index> basis_;
};

} // namespace detail

inline LpResult solve_lp(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, const Eigen::VectorXd &c,
                         std::size_t max_iter = 100000, double tol = 1e-10) {
    const Eigen::Index m = a.rows(), n = a.cols();
    LpResult out;
    detail::Tableau t(a, b);

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
    phase1.tail(m).setOnes();
    t.set_costs(phase1);
    LpStatus s = t.run(n, max_iter, out.iterations, tol);
    if (s == LpStatus::iteration_limit) {
        out.status = s;
        return out;
    }
    const double scale = std::max(1.0, b.cwiseAbs().sum());
    if (t.objective() > 1e-9 * scale) {
        out.status = LpStatus::infeasible;
        return out;
    }
    t.expel_artificials();

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = c;
    t.set_costs(phase2);
    out.status = t.run(n, max_iter, out.iterations, tol);
    out.x = t.solution();
    out.objective = c.dot(out.x);
    out.duals = t.duals();
    return out;
}

} // namespace coherence
