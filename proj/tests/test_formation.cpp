#include "common.hpp"

using namespace coherence;
using namespace fixtures;

TEST(Lp, SmallProblems) {
    // min x0 + 2 x1 s.t. x0 + x1 = 1, x >= 0.
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    Eigen::VectorXd b(1), c(2);
    b << 1;
    c << 1, 2;
    auto r = solve_lp(a, b, c);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, 1.0, 1e-12);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
    EXPECT_NEAR(r.duals(0), 1.0, 1e-12);

    // Infeasible: x0 = -1.
    Eigen::MatrixXd a2(1, 1);
    a2 << 1;
    Eigen::VectorXd b2(1), c2(1);
    b2 << -1;
    c2 << 1;
    EXPECT_EQ(solve_lp(a2, b2, c2).status, LpStatus::infeasible);

    // Degenerate, redundant rows.
    Eigen::MatrixXd a3(3, 3);
    a3 << 1, 1, 0, 0, 1, 1, 1, 2, 1;
    Eigen::VectorXd b3(3), c3(3);
    b3 << 1, 1, 2;
    c3 << 3, 1, 3;
    const auto r3 = solve_lp(a3, b3, c3);
    ASSERT_EQ(r3.status, LpStatus::optimal);
    EXPECT_NEAR(r3.objective, 1.0, 1e-10);
    EXPECT_LE((a3 * r3.x - b3).norm(), 1e-10);
    EXPECT_GE((c3 - a3.transpose() * r3.duals).minCoeff(), -1e-10);
    EXPECT_NEAR(b3.dot(r3.duals), r3.objective, 1e-10);
}

TEST(Cfu, QubitClosedForm) {
    EXPECT_NEAR(cfu_qubit(qubit(0.5, 0.25)), 0.5, 1e-15);
    EXPECT_TRUE(std::isinf(cfu_qubit(qubit(0.9, 0.2))));
    const auto r = cfu_optimize(qubit(0.5, 0.25));
    EXPECT_EQ(r.status, CfuStatus::exact);
    EXPECT_NEAR(r.upper_bound, 0.5, 1e-9);
    ASSERT_TRUE(r.witness);
    EXPECT_LE(r.witness->residual, 1e-9);

    // Marginal of (|00> + |01> + |10>)/sqrt3: |z| = 1/3 = min(p, 1 - p).
    const auto w = partial_trace(DensityMatrix::from_pure(PureState::uniform(4, {0, 1, 2})), 2, 2, Subsystem::A);
    EXPECT_NEAR(cfu_qubit(w), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(cfu_optimize(w).upper_bound, 2.0 / 3.0, 1e-9);
}

TEST(Cfu, OutsideCoU) {
    const auto r = cfu_optimize(rho0());
    EXPECT_EQ(r.status, CfuStatus::infinite);
    EXPECT_TRUE(std::isinf(r.lower_bound));
    EXPECT_FALSE(co_u_necessary_test(rho0()));
    EXPECT_TRUE(co_u_necessary_test(rho1()));
}

TEST(Cfu, DiagonallyDominantExample) {
    Matrix m = Matrix::Constant(3, 3, 0.1);
    m.diagonal().setConstant(1.0 / 3.0);
    const DensityMatrix rho(m);
    const auto dec = diagonally_dominant_decomposition(rho);
    ASSERT_TRUE(dec);
    EXPECT_LE(dec->residual, 1e-12);
    double pairs = 0.0, singles = 0.0;
    for (const auto &t : dec->terms) {
        if (t.support.size() == 2) {
            EXPECT_NEAR(t.weight, 0.2, 1e-15);
            pairs += t.weight;
        } else {
            EXPECT_NEAR(t.weight, 2.0 / 15.0, 1e-15);
            singles += t.weight;
        }
    }
    EXPECT_NEAR(pairs + singles, 1.0, 1e-12);
    EXPECT_NEAR(dec->cost(), 0.6, 1e-12);
    EXPECT_NEAR(cfu_lower_bound(rho), 0.2, 1e-15);
    const auto r = cfu_optimize(rho);
    EXPECT_LE(r.upper_bound, 0.6 + 1e-9);
    EXPECT_GE(r.upper_bound, r.lower_bound - 1e-9);
    EXPECT_FALSE(diagonally_dominant_decomposition(psi(3)));
}

TEST(Cfu, MaximallyCoherent) {
    for (std::size_t k : {3u, 4u, 5u}) {
        const auto r = cfu_optimize(psi(k));
        EXPECT_EQ(r.status, CfuStatus::exact) << k;
        EXPECT_NEAR(r.upper_bound, std::log2(static_cast<double>(k)), 1e-6);
        EXPECT_NEAR(cfu_lower_bound(psi(k)), 2.0 / static_cast<double>(k), 1e-15);
    }
}

TEST(Cfu, DiagonalIsFree) {
    const auto r = cfu_optimize(diag({0.2, 0.3, 0.5}));
    EXPECT_NEAR(r.upper_bound, 0.0, 1e-12);
    EXPECT_NEAR(r.lower_bound, 0.0, 1e-12);
}

TEST(Cfu, Transforms) {
    // Product of decompositions reconstructs the tensor product.
    const auto a = cfu_optimize(qubit(0.5, 0.25)).witness.value();
    const auto b = cfu_optimize(psi(3)).witness.value();
    const auto ab = product_decomposition(a, b);
    const auto t = tensor(qubit(0.5, 0.25), psi(3));
    EXPECT_LE(ab.residual_against(t), 1e-8);
    EXPECT_NEAR(ab.cost(), a.cost() + b.cost(), 1e-12);

    // Push-forward through a PIO decomposes the image.
    const auto ch = random_pio(3, 3, 5);
    const auto pf = push_forward(b, ch);
    EXPECT_LE(pf.residual_against(apply_pio(ch, psi(3))), 1e-8);
    EXPECT_NEAR(pf.total_weight(), 1.0, 1e-12);
}

TEST(UniformForm, PhaseSearchAgainstGrid) {
    CounterRng rng(41, 0);
    for (int t = 0; t < 4; ++t) {
        const Matrix m = random_hilbert_schmidt(3, rng).matrix() - Matrix::Identity(3, 3) * 0.3;
        const IndexSet s{0, 1, 2};
        const double grid = oracle::uniform_form_grid3(m) / 3.0;
        const auto [value, ph] = detail::maximize_phases(m, s, detail::eigen_phases(m, s));
        EXPECT_GE(value, grid - 1e-4);
        EXPECT_GE(detail::uniform_form_certificate(m, s), grid - 1e-12);
        EXPECT_GE(detail::uniform_form_bound(m, s), grid - 1e-12);
    }
}

TEST(Cf, Estimates) {
    const PureState u = PureState::normalized((Vector(3) << 0.6, Complex(0.0, 0.48), 0.64).finished());
    std::vector<double> probs;
    for (Eigen::Index i = 0; i < 3; ++i) probs.push_back(std::norm(u.amplitudes()(i)));
    EXPECT_NEAR(cf_estimate(DensityMatrix::from_pure(u)).value, oracle::entropy_bits(probs), 1e-9);
    EXPECT_NEAR(cf_estimate(diag({0.2, 0.3, 0.5})).value, 0.0, 1e-9);
    EXPECT_NEAR(cf_estimate(rho1()).value, quintessential_coherence(rho1()), 2e-3);
    EXPECT_GE(cf_estimate(rho0()).value, relative_entropy_of_coherence(rho0()) - 1e-9);
}
