#include "common.hpp"

using namespace coherence;
using namespace fixtures;

TEST(ComparisonMatrix, Examples) {
    const auto r4 = comparison_matrix(psi(4));
    EXPECT_NEAR((r4.entries - Matrix::Ones(4, 4)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    const auto rd = comparison_matrix(diag({0.3, 0.7}));
    EXPECT_EQ(rd.entries, Matrix::Identity(2, 2));
    const auto r0 = comparison_matrix(rho0());
    EXPECT_NEAR(r0.modulus(0, 1), 0.4 / std::sqrt(2.0 / 9.0), 1e-15);
    EXPECT_NEAR(r0.modulus(0, 1), 0.84853, 1e-5);
}

TEST(ComparisonMatrix, UnsupportedRowsAreZero) {
    const auto r = comparison_matrix(diag({0.5, 0.0, 0.5}));
    EXPECT_FALSE(r.support[1]);
    EXPECT_EQ(r.entries.row(1).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(r.supported_indices(), (IndexSet{0, 2}));
}

TEST(Cliques, Examples) {
    EXPECT_EQ(clique_partition(rho0()).blocks, (std::vector<IndexSet>{{0}, {1}}));
    const auto p1 = clique_partition(rho1());
    EXPECT_EQ(p1.blocks, (std::vector<IndexSet>{{0, 1}, {2}}));
    EXPECT_NEAR(p1.block_weights[0], 0.5, 1e-15);
    EXPECT_EQ(clique_partition(psi(5)).blocks.size(), 1u);
}

TEST(Cliques, MisclassificationIsDetected) {
    // |R_01| = 0.9 passes a loose threshold but the block is impure.
    Matrix m(2, 2);
    m << 0.5, 0.45, 0.45, 0.5;
    Tolerances loose;
    loose.tol_edge = 0.5;
    EXPECT_THROW(clique_partition(DensityMatrix(m), loose), StructuralInconsistency);
    EXPECT_NO_THROW(clique_partition(DensityMatrix(m)));
}

TEST(Trimmed, Examples) {
    const auto t0 = trimmed_state(rho0(), clique_partition(rho0()));
    EXPECT_EQ(t0.matrix(), dephase(rho0()).matrix());
    const auto t1 = trimmed_state(rho1(), clique_partition(rho1()));
    EXPECT_EQ(t1.matrix(), rho1().matrix());
    const auto d = diag({0.2, 0.3, 0.5});
    EXPECT_EQ(trimmed_state(d, clique_partition(d)).matrix(), d.matrix());
}

TEST(Trimmed, EqualsRhoIffLambdaZero) {
    CounterRng rng(3, 0);
    for (int t = 0; t < 30; ++t) {
        const auto rho = random_state(t % 2 ? Ensemble::hilbert_schmidt : Ensemble::block_structured, 4, rng);
        const auto s = analyze_structure(rho);
        const bool same = (trimmed_state(rho, s.partition).matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0;
        EXPECT_EQ(same, s.lambda == 0.0);
    }
}

TEST(Measures, QuintessentialExamples) {
    EXPECT_EQ(quintessential_coherence(rho0()), 0.0);
    const double s_delta = oracle::entropy_bits({0.25, 0.25, 0.5});
    const double s_bar = oracle::entropy_bits({0.5, 0.5});
    EXPECT_NEAR(quintessential_coherence(rho1()), s_delta - s_bar, 1e-12);
    EXPECT_NEAR(quintessential_coherence(rho1()), 0.5, 1e-12);
    EXPECT_NEAR(quintessential_coherence(psi(3)), std::log2(3.0), 1e-12);
}

TEST(Measures, RelativeEntropyExamples) {
    EXPECT_NEAR(relative_entropy_of_coherence(diag({0.1, 0.9})), 0.0, 1e-12);
    EXPECT_NEAR(relative_entropy_of_coherence(psi(4)), 2.0, 1e-12);
    const auto [lo, hi] = oracle::eig2(2.0 / 3.0, 0.4, 1.0 / 3.0);
    const double expect = oracle::entropy_bits({2.0 / 3.0, 1.0 / 3.0}) - oracle::entropy_bits({lo, hi});
    EXPECT_NEAR(relative_entropy_of_coherence(rho0()), expect, 1e-12);
    EXPECT_NEAR(relative_entropy_of_coherence(rho0()), 0.56494, 1e-4);
    const auto phi = PureState::normalized((Vector(3) << 1.0, 2.0, Complex(0.0, 2.0)).finished());
    EXPECT_NEAR(entropy_of_coherence(phi), oracle::entropy_bits({1.0 / 9, 4.0 / 9, 4.0 / 9}), 1e-12);
}

TEST(Measures, LambdaEtaAndL) {
    const auto s0 = analyze_structure(rho0());
    EXPECT_NEAR(s0.lambda, 0.4 / std::sqrt(2.0 / 9.0), 1e-15);
    EXPECT_EQ(s0.lambda, s0.eta);
    EXPECT_EQ(s0.l, 1u);
    const auto s1 = analyze_structure(rho1());
    EXPECT_EQ(s1.lambda, 0.0);
    EXPECT_NEAR(s1.eta, 1.0, 1e-15);
    EXPECT_EQ(s1.l, 2u);
    const auto sd = analyze_structure(diag({0.5, 0.5}));
    EXPECT_EQ(sd.lambda, 0.0);
    EXPECT_EQ(sd.eta, 0.0);
    EXPECT_EQ(analyze_structure(psi(5)).l, 5u);
}

TEST(Measures, InvariantsOnRandomStates) {
    CounterRng rng(11, 0);
    for (int t = 0; t < 100; ++t) {
        const auto rho = random_state(static_cast<Ensemble>(t % 4), 2 + rng.below(4), rng);
        const auto s = analyze_structure(rho);
        EXPECT_LE(0.0, s.lambda);
        EXPECT_LE(s.lambda, s.eta);
        EXPECT_LE(s.eta, 1.0);
        EXPECT_LT(s.lambda, 1.0);
        EXPECT_EQ(s.l, s.partition.max_block_size());
        EXPECT_GE(s.Q, -1e-12);
        EXPECT_LE(s.Q, std::log2(static_cast<double>(rho.dim())) + 1e-12);
        if (s.partition.max_block_size() == 1) EXPECT_EQ(s.Q, 0.0);
    }
}

TEST(Measures, HilbertSchmidtStatesAreBound) {
    CounterRng rng(12, 0);
    for (int t = 0; t < 50; ++t) EXPECT_EQ(quintessential_coherence(random_hilbert_schmidt(3, rng)), 0.0);
}
