#include "common.hpp"

using namespace coherence;
using namespace fixtures;

TEST(DensityMatrix, RejectsEachBrokenInvariant) {
    Matrix m(2, 2);
    m << 0.5, 0.1, 0.2, 0.5;
    try {
        DensityMatrix bad(m);
        FAIL();
    } catch (const InvalidState &e) {
        EXPECT_EQ(e.invariant(), "hermitian");
    }
    m << 0.6, 0.0, 0.0, 0.6;
    EXPECT_THROW(DensityMatrix{m}, InvalidState);
    m << 1.2, 0.0, 0.0, -0.2;
    try {
        DensityMatrix bad(m);
        FAIL();
    } catch (const InvalidState &e) {
        EXPECT_EQ(e.invariant(), "positivity");
    }
    m << 0.5, 0.6, 0.6, 0.5;
    EXPECT_THROW(DensityMatrix{m}, InvalidState);
}

TEST(DensityMatrix, SymmetrizesRoundOff) {
    Matrix m(2, 2);
    m << 0.5, Complex(0.25, 1e-12), Complex(0.25, 0.0), 0.5;
    const DensityMatrix rho(m);
    EXPECT_EQ(rho.matrix(), rho.matrix().adjoint());
}

TEST(PureState, UniformPredicateAndSupport) {
    const auto u = PureState::uniform(4, {0, 2}, std::vector<double>{0.0, 1.0});
    EXPECT_TRUE(u.is_uniformly_coherent());
    EXPECT_EQ(u.support(), (IndexSet{0, 2}));
    Vector v(2);
    v << 0.8, 0.6;
    EXPECT_FALSE(PureState(v).is_uniformly_coherent());
    EXPECT_THROW(PureState(Vector::Ones(2)), InvalidState);
}

TEST(Dephase, Examples) {
    const auto d = dephase(rho0());
    EXPECT_DOUBLE_EQ(d(0, 0).real(), 2.0 / 3.0);
    EXPECT_EQ(d(0, 1), Complex(0.0));
    const auto p2 = dephase(psi(2));
    EXPECT_NEAR(p2(0, 0).real(), 0.5, 1e-15);
    EXPECT_EQ(p2(1, 0), Complex(0.0));
    const auto fixed = diag({0.3, 0.7});
    EXPECT_EQ(dephase(fixed).matrix(), fixed.matrix());
}

TEST(Entropy, Examples) {
    EXPECT_NEAR(von_neumann_entropy(psi(3)), 0.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(5)), std::log2(5.0), 1e-12);
    const auto [lo, hi] = oracle::eig2(2.0 / 3.0, 0.4, 1.0 / 3.0);
    const double expect = oracle::entropy_bits({lo, hi});
    EXPECT_NEAR(von_neumann_entropy(rho0()), expect, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(rho0()), 0.35336, 1e-4);
}

TEST(TraceDistance, Examples) {
    EXPECT_NEAR(trace_distance(rho0(), rho0()), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance(diag({1.0, 0.0}), diag({0.0, 1.0})), 2.0, 1e-15);
    EXPECT_NEAR(trace_distance(psi(2), diag({0.5, 0.5})), 1.0, 1e-12);
    EXPECT_THROW(trace_distance(psi(2), psi(3)), DimensionMismatch);
}

TEST(TraceDistance, SymmetricAndTriangle) {
    CounterRng rng(5, 0);
    for (int t = 0; t < 50; ++t) {
        const auto a = random_hilbert_schmidt(3, rng), b = random_hilbert_schmidt(3, rng), c = random_hilbert_schmidt(3, rng);
        EXPECT_NEAR(trace_distance(a, b), trace_distance(b, a), 1e-12);
        EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-12);
        EXPECT_NEAR(trace_distance(a, b), oracle::trace_norm(a.matrix() - b.matrix()), 1e-12);
    }
}

TEST(Tensor, Examples) {
    const auto t = tensor(diag({1.0, 0.0}), rho0());
    EXPECT_EQ(t.matrix().topLeftCorner(2, 2), rho0().matrix());
    EXPECT_EQ(t.matrix().bottomRightCorner(2, 2), Matrix::Zero(2, 2));
    const auto pp = tensor(psi(2), psi(2));
    EXPECT_NEAR((pp.matrix() - Matrix::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    const auto r = tensor(rho0(), rho0());
    EXPECT_NEAR(std::abs(r(0, 3) - Complex(0.16)), 0.0, 1e-15);
    EXPECT_NEAR((r.matrix() - oracle::kron(rho0().matrix(), rho0().matrix())).cwiseAbs().maxCoeff(), 0.0, 0.0);
    Caps small;
    small.max_dim = 8;
    EXPECT_THROW(tensor_power(rho0(), 4, small), CapExceeded);
    EXPECT_EQ(tensor_power(rho0(), 3, small).dim(), 8u);
}

TEST(Overlap, Examples) {
    const auto u = PureState::uniform(3, {0, 1, 2}, std::vector<double>{0.0, 0.4, 2.0});
    EXPECT_NEAR(overlap_with_pure(DensityMatrix::from_pure(u), u), 1.0, 1e-12);
    EXPECT_NEAR(overlap_with_pure(DensityMatrix::maximally_mixed(3), u), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(overlap_with_pure(psi(2), PureState::uniform(2, {0})), 0.5, 1e-12);
    EXPECT_THROW(overlap_with_pure(psi(2), u), DimensionMismatch);
}

TEST(PartialTrace, Examples) {
    const auto a = rho0();
    const auto b = rho1();
    const auto ab = tensor(a, b);
    EXPECT_NEAR((partial_trace(ab, 2, 3, Subsystem::A).matrix() - a.matrix()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR((partial_trace(ab, 2, 3, Subsystem::B).matrix() - b.matrix()).cwiseAbs().maxCoeff(), 0.0, 1e-15);

    const auto w = DensityMatrix::from_pure(PureState::uniform(4, {0, 1, 2}));
    Matrix expect(2, 2);
    expect << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
    EXPECT_NEAR((partial_trace(w, 2, 2, Subsystem::A).matrix() - expect).cwiseAbs().maxCoeff(), 0.0, 1e-15);

    const auto bell = DensityMatrix::from_pure(PureState::uniform(4, {0, 3}));
    EXPECT_NEAR((partial_trace(bell, 2, 2, Subsystem::A).matrix() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(),
                0.0, 1e-15);
    EXPECT_THROW(partial_trace(bell, 3, 2, Subsystem::A), DimensionMismatch);
}

TEST(StateIo, RoundTripAndValidation) {
    CounterRng rng(9, 0);
    const auto rho = random_hilbert_schmidt(4, rng);
    const auto back = state_from_json(json::parse(state_to_json(rho).dump()));
    EXPECT_EQ(back.matrix(), rho.matrix());
    EXPECT_THROW(state_from_json(json::parse(R"({"dim":1,"re":[[1]],"extra":0})")), InvalidState);
    EXPECT_THROW(state_from_json(json::parse(R"({"dim":2,"re":[[1,0]]})")), InvalidState);
    try {
        state_from_json(json::parse(R"({"dim":2,"re":[[0.7,0],[0,0.7]]})"));
        FAIL();
    } catch (const InvalidState &e) {
        EXPECT_EQ(e.invariant(), "trace");
    }
    EXPECT_NO_THROW(state_from_json(json::parse(R"({"dim":2,"re":[[0.5,0],[0,0.5]]})")));
}
