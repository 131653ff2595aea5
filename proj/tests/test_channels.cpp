#include "common.hpp"

using namespace coherence;
using namespace fixtures;

TEST(Sio, Examples) {
    const auto rho = rho1();
    EXPECT_EQ(apply_sio(SioKraus::identity(3), rho).matrix(), rho.matrix());
    EXPECT_LE((apply_sio(SioKraus::full_dephasing(3), rho).matrix() - dephase(rho).matrix()).norm(), 1e-15);
    const auto swapped = apply_sio(SioKraus::permutation({2, 1, 0}), rho);
    EXPECT_DOUBLE_EQ(swapped(0, 0).real(), 0.5);
    EXPECT_DOUBLE_EQ(swapped(1, 2).real(), 0.25);
    EXPECT_DOUBLE_EQ(swapped(0, 1).real(), 0.0);
    EXPECT_THROW(SioKraus(2, {{{0, 1}, Vector::Constant(2, 0.5)}}), InvalidArgument);
    EXPECT_THROW(SioKraus::permutation({0, 0}), InvalidArgument);
}

TEST(Sio, RandomChannels) {
    const auto one = random_sio(4, 1, 3);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(one.terms()[0].diag(i)), 1.0, 1e-12);
    const auto a = random_sio(4, 3, 9), b = random_sio(4, 3, 9);
    for (std::size_t t = 0; t < 3; ++t) {
        EXPECT_EQ(a.terms()[t].perm, b.terms()[t].perm);
        EXPECT_EQ(a.terms()[t].diag, b.terms()[t].diag);
    }
    const auto out = apply_sio(a, diag({0.1, 0.2, 0.3, 0.4}));
    EXPECT_LE((out.matrix() - dephase(out).matrix()).norm(), 1e-15);
    EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
}

TEST(Pio, CliqueInstrument) {
    const auto part = clique_partition(rho1());
    const auto out = pio_instrument(clique_instrument(part, 3), rho1());
    ASSERT_EQ(out.size(), 2u);
    EXPECT_NEAR(out[0].probability, 0.5, 1e-15);
    EXPECT_NEAR(out[1].probability, 0.5, 1e-15);
    EXPECT_LE((out[0].state->matrix().topLeftCorner(2, 2) - Matrix::Constant(2, 2, 0.5)).norm(), 1e-15);
    EXPECT_NEAR(out[1].state->matrix()(2, 2).real(), 1.0, 1e-15);

    const auto unsupported = diag({0.5, 0.0, 0.5});
    const auto e = clique_instrument(clique_partition(unsupported), 3);
    const auto o = pio_instrument(e, unsupported);
    EXPECT_EQ(o.size(), 3u);
    bool empty = false;
    for (const auto &x : o) empty = empty || !x.state;
    EXPECT_TRUE(empty);
}

TEST(Pio, ExpansionAgrees) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ch = random_pio(4, 3, seed);
        CounterRng rng(seed, 7);
        const auto rho = random_hilbert_schmidt(4, rng);
        EXPECT_LE((apply_pio(ch, rho).matrix() - apply_sio(ch.expand_to_sio(), rho).matrix()).norm(), 1e-12);
    }
    PioElementary bad;
    bad.branches.push_back({{0, 1, 2}, {}, {0, 1}});
    EXPECT_THROW(PioChannel(3, {bad}), InvalidArgument);
}

TEST(Channels, JsonRoundTrip) {
    const auto s = random_sio(3, 2, 4);
    const auto s2 = sio_from_json(nlohmann::json::parse(channel_to_json(s).dump()));
    for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(s.terms()[t].diag, s2.terms()[t].diag);
    const auto p = random_pio(3, 2, 4);
    const auto p2 = pio_from_json(nlohmann::json::parse(channel_to_json(p).dump()));
    EXPECT_EQ(apply_pio(p, rho1()).matrix(), apply_pio(p2, rho1()).matrix());
    EXPECT_THROW(sio_from_json(channel_to_json(p)), InvalidArgument);
    EXPECT_THROW(pio_from_json(nlohmann::json{{"kind", "pio"}}), InvalidArgument);
}
