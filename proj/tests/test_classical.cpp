#include "common.hpp"

using namespace coherence;
using namespace fixtures;

namespace {

std::vector<oracle::Atom> to_oracle(const JointDistribution &p) {
    std::vector<oracle::Atom> out;
    for (const auto &a : p.atoms()) out.push_back({a.x, a.y, a.p});
    return out;
}

} // namespace

TEST(Joint, FromStateExamples) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    EXPECT_DOUBLE_EQ(j.prob(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(j.prob(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(j.prob(2, 1), 0.5);
    EXPECT_EQ(j.atoms().size(), 3u);
    const auto g = joint_from_state(diag({0.2, 0.3, 0.5}), clique_partition(diag({0.2, 0.3, 0.5})));
    for (const auto &a : g.atoms()) EXPECT_EQ(a.x, a.y);
    const auto u = joint_from_state(psi(4), clique_partition(psi(4)));
    for (const auto &a : u.atoms()) {
        EXPECT_EQ(a.y, 0u);
        EXPECT_NEAR(a.p, 0.25, 1e-15);
    }
    EXPECT_THROW(JointDistribution(2, 1, {{0, 0, 0.5}, {1, 0, 0.4}}), InvalidArgument);
}

TEST(Joint, ConditionalEntropies) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    EXPECT_NEAR(cond_entropy(j), 0.5, 1e-12);
    EXPECT_EQ(cond_max_entropy(j), 1.0);
    Eigen::MatrixXd m(2, 3);
    m << 0.1, 0.2, 0.2, 0.1, 0.2, 0.2;
    const auto indep = JointDistribution::from_matrix(m);
    EXPECT_NEAR(cond_entropy(indep), 1.0, 1e-12);
    EXPECT_EQ(cond_max_entropy(indep), 1.0);
    Eigen::MatrixXd f(3, 3);
    f << 0.2, 0, 0, 0, 0.3, 0, 0, 0, 0.5;
    const auto det = JointDistribution::from_matrix(f);
    EXPECT_NEAR(cond_entropy(det), 0.0, 1e-12);
    EXPECT_EQ(cond_max_entropy(det), 0.0);
}

TEST(ClassicalVEpsilon, Examples) {
    RealVector p(3);
    p << 0.5, 0.25, 0.25;
    EXPECT_EQ(v_epsilon_classical(p, 1e-3).members.size(), 1u);
    const auto v = v_epsilon_classical(p, 0.6);
    bool found = false;
    for (const auto &m : v.members)
        if (m.subset == IndexSet{0, 1}) {
            found = true;
            // Oracle: q = (2/3, 1/3, 0), |q - p|_1 = 1/6 + 1/12 + 1/4.
            EXPECT_NEAR(m.distance, 0.5, 1e-12);
        }
    EXPECT_TRUE(found);
    EXPECT_EQ(v_epsilon_classical(p, 2.0).members.size(), 7u);
    Caps caps;
    caps.v_epsilon_classical = 2;
    const auto g = v_epsilon_classical(p, 1.0, caps);
    EXPECT_TRUE(g.greedy);
    for (const auto &m : g.members) EXPECT_LE(m.distance, 1.0 + 1e-12);
}

TEST(TweakedHmax, Examples) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    EXPECT_EQ(tweaked_hmax(j, 1e-6).value, cond_max_entropy(j));
    EXPECT_EQ(tweaked_hmax(j, 1.1).value, 0.0);
    Eigen::MatrixXd f(2, 2);
    f << 0.4, 0, 0, 0.6;
    EXPECT_EQ(tweaked_hmax(JointDistribution::from_matrix(f), 0.3).value, 0.0);
}

TEST(TweakedHmax, MatchesSubsetEnumeration) {
    CounterRng rng(31, 0);
    for (int t = 0; t < 40; ++t) {
        const auto rho = random_state(Ensemble::block_structured, 2 + rng.below(3), rng);
        const auto j = joint_from_state(rho, clique_partition(rho));
        const double eps = rng.uniform(0.0, 1.5);
        EXPECT_EQ(tweaked_hmax(j, eps).value, oracle::tweaked_hmax_bruteforce(to_oracle(j), eps));
        const auto j2 = product_power(j, 2);
        if (j2.atoms().size() <= 16) {
            EXPECT_EQ(tweaked_hmax(j2, eps).value, oracle::tweaked_hmax_bruteforce(to_oracle(j2), eps));
            EXPECT_EQ(tweaked_hmax_product(j, 2, eps).value, tweaked_hmax(j2, eps).value);
        }
    }
}

TEST(TweakedHmax, TypeClassRouteMatchesMaterialized) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    for (std::size_t n = 1; n <= 8; ++n)
        for (double eps : {0.05, 0.2, 0.7, 1.3}) {
            EXPECT_EQ(tweaked_hmax_product(j, n, eps).value, tweaked_hmax(product_power(j, n), eps).value)
                << "n = " << n << ", eps = " << eps;
        }
}

TEST(ProductPower, MatchesOracleAndCap) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    const auto j3 = product_power(j, 3);
    const auto o3 = oracle::product(to_oracle(j), 3, j.x_size(), j.y_size());
    EXPECT_EQ(j3.atoms().size(), o3.size());
    for (const auto &a : o3) EXPECT_NEAR(j3.prob(a.x, a.y), a.p, 1e-15);
    EXPECT_NEAR(cond_entropy(j3), 1.5, 1e-12);
    Caps caps;
    caps.product_atoms = 10;
    EXPECT_THROW(product_power(j, 3, caps), CapExceeded);
}

TEST(Aep, Examples) {
    Eigen::MatrixXd f(3, 3);
    f << 0.2, 0, 0, 0, 0.3, 0, 0, 0, 0.5;
    for (const auto &pt : aep_scan(JointDistribution::from_matrix(f), 0.2, 6)) EXPECT_EQ(pt.value, 0.0);

    // Uniform bit, trivial Y: the smallest subset of the 2^n strings with mass
    // >= 1 - eps/2 has ceil(2^n (1 - eps/2)) elements.
    Eigen::MatrixXd u(2, 1);
    u << 0.5, 0.5;
    const auto pts = aep_scan(JointDistribution::from_matrix(u), 0.2, 10);
    for (const auto &pt : pts) {
        const double count = std::ceil(std::ldexp(1.0, static_cast<int>(pt.n)) * 0.9 - 1e-9);
        EXPECT_NEAR(pt.value, std::log2(count) / static_cast<double>(pt.n), 1e-12);
    }
    EXPECT_GT(pts.back().value, 0.98);

    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    const auto scan = aep_scan(j, 0.2, 12);
    ASSERT_EQ(scan.size(), 12u);
    for (const auto &pt : scan) EXPECT_LE(pt.value, pt.upper_curve + 1e-12);
    EXPECT_LE(std::abs(scan.back().value - 0.5), 0.2);
}

TEST(Aep, SmallNAgainstSubsetEnumeration) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    const auto scan = aep_scan(j, 0.2, 2);
    for (std::size_t n = 1; n <= 2; ++n) {
        const auto atoms = oracle::product(to_oracle(j), n, j.x_size(), j.y_size());
        EXPECT_NEAR(scan[n - 1].value, oracle::tweaked_hmax_bruteforce(atoms, 0.2) / static_cast<double>(n), 1e-12);
    }
}

TEST(TypicalSet, CarriesEnoughMass) {
    const auto j = joint_from_state(rho1(), clique_partition(rho1()));
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto t = minimal_typical_set(j, n, 0.2);
        const auto pn = product_power(j, n);
        double mass = 0.0;
        for (auto i : t.members(pn)) mass += pn.atoms()[i].p;
        EXPECT_GE(mass, 0.9 - 1e-12);
    }
}
