#include "common.hpp"

using namespace coherence;
using namespace fixtures;

TEST(Distillation, Rho1) {
    const auto run = distill_accounting(rho1(), 10000, 1, 8);
    EXPECT_NEAR(run.deterministic_rate, 0.5, 1e-12);
    EXPECT_NEAR(run.empirical_rate, 0.5, 0.02);
    EXPECT_NEAR(run.deterministic_rate, quintessential_coherence(rho1()), 1e-12);
}

TEST(Distillation, PureAndFree) {
    const auto r = distill_accounting(psi(4), 100, 1, 4);
    EXPECT_NEAR(r.empirical_rate, 2.0, 1e-12);
    EXPECT_EQ(r.empirical_variance, 0.0);
    const auto f = distill_accounting(diag({0.3, 0.7}), 100, 1, 4);
    EXPECT_EQ(f.empirical_rate, 0.0);
    EXPECT_THROW(distill_accounting(rho1(), 0, 1, 1), InvalidArgument);
}

TEST(Distillation, WorkerCountDoesNotChangeResult) {
    const auto a = distill_accounting(rho0(), 500, 3, 16, default_tolerances(), 1);
    const auto b = distill_accounting(rho0(), 500, 3, 16, default_tolerances(), 4);
    EXPECT_EQ(a.outcome_counts, b.outcome_counts);
    EXPECT_EQ(a.empirical_rate, b.empirical_rate);
}

TEST(Dilution, MatchesSearchOracle) {
    for (std::uint64_t k : {3u, 5u, 6u, 7u})
        for (std::uint64_t n : {1u, 5u, 28u, 50u, 200u})
            for (double delta : {0.05, 0.1, 0.3})
                for (double eps : {0.1, 0.5}) {
                    const auto plan = plan_dilution(k, n, delta, eps);
                    const auto o = oracle::dilution_search(k, n, delta, eps);
                    EXPECT_EQ(plan.feasible, o.found) << k << " " << n << " " << delta << " " << eps;
                    if (plan.feasible && o.found) {
                        EXPECT_EQ(plan.M, o.M);
                        EXPECT_EQ(plan.N, o.N);
                        const auto sim = simulate_dilution(plan);
                        EXPECT_LE(sim.error, eps + 1e-12);
                        EXPECT_LE(sim.rate, std::log2(static_cast<double>(k)) + delta + 1e-12);
                    }
                }
}

TEST(Dilution, Examples) {
    const auto p4 = plan_dilution(4, 10, 0.1, 0.1);
    EXPECT_TRUE(p4.integer_log);
    EXPECT_EQ(p4.M, 20u);
    EXPECT_EQ(simulate_dilution(p4).error, 0.0);
    const auto p = plan_dilution(3, 28, 0.1, 0.1);
    ASSERT_TRUE(p.feasible);
    EXPECT_EQ(p.N, 29u);
    EXPECT_EQ(p.M, 46u);
    const auto tight = plan_dilution(3, 5, 0.01, 0.1);
    EXPECT_FALSE(tight.feasible);
    EXPECT_FALSE(tight.reason.empty());
    EXPECT_THROW(simulate_dilution(tight), InvalidArgument);
    EXPECT_THROW(plan_dilution(1, 5, 0.1, 0.1), InvalidArgument);
    EXPECT_THROW(plan_dilution(3, 5, 0.1, 2.0), InvalidArgument);
}

TEST(Dilution, MixedAccounting) {
    const auto dec = cfu_optimize(qubit(0.5, 0.25)).witness.value();
    const auto acc = mixed_dilution_accounting(dec, 20000, 0.3, 0.5);
    EXPECT_NEAR(acc.rate_target, dec.cost() + 0.3, 1e-12);
    if (acc.feasible) EXPECT_LE(acc.rate, acc.rate_target + 1e-9);
    std::uint64_t copies = 0;
    for (const auto &t : acc.terms) copies += t.copies;
    EXPECT_GE(copies, 20000u);
}
