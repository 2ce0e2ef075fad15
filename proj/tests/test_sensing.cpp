#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "adasense/sensing.hpp"
#include "adasense/strategies.hpp"

using namespace adasense;

TEST(Observe, NullPrecisionOneIsStandardNormal) {
    const auto x = SparseSignal::null(3);
    Sensor sensor(x, BudgetLedger(1e6), Rng(1));
    const int N = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        const double y = sensor.observe(static_cast<Index>(i % 3), 1.0);
        s += y;
        s2 += y * y;
    }
    const double mean = s / N;
    EXPECT_LE(std::abs(mean), 0.01);
    EXPECT_LE(std::abs(s2 / N - mean * mean - 1.0), 0.02);
}

TEST(Observe, HighPrecisionNearlyExact) {
    const SparseSignal x(4, {2}, 1.0);
    Sensor sensor(x, BudgetLedger(1e12), Rng(2));
    int close = 0;
    for (int i = 0; i < 1000; ++i) close += std::abs(sensor.observe(2, 1e8) - 1.0) < 1e-3;
    EXPECT_GE(close, 999);
}

TEST(Observe, HardBudgetRejectsOverspend) {
    const auto x = SparseSignal::null(2);
    Sensor sensor(x, BudgetLedger(1.0), Rng(3));
    EXPECT_THROW(sensor.observe(0, 2.0), BudgetExceeded);
    EXPECT_EQ(sensor.measurements(), 0u);
    EXPECT_DOUBLE_EQ(sensor.spent(), 0.0);
}

TEST(Observe, ExpectedModeRecordsOverrun) {
    const auto x = SparseSignal::null(2);
    Sensor sensor(x, BudgetLedger(1.0, BudgetMode::expected), Rng(3));
    EXPECT_NO_THROW(sensor.observe(0, 2.0));
    EXPECT_TRUE(sensor.trace().ledger.overrun());
    EXPECT_DOUBLE_EQ(sensor.spent(), 2.0);
}

TEST(Observe, InvalidActionAndPrecision) {
    const auto x = SparseSignal::null(2);
    Sensor sensor(x, BudgetLedger(1.0), Rng(3));
    EXPECT_THROW(sensor.observe(2, 0.1), InvalidAction);
    EXPECT_THROW(sensor.observe(0, 0.0), ValidationError);
    EXPECT_THROW(BudgetLedger(0.0), ValidationError);
}

TEST(Ledger, ManySmallChargesFitExactly) {
    // 4n charges of m/(4n) must all fit a budget of m
    const std::size_t n = 1u << 16;
    const double m = static_cast<double>(n);
    BudgetLedger led(m);
    const double p = m / (4.0 * static_cast<double>(n));
    for (std::size_t k = 0; k < 4 * n; ++k) ASSERT_NO_THROW(led.charge(p)) << k;
    EXPECT_NEAR(led.spent(), m, 1e-12 * m);
    EXPECT_FALSE(led.affordable(p));
}

TEST(Ledger, ThirdsFit) {
    BudgetLedger led(1.0);
    for (int k = 0; k < 3; ++k) led.charge(1.0 / 3.0);
    EXPECT_FALSE(led.affordable(1e-9));
}

TEST(Relabeling, MapsActionsAndComposes) {
    const SparseSignal x(3, {0}, 100.0);
    Sensor sensor(x, BudgetLedger(1e9), Rng(4));
    auto prev = sensor.push_relabeling({2, 0, 1});  // action 1 -> entry 0
    EXPECT_NEAR(sensor.observe(1, 1e8), 100.0, 1e-2);
    auto prev2 = sensor.push_relabeling({1, 2, 0});  // action 0 -> 1 -> 0
    EXPECT_NEAR(sensor.observe(0, 1e8), 100.0, 1e-2);
    sensor.restore_relabeling(prev2);
    sensor.restore_relabeling(prev);
    EXPECT_NEAR(sensor.observe(0, 1e8), 100.0, 1e-2);
    for (const auto& r : sensor.trace().records) EXPECT_EQ(r.action, 0u);
}

namespace {
SensingTrace make_trace(std::vector<SensingRecord> recs) {
    SensingTrace t;
    t.records = std::move(recs);
    return t;
}
} // namespace

TEST(LogLikelihoodRatio, SingleRecord) {
    const double y0 = 0.37, mu = 1.3;
    const auto t = make_trace({{1, 0, 1.0, y0}});
    EXPECT_NEAR(log_likelihood_ratio(t, {0}, {}, mu), mu * y0 - mu * mu / 2, 1e-15);
}

TEST(LogLikelihoodRatio, IdenticalSupportsGiveZero) {
    const auto t = make_trace({{1, 0, 2.0, 0.5}, {2, 1, 0.5, -3.0}, {3, 4, 7.0, 1.0}});
    EXPECT_EQ(log_likelihood_ratio(t, {0, 4}, {0, 4}, 2.0), 0.0);
}

TEST(LogLikelihoodRatio, TwoRecordsGolden) {
    // direct difference of Gaussian log densities: 2*(0) + 2*(0.845 - 0.045)
    const auto t = make_trace({{1, 0, 2.0, 0.5}, {2, 1, 2.0, -0.3}});
    EXPECT_NEAR(log_likelihood_ratio(t, {0}, {1}, 1.0), 1.6, 1e-14);
}

TEST(LogLikelihoodRatio, AntisymmetryAndChain) {
    const SparseSignal x(8, {1, 5}, 0.8);
    Sensor sensor(x, BudgetLedger(100.0), Rng(9));
    for (int k = 0; k < 40; ++k) sensor.observe(static_cast<Index>(k % 8), 0.5 + 0.1 * (k % 5));
    const auto& t = sensor.trace();
    const IndexSet A{1, 5}, B{2, 3}, C{5, 7};
    EXPECT_EQ(log_likelihood_ratio(t, A, B, 0.8), -log_likelihood_ratio(t, B, A, 0.8));
    EXPECT_NEAR(log_likelihood_ratio(t, A, C, 0.8),
                log_likelihood_ratio(t, A, B, 0.8) + log_likelihood_ratio(t, B, C, 0.8), 1e-12);
}

TEST(EmpiricalKl, UniformStrategyExact) {
    const std::size_t n = 32;
    const double m = 64.0;
    const auto est = empirical_kl_under_null([](Sensor& s) { run_uniform(s, 1.0); }, n, m, {3, 9, 20}, 1.0, 10, Rng(1));
    EXPECT_NEAR(est.mean, (m / n) * 3 / 2, 1e-12);
    EXPECT_EQ(est.se, 0.0);
}

TEST(EmpiricalKl, AllBudgetOnOneEntry) {
    auto proc = [](Sensor& s) { s.observe(0, s.budget()); };
    EXPECT_DOUBLE_EQ(empirical_kl_under_null(proc, 4, 10.0, {0}, 1.0, 5, Rng(2)).mean, 5.0);
    EXPECT_DOUBLE_EQ(empirical_kl_under_null(proc, 4, 10.0, {1}, 1.0, 5, Rng(2)).mean, 0.0);
    EXPECT_THROW(empirical_kl_under_null(proc, 4, 10.0, {1}, 1.0, 1, Rng(2)), ValidationError);
}

TEST(Trace, CsvRoundTrip) {
    const SparseSignal x(6, {2}, 1.5);
    Sensor sensor(x, BudgetLedger(10.0), Rng(5));
    for (int k = 0; k < 12; ++k) sensor.observe(static_cast<Index>(k % 6), 1.0 / 3.0);
    std::stringstream ss;
    write_trace_csv(ss, sensor.trace());
    const auto back = read_trace_csv(ss);
    const auto& recs = sensor.trace().records;
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].k, recs[i].k);
        EXPECT_EQ(back[i].action, recs[i].action);
        EXPECT_EQ(back[i].precision, recs[i].precision);
        EXPECT_EQ(back[i].y, recs[i].y);
    }
    std::stringstream first;
    write_trace_csv(first, sensor.trace());
    EXPECT_EQ(first.str().substr(0, 13), "k,a,gamma2,y\n");
    EXPECT_NE(first.str().find("\n3,3,"), std::string::npos);  // 1-based actions
}

TEST(Trace, CsvRejectsGarbage) {
    std::stringstream a("nope\n");
    EXPECT_THROW(read_trace_csv(a), ConfigError);
    std::stringstream b("k,a,gamma2,y\n1,0,1,1\n");
    EXPECT_THROW(read_trace_csv(b), ConfigError);
}

TEST(Trace, PrecisionSumMatchesLedger) {
    const SparseSignal x(50, {1, 2, 3}, 2.0);
    Sensor sensor(x, BudgetLedger(50.0), Rng(6));
    run_sds(sensor, SdsParams::defaults(50, 50.0));
    const auto& t = sensor.trace();
    EXPECT_NEAR(t.precision_sum(), t.ledger.spent(), 1e-12 * t.ledger.spent());
    EXPECT_LE(t.ledger.spent(), 50.0 * (1 + BudgetLedger::kSlack));
}

TEST(MeanAndSe, Basic) {
    const auto e = mean_and_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(e.trials, 4u);
}
