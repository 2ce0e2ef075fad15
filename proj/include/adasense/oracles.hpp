// oracles.hpp
//
// Brute-force reference computations used to check the sensing machinery:
// the max-min budget allocation LP, exact sampling-law pmfs, the KL cap on
// null log-likelihood ratios, and the averaging identity behind random
// relabeling.
#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sensing.hpp"
#include "simplex.hpp"
#include "strategies.hpp"

namespace adasense {

using Rational = boost::multiprecision::cpp_rational;

// Per-entry expected null precision b_i, with sum(b) <= m.
struct BudgetAllocation {
    std::vector<double> b;
    double total = 0.0;
};

struct AllocationValue {
    double value = 0.0;
    BudgetAllocation argmax;
};

inline constexpr std::size_t kMaxOracleDimension = 16;
inline constexpr std::size_t kMaxOracleMembers = 10000;

namespace detail {
inline void require_oracle_class(const SupportClass& cls) {
    if (cls.is_implicit()) throw ClassTooLarge("LP oracle needs an explicit class");
    if (cls.dimension() > kMaxOracleDimension) throw ClassTooLarge("LP oracle supports n <= 16");
    if (cls.members().size() > kMaxOracleMembers) throw ClassTooLarge("LP oracle supports at most 10^4 members");
}
} // namespace detail

// sup over b >= 0, sum b <= m of min_{S in C} sum_{i in S} b_i, solved
// exactly in rational arithmetic as: max t s.t. t - sum_{i in S} b_i <= 0 for
// all S, sum b_i <= m.
inline AllocationValue maxmin_allocation_value(const SupportClass& cls, double m) {
    detail::require_oracle_class(cls);
    if (!(m > 0.0)) throw ValidationError("budget m must be positive");
    const std::size_t n = cls.dimension();
    const std::size_t vars = n + 1; // x[0] = t, x[1+i] = b_i
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> rhs;
    A.reserve(cls.members().size() + 1);
    for (const auto& S : cls.members()) {
        std::vector<Rational> row(vars, Rational(0));
        row[0] = 1;
        for (Index i : S) row[1 + i] = -1;
        A.push_back(std::move(row));
        rhs.emplace_back(0);
    }
    std::vector<Rational> budget_row(vars, Rational(1));
    budget_row[0] = 0;
    A.push_back(std::move(budget_row));
    rhs.emplace_back(m);
    std::vector<Rational> objective(vars, Rational(0));
    objective[0] = 1;

    const auto sol = simplex_maximize(A, rhs, objective);
    AllocationValue out;
    out.value = static_cast<double>(sol.value);
    out.argmax.b.resize(n);
    Rational total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.argmax.b[i] = static_cast<double>(sol.x[1 + i]);
        total += sol.x[1 + i];
    }
    out.argmax.total = static_cast<double>(total);
    return out;
}

// sup over the same simplex of the class-average objective: linear in b, so
// the optimum puts all of m on the most frequent entry.
inline AllocationValue average_allocation_value(const SupportClass& cls, double m) {
    detail::require_oracle_class(cls);
    const auto counts = cls.membership_counts();
    const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    AllocationValue out;
    const Rational freq = Rational(counts[best]) / Rational(cls.members().size());
    out.value = static_cast<double>(Rational(m) * freq);
    out.argmax.b.assign(cls.dimension(), 0.0);
    out.argmax.b[best] = m;
    out.argmax.total = m;
    return out;
}

// min over members of sum_{i in S} b_i, exact for checking a given allocation.
inline double min_member_mass(const SupportClass& cls, const std::vector<double>& b) {
    Rational best;
    bool first = true;
    for (const auto& S : cls.members()) {
        Rational acc = 0;
        for (Index i : S) acc += Rational(b[i]);
        if (first || acc < best) best = acc;
        first = false;
    }
    return static_cast<double>(best);
}

// ---------------------------------------------------------------------------
// Sampling laws

// Number of measurements of an off-support entry under repeated sign tests
// capped at l: P(c = x) = 2^-x for x < l and 2^-(l-1) for x = l.
inline double truncated_geometric_pmf(std::size_t l, std::size_t x) {
    if (l < 1 || x < 1 || x > l) throw OutOfSupport("truncated geometric pmf needs 1 <= x <= l");
    const int e = x < l ? -static_cast<int>(x) : -static_cast<int>(l - 1);
    return std::ldexp(1.0, e);
}

inline double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(|E cap S| = k) when E is a uniform draw-subset of {1..n} and |S| = s.
inline double hypergeometric_pmf(std::size_t n, std::size_t s, std::size_t draw, std::size_t k) {
    if (s > n || draw > n) throw OutOfSupport("hypergeometric pmf needs s, draw <= n");
    if (k > std::min(s, draw)) throw OutOfSupport("hypergeometric pmf needs k <= min(s, draw)");
    if (draw - k > n - s) return 0.0;
    const double N = static_cast<double>(n), S = static_cast<double>(s), D = static_cast<double>(draw),
                 K = static_cast<double>(k);
    return std::exp(log_choose(S, K) + log_choose(N - S, D - K) - log_choose(N, D));
}

inline double hypergeometric_mean(std::size_t n, std::size_t s, std::size_t draw) {
    return static_cast<double>(draw) * static_cast<double>(s) / static_cast<double>(n);
}

inline double hypergeometric_variance(std::size_t n, std::size_t s, std::size_t draw) {
    if (n < 2) return 0.0;
    const double N = static_cast<double>(n), S = static_cast<double>(s), D = static_cast<double>(draw);
    return D * (S / N) * (1.0 - S / N) * (N - D) / (N - 1.0);
}

// ---------------------------------------------------------------------------
// KL cap

struct KlCapReport {
    double min_empirical_kl = 0.0;
    double se_at_min = 0.0;
    double max_se = 0.0;
    double cap = 0.0;
    std::size_t supports = 0;
    std::size_t trials = 0;
    bool pass = false;
};

// Runs `procedure` `trials` times under the null, then for each sampled (or
// enumerated) support S averages (mu^2/2) * sum of precision spent inside S.
// Passes when the smallest average is within 3 standard errors of
// mu^2 m s / (2|Xi|).
inline KlCapReport kl_cap_check(const SensingProcedure& procedure, const SupportClass& cls, double amplitude, double m,
                                std::size_t trials, const Rng& rng, std::size_t sampled_supports = 100) {
    if (trials < 2) throw ValidationError("trials must be at least 2");
    if (!class_is_symmetric(cls)) throw ValidationError("kl cap applies to symmetric classes only");
    const std::size_t n = cls.dimension();
    const auto null_signal = SparseSignal::null(n);

    using Allocation = std::vector<std::pair<Index, double>>;
    auto allocations = parallel_map<Allocation>(trials, [&](std::size_t t) {
        Sensor sensor(null_signal, BudgetLedger(m), rng.derive({0xc1, t}));
        procedure(sensor);
        Allocation sparse;
        const auto& recs = sensor.trace().records;
        std::vector<std::pair<Index, double>> raw;
        raw.reserve(recs.size());
        for (const auto& r : recs) raw.emplace_back(r.action, r.precision);
        std::stable_sort(raw.begin(), raw.end(), [](auto& a, auto& b) { return a.first < b.first; });
        for (const auto& [i, p] : raw) {
            if (!sparse.empty() && sparse.back().first == i)
                sparse.back().second += p;
            else
                sparse.emplace_back(i, p);
        }
        return sparse;
    });

    std::vector<IndexSet> supports;
    if (cls.is_implicit()) {
        Rng pick = rng.derive({0xc2});
        for (std::size_t g = 0; g < sampled_supports; ++g) supports.push_back(draw_support(cls, pick));
    } else {
        supports = cls.members();
    }

    KlCapReport rep;
    rep.trials = trials;
    rep.supports = supports.size();
    rep.cap = amplitude * amplitude * m * static_cast<double>(cls.cardinality()) /
              (2.0 * static_cast<double>(cls.xi_size()));
    rep.min_empirical_kl = std::numeric_limits<double>::infinity();
    std::vector<double> vals(trials);
    for (const auto& S : supports) {
        for (std::size_t t = 0; t < trials; ++t) {
            double acc = 0.0;
            for (const auto& [i, p] : allocations[t])
                if (contains(S, i)) acc += p;
            vals[t] = 0.5 * amplitude * amplitude * acc;
        }
        const auto est = mean_and_se(vals);
        rep.max_se = std::max(rep.max_se, est.se);
        if (est.mean < rep.min_empirical_kl) {
            rep.min_empirical_kl = est.mean;
            rep.se_at_min = est.se;
        }
    }
    rep.pass = rep.min_empirical_kl <= rep.cap * (1.0 + 1e-12) + 3.0 * rep.max_se;
    return rep;
}

// ---------------------------------------------------------------------------
// Relabeling identity

// All s-subsets of {0..n-1} in lexicographic order.
inline std::vector<IndexSet> enumerate_subsets(std::size_t n, std::size_t s) {
    std::vector<IndexSet> out;
    if (s > n) return out;
    IndexSet cur(s);
    for (std::size_t i = 0; i < s; ++i) cur[i] = static_cast<Index>(i);
    for (;;) {
        out.push_back(cur);
        std::size_t i = s;
        while (i > 0 && cur[i - 1] == n - s + i - 1) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < s; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// (1 / (s C(n,s))) sum_{|S'|=s} sum_{j in S'} P_{S'}(j not in estimate):
// the per-entry miss probability any relabeled estimator must have.
inline double relabeled_miss_average(std::size_t n, std::size_t s,
                                     const std::function<double(const IndexSet&, Index)>& miss_prob) {
    const auto all = enumerate_subsets(n, s);
    double acc = 0.0;
    for (const auto& S : all)
        for (Index j : S) acc += miss_prob(S, j);
    return acc / (static_cast<double>(s) * static_cast<double>(all.size()));
}

// (1 / ((n-s) C(n,s))) sum_{|S'|=s} sum_{j not in S'} P_{S'}(j in estimate).
inline double relabeled_false_alarm_average(std::size_t n, std::size_t s,
                                            const std::function<double(const IndexSet&, Index)>& alarm_prob) {
    const auto all = enumerate_subsets(n, s);
    double acc = 0.0;
    for (const auto& S : all)
        for (std::size_t j = 0; j < n; ++j)
            if (!contains(S, static_cast<Index>(j))) acc += alarm_prob(S, static_cast<Index>(j));
    return acc / (static_cast<double>(n - s) * static_cast<double>(all.size()));
}

} // namespace adasense
