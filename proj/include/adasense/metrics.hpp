// metrics.hpp
#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "model.hpp"
#include "parallel.hpp"
#include "sensing.hpp"
#include "strategies.hpp"

namespace adasense {

inline std::size_t sym_diff_error(const IndexSet& estimate, const IndexSet& truth) {
    std::size_t common = 0;
    auto a = estimate.begin();
    auto b = truth.begin();
    while (a != estimate.end() && b != truth.end()) {
        if (*a < *b)
            ++a;
        else if (*b < *a)
            ++b;
        else {
            ++common;
            ++a;
            ++b;
        }
    }
    return estimate.size() + truth.size() - 2 * common;
}

namespace detail {
inline std::size_t intersection_size(const IndexSet& a, const IndexSet& b) {
    return (a.size() + b.size() - sym_diff_error(a, b)) / 2;
}
} // namespace detail

// |estimate \ truth| / |estimate|, with 0/0 = 0.
inline double fdr(const IndexSet& estimate, const IndexSet& truth) {
    if (estimate.empty()) return 0.0;
    const auto false_hits = estimate.size() - detail::intersection_size(estimate, truth);
    return static_cast<double>(false_hits) / static_cast<double>(estimate.size());
}

// |truth \ estimate| / |truth|, with 0/0 = 0.
inline double ndr(const IndexSet& estimate, const IndexSet& truth) {
    if (truth.empty()) return 0.0;
    const auto missed = truth.size() - detail::intersection_size(estimate, truth);
    return static_cast<double>(missed) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------
// Detection risks

struct DetectionRiskTriple {
    double p_null = 0.0;            // P_null(decision != 0)
    double se_p_null = 0.0;
    std::vector<double> miss;       // P_S(decision != 1) per grid support
    std::vector<double> se_miss;
    double risk_sum = 0.0;          // R
    double risk_max = 0.0;          // R tilde
    double risk_bayes = 0.0;        // R bar
    double se_sum = 0.0;
    double se_max = 0.0;
    double se_bayes = 0.0;
    std::size_t trials = 0;
};

// Assembles R = p0 + max miss, R~ = max(p0, max miss), R- = p0 + mean miss
// from error-probability components.
inline DetectionRiskTriple assemble_detection_risk(double p_null, std::vector<double> miss, double se_p_null = 0.0,
                                                   std::vector<double> se_miss = {}, std::size_t trials = 0) {
    if (miss.empty()) throw ValidationError("detection risk needs at least one alternative support");
    if (se_miss.empty()) se_miss.assign(miss.size(), 0.0);
    DetectionRiskTriple r;
    r.p_null = p_null;
    r.se_p_null = se_p_null;
    r.trials = trials;
    const auto worst = static_cast<std::size_t>(std::max_element(miss.begin(), miss.end()) - miss.begin());
    const double max_miss = miss[worst];
    double sum = 0.0, se2 = 0.0;
    for (std::size_t g = 0; g < miss.size(); ++g) {
        sum += miss[g];
        se2 += se_miss[g] * se_miss[g];
    }
    // the mean never exceeds the max; clamp away rounding in the sum
    const double mean_miss = std::min(sum / static_cast<double>(miss.size()), max_miss);
    r.risk_sum = p_null + max_miss;
    r.risk_max = std::max(p_null, max_miss);
    r.risk_bayes = p_null + mean_miss;
    r.se_sum = std::hypot(se_p_null, se_miss[worst]);
    r.se_max = p_null >= max_miss ? se_p_null : se_miss[worst];
    r.se_bayes = std::sqrt(se_p_null * se_p_null + se2 / static_cast<double>(miss.size() * miss.size()));
    r.miss = std::move(miss);
    r.se_miss = std::move(se_miss);
    return r;
}

// How alternative supports are chosen when estimating worst-case risks.
struct SupportGrid {
    std::size_t sampled = 32;     // uniform draws for implicit classes
    bool redraw_per_trial = false; // one fresh support per trial, pooled into a single estimate
};

inline double binomial_se(double p, std::size_t trials) {
    return trials > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials)) : 0.0;
}

namespace detail {

inline std::vector<IndexSet> grid_supports(const SupportClass& cls, const SupportGrid& grid, const Rng& rng) {
    if (!cls.is_implicit()) return cls.members();
    std::vector<IndexSet> out;
    Rng draw = rng.derive({0x5e7});
    for (std::size_t g = 0; g < std::max<std::size_t>(1, grid.sampled); ++g) out.push_back(draw_support(cls, draw));
    return out;
}

// At mu = 0 the alternative coincides with the null, which is the only
// signal allowed a zero amplitude.
inline SparseSignal alternative_signal(std::size_t n, const IndexSet& support, double amplitude) {
    return amplitude == 0.0 ? SparseSignal::null(n) : SparseSignal(n, support, amplitude);
}

inline double fraction_true(const std::vector<std::uint8_t>& hits) {
    std::size_t c = 0;
    for (auto h : hits) c += h;
    return static_cast<double>(c) / static_cast<double>(hits.size());
}

} // namespace detail

inline DetectionRiskTriple detection_risk(const Strategy& test, const SupportClass& alt_class, double amplitude, double m,
                                          std::size_t trials, const Rng& rng, const SupportGrid& grid = {}) {
    if (trials < 2) throw ValidationError("trials must be at least 2");
    const std::size_t n = alt_class.dimension();
    const auto null_signal = SparseSignal::null(n);
    auto fired = parallel_map<std::uint8_t>(trials, [&](std::size_t t) {
        Sensor sensor(null_signal, BudgetLedger(m), rng.derive({0, t}), t);
        return static_cast<std::uint8_t>(test(sensor).decision ? 1 : 0);
    });
    const double p_null = detail::fraction_true(fired);

    std::vector<double> miss, se_miss;
    if (grid.redraw_per_trial) {
        auto missed = parallel_map<std::uint8_t>(trials, [&](std::size_t t) {
            Rng r = rng.derive({1, 0, t});
            Rng pick = r.derive({0x5e7});
            const SparseSignal signal = detail::alternative_signal(n, draw_support(alt_class, pick), amplitude);
            Sensor sensor(signal, BudgetLedger(m), r, t);
            return static_cast<std::uint8_t>(test(sensor).decision ? 0 : 1);
        });
        miss.push_back(detail::fraction_true(missed));
    } else {
        const auto supports = detail::grid_supports(alt_class, grid, rng);
        for (std::size_t g = 0; g < supports.size(); ++g) {
            const SparseSignal signal = detail::alternative_signal(n, supports[g], amplitude);
            auto missed = parallel_map<std::uint8_t>(trials, [&](std::size_t t) {
                Sensor sensor(signal, BudgetLedger(m), rng.derive({1, g, t}), t);
                return static_cast<std::uint8_t>(test(sensor).decision ? 0 : 1);
            });
            miss.push_back(detail::fraction_true(missed));
        }
    }
    for (double p : miss) se_miss.push_back(binomial_se(p, trials));
    return assemble_detection_risk(p_null, std::move(miss), binomial_se(p_null, trials), std::move(se_miss), trials);
}

// ---------------------------------------------------------------------------
// Estimation risks

// Per-trial errors of one support estimate.
struct EstimationSample {
    std::uint64_t trial = 0;
    double sym_diff = 0.0;
    double fdr = 0.0;
    double ndr = 0.0;
    double exact_fail = 0.0;
};

inline EstimationSample score_estimate(std::uint64_t trial, const IndexSet& estimate, const IndexSet& truth) {
    const auto d = sym_diff_error(estimate, truth);
    return {trial, static_cast<double>(d), fdr(estimate, truth), ndr(estimate, truth), d ? 1.0 : 0.0};
}

// Means of per-trial errors for one support. Merging batches is a keyed
// union on trial index, so any grouping of partial batches reduces to the
// same summary.
class EstimationBatch {
public:
    void add(EstimationSample s) { samples_.push_back(s); }

    void merge(const EstimationBatch& other) {
        samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
    }

    struct Summary {
        MeanEstimate sym_diff, fdr, ndr, exact_fail;
        std::size_t trials = 0;
    };

    Summary summarize() const {
        auto sorted = samples_;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
        std::vector<double> d, f, nd, x;
        for (const auto& s : sorted) {
            d.push_back(s.sym_diff);
            f.push_back(s.fdr);
            nd.push_back(s.ndr);
            x.push_back(s.exact_fail);
        }
        return {mean_and_se(d), mean_and_se(f), mean_and_se(nd), mean_and_se(x), sorted.size()};
    }

    std::size_t size() const { return samples_.size(); }

private:
    std::vector<EstimationSample> samples_;
};

struct EstimationErrorReport {
    double mean_sym_diff = 0.0;   // max over the grid of E[d]
    double fdr = 0.0;             // at the support maximizing FDR + NDR
    double ndr = 0.0;
    double exact_fail = 0.0;      // max over the grid of P(estimate != S)
    double se_sym_diff = 0.0;
    double se_fdr = 0.0;
    double se_ndr = 0.0;
    double se_exact_fail = 0.0;
    std::size_t trials = 0;
    std::size_t supports = 0;
};

inline EstimationErrorReport aggregate_estimation(const std::vector<EstimationBatch::Summary>& per_support) {
    if (per_support.empty()) throw ValidationError("no supports to aggregate");
    EstimationErrorReport r;
    r.supports = per_support.size();
    r.trials = per_support.front().trials;
    std::size_t worst_d = 0, worst_rate = 0, worst_fail = 0;
    for (std::size_t g = 1; g < per_support.size(); ++g) {
        const auto& p = per_support[g];
        if (p.sym_diff.mean > per_support[worst_d].sym_diff.mean) worst_d = g;
        if (p.fdr.mean + p.ndr.mean > per_support[worst_rate].fdr.mean + per_support[worst_rate].ndr.mean) worst_rate = g;
        if (p.exact_fail.mean > per_support[worst_fail].exact_fail.mean) worst_fail = g;
    }
    r.mean_sym_diff = per_support[worst_d].sym_diff.mean;
    r.se_sym_diff = per_support[worst_d].sym_diff.se;
    r.fdr = per_support[worst_rate].fdr.mean;
    r.se_fdr = per_support[worst_rate].fdr.se;
    r.ndr = per_support[worst_rate].ndr.mean;
    r.se_ndr = per_support[worst_rate].ndr.se;
    r.exact_fail = per_support[worst_fail].exact_fail.mean;
    r.se_exact_fail = per_support[worst_fail].exact_fail.se;
    return r;
}

inline EstimationErrorReport estimation_risk(const Strategy& estimator, const SupportClass& cls, double amplitude,
                                             double m, std::size_t trials, const Rng& rng,
                                             const SupportGrid& grid = {}) {
    if (trials < 2) throw ValidationError("trials must be at least 2");
    const std::size_t n = cls.dimension();
    std::vector<EstimationBatch::Summary> summaries;
    if (grid.redraw_per_trial) {
        auto samples = parallel_map<EstimationSample>(trials, [&](std::size_t t) {
            Rng r = rng.derive({2, 0, t});
            Rng pick = r.derive({0x5e7});
            const IndexSet truth = draw_support(cls, pick);
            const SparseSignal signal = detail::alternative_signal(n, truth, amplitude);
            Sensor sensor(signal, BudgetLedger(m), r, t);
            return score_estimate(t, estimator(sensor).estimate, truth);
        });
        EstimationBatch batch;
        for (auto& s : samples) batch.add(s);
        summaries.push_back(batch.summarize());
    } else {
        const auto supports = detail::grid_supports(cls, grid, rng);
        for (std::size_t g = 0; g < supports.size(); ++g) {
            const SparseSignal signal = detail::alternative_signal(n, supports[g], amplitude);
            auto samples = parallel_map<EstimationSample>(trials, [&](std::size_t t) {
                Sensor sensor(signal, BudgetLedger(m), rng.derive({2, g, t}), t);
                return score_estimate(t, estimator(sensor).estimate, supports[g]);
            });
            EstimationBatch batch;
            for (auto& s : samples) batch.add(s);
            summaries.push_back(batch.summarize());
        }
    }
    return aggregate_estimation(summaries);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const DetectionRiskTriple& r) {
    return {{"risk_sum", r.risk_sum}, {"risk_max", r.risk_max}, {"risk_bayes", r.risk_bayes},
            {"p_null", r.p_null},     {"miss", r.miss},         {"se_risk_sum", r.se_sum},
            {"se_risk_max", r.se_max}, {"se_risk_bayes", r.se_bayes}, {"se_p_null", r.se_p_null},
            {"se_miss", r.se_miss},   {"trials", r.trials}};
}

inline DetectionRiskTriple detection_risk_from_json(const nlohmann::json& j) {
    DetectionRiskTriple r;
    r.risk_sum = j.at("risk_sum").get<double>();
    r.risk_max = j.at("risk_max").get<double>();
    r.risk_bayes = j.at("risk_bayes").get<double>();
    r.p_null = j.at("p_null").get<double>();
    r.miss = j.at("miss").get<std::vector<double>>();
    r.se_sum = j.at("se_risk_sum").get<double>();
    r.se_max = j.at("se_risk_max").get<double>();
    r.se_bayes = j.at("se_risk_bayes").get<double>();
    r.se_p_null = j.at("se_p_null").get<double>();
    r.se_miss = j.at("se_miss").get<std::vector<double>>();
    r.trials = j.at("trials").get<std::size_t>();
    return r;
}

inline nlohmann::json to_json(const EstimationErrorReport& r) {
    return {{"mean_sym_diff", r.mean_sym_diff}, {"fdr", r.fdr},
            {"ndr", r.ndr},                     {"exact_fail", r.exact_fail},
            {"se_mean_sym_diff", r.se_sym_diff}, {"se_fdr", r.se_fdr},
            {"se_ndr", r.se_ndr},               {"se_exact_fail", r.se_exact_fail},
            {"trials", r.trials},               {"supports", r.supports}};
}

inline EstimationErrorReport estimation_report_from_json(const nlohmann::json& j) {
    EstimationErrorReport r;
    r.mean_sym_diff = j.at("mean_sym_diff").get<double>();
    r.fdr = j.at("fdr").get<double>();
    r.ndr = j.at("ndr").get<double>();
    r.exact_fail = j.at("exact_fail").get<double>();
    r.se_sym_diff = j.at("se_mean_sym_diff").get<double>();
    r.se_fdr = j.at("se_fdr").get<double>();
    r.se_ndr = j.at("se_ndr").get<double>();
    r.se_exact_fail = j.at("se_exact_fail").get<double>();
    r.trials = j.at("trials").get<std::size_t>();
    r.supports = j.at("supports").get<std::size_t>();
    return r;
}

} // namespace adasense
