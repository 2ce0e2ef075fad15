// verify.hpp
//
// Self-check battery behind `adasense verify`: each verdict compares an
// oracle computation against an independently known reference.
#pragma once
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bounds.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "strategies.hpp"

namespace adasense {

struct Verdict {
    std::string name;
    nlohmann::json inputs;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline nlohmann::json to_json(const Verdict& v) {
    return {{"name", v.name},           {"inputs", v.inputs},       {"value", v.value},
            {"reference", v.reference}, {"tolerance", v.tolerance}, {"pass", v.pass}};
}

inline Verdict make_verdict(std::string name, nlohmann::json inputs, double value, double reference, double tol,
                            bool relative = false) {
    const double err = std::abs(value - reference);
    const double scale = relative ? std::abs(reference) : 1.0;
    return {std::move(name), std::move(inputs), value, reference, tol, err <= tol * scale};
}

// Symmetric explicit classes used for exhaustive allocation checks: every
// all-s-subsets family and every cyclic-interval family with n <= max_n,
// s <= max_s.
inline std::vector<SupportClass> small_symmetric_classes(std::size_t max_n = 8, std::size_t max_s = 3) {
    std::vector<SupportClass> out;
    for (std::size_t n = 1; n <= max_n; ++n)
        for (std::size_t s = 1; s <= std::min(max_s, n); ++s) {
            out.push_back(SupportClass::explicit_members(n, enumerate_subsets(n, s)));
            out.push_back(SupportClass::cyclic_intervals(n, s));
        }
    return out;
}

// Largest |LP value - m s/|Xi|| over the small symmetric classes, for both
// the max-min and the average objective.
struct AllocationSweep {
    double max_error_maxmin = 0.0;
    double max_error_average = 0.0;
    std::size_t classes = 0;
};

inline AllocationSweep allocation_sweep(const std::vector<double>& budgets = {1.0, 3.5, 10.0}) {
    AllocationSweep sw;
    for (const auto& cls : small_symmetric_classes()) {
        for (double m : budgets) {
            const double ref = m * static_cast<double>(cls.cardinality()) / static_cast<double>(cls.xi_size());
            sw.max_error_maxmin = std::max(sw.max_error_maxmin, std::abs(maxmin_allocation_value(cls, m).value - ref));
            sw.max_error_average =
                std::max(sw.max_error_average, std::abs(average_allocation_value(cls, m).value - ref));
        }
        ++sw.classes;
    }
    return sw;
}

inline std::vector<Verdict> run_verification() {
    std::vector<Verdict> out;
    const auto pairs4 = SupportClass::explicit_members(4, enumerate_subsets(4, 2));
    out.push_back(make_verdict("maxmin_all_pairs_n4", {{"n", 4}, {"s", 2}, {"m", 4}},
                               maxmin_allocation_value(pairs4, 4.0).value, 2.0, 1e-9));
    out.push_back(make_verdict("maxmin_uniform_allocation_optimal", {{"n", 4}, {"s", 2}, {"m", 4}},
                               min_member_mass(pairs4, {1.0, 1.0, 1.0, 1.0}), 2.0, 0.0));
    out.push_back(make_verdict("maxmin_singleton", {{"n", 1}, {"class", "{{1}}"}, {"m", 5}},
                               maxmin_allocation_value(SupportClass::explicit_members(1, {{0}}), 5.0).value, 5.0,
                               1e-9));
    // entry 1 lies in both members, so all of m on it gives min = m = 3,
    // above the symmetric-class value ms/|Xi| = 2
    const auto asym = SupportClass::explicit_members(3, {{0, 1}, {0, 2}});
    out.push_back(make_verdict("maxmin_asymmetric", {{"n", 3}, {"class", "{{1,2},{1,3}}"}, {"m", 3}},
                               maxmin_allocation_value(asym, 3.0).value, 3.0, 1e-9));
    out.push_back(make_verdict("average_all_pairs_n4", {{"n", 4}, {"s", 2}, {"m", 4}},
                               average_allocation_value(pairs4, 4.0).value, 2.0, 1e-9));
    out.push_back(make_verdict("average_asymmetric", {{"n", 3}, {"class", "{{1,2},{1,3}}"}, {"m", 3}},
                               average_allocation_value(asym, 3.0).value, 3.0, 1e-9));

    const auto sweep = allocation_sweep();
    out.push_back(make_verdict("maxmin_symmetric_sweep", {{"max_n", 8}, {"max_s", 3}, {"classes", sweep.classes}},
                               sweep.max_error_maxmin, 0.0, 1e-9));
    out.push_back(make_verdict("average_symmetric_sweep", {{"max_n", 8}, {"max_s", 3}, {"classes", sweep.classes}},
                               sweep.max_error_average, 0.0, 1e-9));

    double worst = 0.0;
    for (std::size_t l = 1; l <= 64; ++l) {
        double sum = 0.0;
        for (std::size_t x = 1; x <= l; ++x) sum += truncated_geometric_pmf(l, x);
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    out.push_back(make_verdict("truncated_geometric_sums", {{"max_l", 64}}, worst, 0.0, 1e-12));
    out.push_back(make_verdict("hypergeometric_n4_s2_draw2_k1", {{"n", 4}, {"s", 2}, {"draw", 2}, {"k", 1}},
                               hypergeometric_pmf(4, 2, 2, 1), 2.0 / 3.0, 1e-12));
    double hsum = 0.0;
    for (std::size_t k = 0; k <= 10; ++k) hsum += hypergeometric_pmf(100, 10, 20, k);
    out.push_back(make_verdict("hypergeometric_sum_n100_s10_draw20", {{"n", 100}, {"s", 10}, {"draw", 20}}, hsum, 1.0,
                               1e-12));

    // reference values from 40-digit evaluations of the closed forms
    out.push_back(make_verdict("detection_lower_golden", {{"xi", 1e4}, {"s", 100}, {"m", 1e4}, {"epsilon", 0.05}},
                               detection_lower_bound(1e4, 100, 1e4, 0.05).value, 0.214596602628934724, 5e-7, true));
    out.push_back(make_verdict("estimation_lower_golden", {{"n", 16384}, {"s", 16}, {"m", 16384}, {"epsilon", 0.05}},
                               estimation_lower_bound(16384, 16, 16384, 0.05).value, 3.18563517757207084, 5e-7,
                               true));
    out.push_back(make_verdict("estimation_upper_golden", {{"n", 65536}, {"s", 1}, {"m", 65536}},
                               estimation_upper_bound(65536, 1, 65536).value, 7.81005453817546573, 5e-7, true));
    out.push_back(make_verdict("mds_sufficient_golden", {{"n", 65536}, {"s", 256}, {"m", 65536}},
                               mds_sufficient_magnitude(65536, 256, 65536).value, 0.331284832568076821, 5e-7, true));

    // a strategy that spreads the budget evenly sits exactly on the cap
    const auto cls = SupportClass::all_subsets(64, 4);
    const auto rep = kl_cap_check(
        [](Sensor& s) { run_uniform(s, default_uniform_threshold(64, 64.0)); }, cls, 1.0, 64.0, 20, Rng(7), 100);
    out.push_back(make_verdict("kl_cap_uniform_saturates", {{"n", 64}, {"s", 4}, {"m", 64}, {"mu", 1}},
                               rep.min_empirical_kl, rep.cap, 1e-12, true));
    out.back().pass = out.back().pass && rep.pass;
    return out;
}

} // namespace adasense
