// strategies.hpp
#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sensing.hpp"

namespace adasense {

// What one run of a sensing-and-inference procedure reports. Estimators set
// `decision` to "estimate non-empty"; detectors report the entries they kept
// as `estimate`.
struct RunOutcome {
    IndexSet estimate;
    bool decision = false;
    bool truncated = false;
};

using Strategy = std::function<RunOutcome(Sensor&)>;

struct EstimateOutcome {
    IndexSet estimate;
    SensingTrace trace;
    bool truncated = false;
};

struct DetectOutcome {
    int decision = 0;
    SensingTrace trace;
};

// ---------------------------------------------------------------------------
// Non-adaptive baseline

inline double default_uniform_threshold(std::size_t n, double m) {
    return std::sqrt(2.0 * std::log(static_cast<double>(n)) * static_cast<double>(n) / m);
}

// Every entry once at precision m/n; keep entries with y >= threshold.
inline RunOutcome run_uniform(Sensor& sensor, double threshold) {
    const std::size_t n = sensor.dimension();
    const double precision = sensor.budget() / static_cast<double>(n);
    RunOutcome out;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = sensor.observe(static_cast<Index>(i), precision);
        if (y >= threshold) out.estimate.push_back(static_cast<Index>(i));
    }
    out.decision = !out.estimate.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Simple distilled sensing: per-entry repeated sign tests.

struct SdsParams {
    std::size_t steps = 1;  // l
    double precision = 1.0; // p

    void validate() const {
        if (steps < 1) throw ValidationError("sds.steps must be >= 1");
        if (!(precision > 0.0)) throw ValidationError("sds.precision must be positive");
    }

    // p = m/(4n), l = round(log2(n)^2) clamped to >= 1.
    static SdsParams defaults(std::size_t n, double m) {
        const double lg = std::log2(static_cast<double>(n));
        SdsParams p;
        p.steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(lg * lg)));
        p.precision = m / (4.0 * static_cast<double>(n));
        return p;
    }
};

struct SdsRun {
    RunOutcome outcome;
    std::vector<std::uint32_t> counts; // c_i per entry, 0 if never measured
    std::size_t measurements = 0;      // k
};

inline SdsRun run_sds(Sensor& sensor, const SdsParams& params) {
    params.validate();
    const std::size_t n = sensor.dimension();
    const double m = sensor.budget();
    const double p = params.precision;
    SdsRun run;
    run.counts.assign(n, 0);
    std::size_t k = 0;
    if (p > m) {
        // not even one measurement fits
        run.outcome.truncated = true;
        return run;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = run.counts[i];
        double y = 0.0;
        do {
            ++k;
            ++c;
            y = sensor.observe(static_cast<Index>(i), p);
            if (p * static_cast<double>(k + 1) > m) {
                run.measurements = k;
                run.outcome.truncated = true;
                run.outcome.decision = !run.outcome.estimate.empty();
                return run;
            }
        } while (c < params.steps && y >= 0.0);
        if (c == params.steps && y >= 0.0) run.outcome.estimate.push_back(static_cast<Index>(i));
    }
    run.measurements = k;
    run.outcome.decision = !run.outcome.estimate.empty();
    return run;
}

// ---------------------------------------------------------------------------
// Distilled sensing: T thresholding stages, then a test stage on survivors.

struct DsParams {
    std::size_t stages = 1;
    std::vector<double> fractions{1.0};  // budget share per stage; remainder funds the test stage
    double threshold_multiplier = 1.5;

    void validate() const {
        if (stages < 1) throw ValidationError("ds.stages must be >= 1");
        if (fractions.size() != stages) throw ValidationError("ds.fractions must have one entry per stage");
        double sum = 0.0;
        for (double f : fractions) {
            if (!(f > 0.0)) throw ValidationError("ds.fractions must be positive");
            sum += f;
        }
        if (sum > 1.0 + 1e-12) throw ValidationError("ds.fractions must sum to at most 1");
        if (!(threshold_multiplier > 0.0)) throw ValidationError("ds.threshold_multiplier must be positive");
    }

    static constexpr double kTestShare = 0.25;

    // T = max(1, ceil(log2 log2 N)); stage shares proportional to (3/4)^t,
    // scaled to 1 - kTestShare.
    static DsParams defaults(std::size_t candidates) {
        DsParams p;
        const double N = static_cast<double>(candidates);
        p.stages = candidates <= 2 ? 1 : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(std::log2(N)))));
        p.fractions.resize(p.stages);
        double w = 1.0, sum = 0.0;
        for (auto& f : p.fractions) {
            w *= 0.75;
            f = w;
            sum += w;
        }
        for (auto& f : p.fractions) f *= (1.0 - kTestShare) / sum;
        return p;
    }
};

struct DsRun {
    IndexSet survivors;                   // action-space indices, ascending
    std::vector<double> final_observations; // aligned with survivors
    double final_precision = 0.0;
    std::vector<std::size_t> stage_sizes; // candidates entering each stage
};

inline DsRun run_distilled_sensing(Sensor& sensor, IndexSet candidates, const DsParams& params) {
    params.validate();
    if (candidates.empty()) throw ValidationError("distilled sensing needs at least one candidate");
    const double m = sensor.budget();
    DsRun run;
    run.survivors = make_index_set(std::move(candidates));
    std::vector<double> obs;
    double used = 0.0;
    for (double f : params.fractions) {
        run.stage_sizes.push_back(run.survivors.size());
        if (run.survivors.empty()) break;
        const double precision = f * m / static_cast<double>(run.survivors.size());
        IndexSet next;
        obs.clear();
        for (Index i : run.survivors) {
            const double y = sensor.observe(i, precision);
            if (y >= 0.0) {
                next.push_back(i);
                obs.push_back(y);
            }
        }
        run.survivors = std::move(next);
        run.final_precision = precision;
        used += f;
    }
    run.final_observations = obs;
    const double test_budget = (1.0 - used) * m;
    if (!run.survivors.empty() && test_budget > 1e-9 * m) {
        const double precision = test_budget / static_cast<double>(run.survivors.size());
        for (std::size_t j = 0; j < run.survivors.size(); ++j)
            run.final_observations[j] = sensor.observe(run.survivors[j], precision);
        run.final_precision = precision;
    }
    return run;
}

// max_j y_j * sqrt(precision) > sqrt(2 ln max(|survivors|, 2)) * multiplier.
inline bool ds_test_fires(const DsRun& run, double multiplier) {
    if (run.survivors.empty()) return false;
    const double scale = std::sqrt(run.final_precision);
    double best = -std::numeric_limits<double>::infinity();
    for (double y : run.final_observations) best = std::max(best, y * scale);
    const double N = static_cast<double>(std::max<std::size_t>(run.survivors.size(), 2));
    return best > std::sqrt(2.0 * std::log(N)) * multiplier;
}

inline RunOutcome run_ds_detect(Sensor& sensor, const std::optional<DsParams>& params) {
    IndexSet all(sensor.dimension());
    std::iota(all.begin(), all.end(), Index{0});
    const DsParams p = params ? *params : DsParams::defaults(all.size());
    auto run = run_distilled_sensing(sensor, std::move(all), p);
    RunOutcome out;
    out.decision = ds_test_fires(run, p.threshold_multiplier);
    out.estimate = std::move(run.survivors);
    return out;
}

// ---------------------------------------------------------------------------
// Subsampled distilled sensing for detection.

inline void require_mds_dimension(std::size_t n) {
    if (n < 16) throw InvalidDimension("mds requires n >= 16 so that ln ln ln n > 0");
}

// ceil(2 n lnlnln(n) / s), capped at n.
inline std::size_t mds_subsample_size(std::size_t n, std::size_t s) {
    require_mds_dimension(n);
    if (s < 1) throw InvalidSparsity("mds requires s >= 1");
    const double N = static_cast<double>(n);
    const double t = std::ceil(2.0 * N * std::log(std::log(std::log(N))) / static_cast<double>(s));
    return std::min<std::size_t>(n, static_cast<std::size_t>(t));
}

inline RunOutcome run_mds(Sensor& sensor, std::size_t s, const std::optional<DsParams>& params,
                          std::size_t subsample_override = 0) {
    const std::size_t n = sensor.dimension();
    const std::size_t draw = subsample_override ? std::min(subsample_override, n) : mds_subsample_size(n, s);
    IndexSet chosen = sample_without_replacement(n, draw, sensor.rng());
    const DsParams p = params ? *params : DsParams::defaults(chosen.size());
    auto run = run_distilled_sensing(sensor, std::move(chosen), p);
    RunOutcome out;
    out.decision = ds_test_fires(run, p.threshold_multiplier);
    out.estimate = std::move(run.survivors);
    return out;
}

// ---------------------------------------------------------------------------
// Parallel sequential probability ratio tests, one per entry.

struct SprtParams {
    double step_precision = 1.0;  // delta
    double log_upper = 1.0;       // a
    double log_lower = -1.0;      // b
    std::size_t max_steps = 1;

    void validate() const {
        if (!(step_precision > 0.0)) throw ValidationError("sprt.step_precision must be positive");
        if (!(log_lower < 0.0 && 0.0 < log_upper)) throw ValidationError("sprt thresholds must satisfy b < 0 < a");
        if (max_steps < 1) throw ValidationError("sprt.max_steps must be >= 1");
    }

    // delta = m/(4n), a = ln((n-s)/eps), b = -ln(s/eps),
    // max_steps = ceil(4 max(a, -b) / (mu^2 delta)); budget-limited when mu = 0.
    static SprtParams defaults(std::size_t n, std::size_t s, double m, double epsilon, double amplitude) {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidEpsilon("sprt epsilon must lie in (0, 1]");
        if (s < 1 || s >= n) throw InvalidSparsity("sprt requires 1 <= s < n");
        SprtParams p;
        p.step_precision = m / (4.0 * static_cast<double>(n));
        p.log_upper = std::log(static_cast<double>(n - s) / epsilon);
        p.log_lower = -std::log(static_cast<double>(s) / epsilon);
        const double drift = amplitude * amplitude * p.step_precision;
        const double cap = std::ceil(m / p.step_precision);
        const double steps = drift > 0.0 ? std::ceil(4.0 * std::max(p.log_upper, -p.log_lower) / drift) : cap;
        p.max_steps = static_cast<std::size_t>(std::clamp(steps, 1.0, cap));
        return p;
    }
};

// Per-measurement log-LR increment of H1: x_i = mu against H0: x_i = 0.
inline double sprt_increment(double y, double precision, double amplitude) {
    return amplitude * precision * y - 0.5 * amplitude * amplitude * precision;
}

// Round-robin over undecided entries; entries still undecided when they hit
// max_steps or when the budget runs out are left out of the estimate.
inline RunOutcome run_sprt(Sensor& sensor, double amplitude, const SprtParams& params) {
    params.validate();
    const std::size_t n = sensor.dimension();
    std::vector<double> llr(n, 0.0);
    std::vector<std::size_t> steps(n, 0);
    std::vector<Index> active(n);
    std::iota(active.begin(), active.end(), Index{0});
    RunOutcome out;
    while (!active.empty()) {
        std::vector<Index> still;
        still.reserve(active.size());
        for (std::size_t j = 0; j < active.size(); ++j) {
            const Index i = active[j];
            if (!sensor.affordable(params.step_precision)) {
                out.truncated = true;
                active.clear();
                still.clear();
                break;
            }
            const double y = sensor.observe(i, params.step_precision);
            llr[i] += sprt_increment(y, params.step_precision, amplitude);
            ++steps[i];
            if (llr[i] >= params.log_upper)
                out.estimate.push_back(i);
            else if (llr[i] > params.log_lower && steps[i] < params.max_steps)
                still.push_back(i);
        }
        active = std::move(still);
    }
    std::sort(out.estimate.begin(), out.estimate.end());
    out.decision = !out.estimate.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Random relabeling wrapper.

// Runs `base` against the signal relabeled by `perm` (perm[i] = pi(i)): base
// action a measures entry pi^{-1}(a), and base output j maps back to pi^{-1}(j).
inline RunOutcome run_relabeled(const Strategy& base, Sensor& sensor, const std::vector<Index>& perm) {
    const std::size_t n = sensor.dimension();
    if (perm.size() != n) throw ValidationError("permutation size must equal the signal dimension");
    std::vector<Index> inverse(n);
    for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = static_cast<Index>(i);
    auto previous = sensor.push_relabeling(inverse);
    RunOutcome out;
    try {
        out = base(sensor);
    } catch (...) {
        sensor.restore_relabeling(std::move(previous));
        throw;
    }
    sensor.restore_relabeling(std::move(previous));
    IndexSet mapped;
    mapped.reserve(out.estimate.size());
    for (Index j : out.estimate) mapped.push_back(inverse[j]);
    out.estimate = make_index_set(std::move(mapped));
    return out;
}

inline Strategy symmetrize(Strategy base) {
    return [base = std::move(base)](Sensor& sensor) {
        const auto perm = random_permutation(sensor.dimension(), sensor.rng());
        return run_relabeled(base, sensor, perm);
    };
}

// ---------------------------------------------------------------------------
// Single-run entry points on a ground-truth signal.

inline EstimateOutcome non_adaptive_uniform_estimate(const SparseSignal& signal, double m, double threshold, Rng rng) {
    Sensor sensor(signal, BudgetLedger(m), rng);
    auto out = run_uniform(sensor, threshold);
    return {std::move(out.estimate), sensor.take_trace(), false};
}

inline EstimateOutcome simple_distilled_sensing(const SparseSignal& signal, double m, const SdsParams& params, Rng rng) {
    Sensor sensor(signal, BudgetLedger(m), rng);
    auto run = run_sds(sensor, params);
    return {std::move(run.outcome.estimate), sensor.take_trace(), run.outcome.truncated};
}

struct DistilledSensingOutcome {
    IndexSet survivors;
    std::vector<double> final_observations;
    double final_precision = 0.0;
    SensingTrace trace;
};

inline DistilledSensingOutcome distilled_sensing(const SparseSignal& signal, IndexSet candidates, double m,
                                                 const DsParams& params, Rng rng) {
    Sensor sensor(signal, BudgetLedger(m), rng);
    auto run = run_distilled_sensing(sensor, std::move(candidates), params);
    return {std::move(run.survivors), std::move(run.final_observations), run.final_precision, sensor.take_trace()};
}

inline DetectOutcome mds_detect(const SparseSignal& signal, std::size_t s, double m, const std::optional<DsParams>& ds,
                                Rng rng) {
    require_mds_dimension(signal.dimension());
    Sensor sensor(signal, BudgetLedger(m), rng);
    auto out = run_mds(sensor, s, ds);
    return {out.decision ? 1 : 0, sensor.take_trace()};
}

inline EstimateOutcome parallel_sprt_estimate(const SparseSignal& signal, double m, const SprtParams& params, Rng rng) {
    Sensor sensor(signal, BudgetLedger(m), rng);
    auto out = run_sprt(sensor, signal.amplitude(), params);
    return {std::move(out.estimate), sensor.take_trace(), out.truncated};
}

// ---------------------------------------------------------------------------
// Named strategies: "uniform", "sds", "ds", "mds", "sprt", optionally
// prefixed with "sym:".

struct StrategyOptions {
    std::optional<double> uniform_threshold;
    std::optional<SdsParams> sds;
    std::optional<DsParams> ds;
    std::optional<SprtParams> sprt;
    double sprt_epsilon = 0.1;
};

// Problem facts a strategy is allowed to know.
struct ProblemSpec {
    std::size_t n = 1;
    std::size_t s = 1;
    double m = 1.0;
    double amplitude = 0.0;
};

inline const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names{"uniform", "sds", "ds", "mds", "sprt"};
    return names;
}

inline bool is_known_strategy(const std::string& id) {
    const std::string base = id.rfind("sym:", 0) == 0 ? id.substr(4) : id;
    const auto& names = strategy_names();
    return std::find(names.begin(), names.end(), base) != names.end();
}

// Checks preconditions eagerly so configuration mistakes surface before any trial runs.
inline Strategy make_strategy(const std::string& id, const ProblemSpec& problem, const StrategyOptions& opts = {}) {
    if (id.rfind("sym:", 0) == 0) return symmetrize(make_strategy(id.substr(4), problem, opts));
    if (problem.n < 1) throw InvalidDimension("n must be positive");
    if (id == "uniform") {
        const double tau = opts.uniform_threshold.value_or(default_uniform_threshold(problem.n, problem.m));
        return [tau](Sensor& s) { return run_uniform(s, tau); };
    }
    if (id == "sds") {
        const SdsParams p = opts.sds.value_or(SdsParams::defaults(problem.n, problem.m));
        p.validate();
        return [p](Sensor& s) { return run_sds(s, p).outcome; };
    }
    if (id == "ds") {
        if (opts.ds) opts.ds->validate();
        auto p = opts.ds;
        return [p](Sensor& s) { return run_ds_detect(s, p); };
    }
    if (id == "mds") {
        mds_subsample_size(problem.n, problem.s);
        if (opts.ds) opts.ds->validate();
        auto p = opts.ds;
        const std::size_t s = problem.s;
        return [p, s](Sensor& sensor) { return run_mds(sensor, s, p); };
    }
    if (id == "sprt") {
        const SprtParams p =
            opts.sprt.value_or(SprtParams::defaults(problem.n, problem.s, problem.m, opts.sprt_epsilon, problem.amplitude));
        p.validate();
        const double mu = problem.amplitude;
        return [p, mu](Sensor& s) { return run_sprt(s, mu, p); };
    }
    throw ConfigError("unknown strategy '" + id + "' (expected uniform, sds, ds, mds, sprt, optionally prefixed sym:)");
}

} // namespace adasense
