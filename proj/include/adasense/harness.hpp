// harness.hpp
//
// Monte Carlo experiment runner. Every trial draws from a stream keyed by
// (seed, grid point, trial), so a curve is a pure function of its config no
// matter how many threads run it.
#pragma once
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "strategies.hpp"

namespace adasense {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"risk_sum",      "risk_max",   "risk_bayes",
                                                "mean_sym_diff", "exact_fail", "fdr_ndr"};
    return names;
}

inline bool is_detection_metric(const std::string& id) {
    return id == "risk_sum" || id == "risk_max" || id == "risk_bayes";
}

struct ExperimentConfig {
    std::string strategy = "sds";
    std::size_t n = 1024;
    std::size_t s = 4;
    double m = 1024.0;
    std::vector<double> amplitudes;
    std::size_t trials = 200;
    std::string metric = "mean_sym_diff";
    std::uint64_t seed = 1;
    std::size_t support_grid = 32;
    bool redraw_supports = false;
    StrategyOptions options;
    // Overrides `strategy` when set; lets tests plug in estimators outside the registry.
    std::function<Strategy(const ProblemSpec&)> factory;

    void validate() const {
        if (trials < 2) throw ValidationError("trials must be at least 2");
        if (amplitudes.empty()) throw ValidationError("amplitudes must be non-empty");
        if (n < 1) throw InvalidDimension("n must be positive");
        if (s < 1 || s > n) throw InvalidSparsity("s must lie in [1, n]");
        if (!(m > 0.0)) throw ValidationError("m must be positive");
        if (support_grid < 1) throw ValidationError("support_grid must be at least 1");
        for (double a : amplitudes)
            if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("amplitudes must be finite and non-negative");
        if (std::find(metric_names().begin(), metric_names().end(), metric) == metric_names().end())
            throw ConfigError("unknown metric '" + metric + "'");
        if (!factory && !is_known_strategy(strategy)) throw ConfigError("unknown strategy '" + strategy + "'");
    }
};

struct CurvePoint {
    std::size_t s = 0;
    double mu = 0.0;
    double risk = 0.0;
    double se = 0.0;
    std::size_t trials = 0;

    bool operator==(const CurvePoint&) const = default;
};

struct RiskCurve {
    std::vector<CurvePoint> points;
    nlohmann::json metadata;
};

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace detail {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

inline std::vector<double> amplitude_grid(const nlohmann::json& j) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("field 'amplitudes' must hold numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }
    if (j.is_object()) {
        double start = 0.0, stop = 0.0;
        std::size_t count = 0;
        read_if(j, "start", start);
        read_if(j, "stop", stop);
        read_if(j, "count", count);
        if (count < 1) throw ConfigError("field 'amplitudes.count' must be at least 1");
        if (count == 1) return {start};
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i)
            v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
        return v;
    }
    throw ConfigError("field 'amplitudes' must be a list or {start, stop, count}");
}

} // namespace detail

inline StrategyOptions options_from_json(const nlohmann::json& j) {
    StrategyOptions o;
    if (j.contains("uniform_threshold")) o.uniform_threshold = j.at("uniform_threshold").get<double>();
    detail::read_if(j, "sprt_epsilon", o.sprt_epsilon);
    if (j.contains("sds")) {
        SdsParams p;
        detail::read_if(j.at("sds"), "steps", p.steps);
        detail::read_if(j.at("sds"), "precision", p.precision);
        o.sds = p;
    }
    if (j.contains("ds")) {
        DsParams p;
        detail::read_if(j.at("ds"), "stages", p.stages);
        detail::read_if(j.at("ds"), "fractions", p.fractions);
        detail::read_if(j.at("ds"), "threshold_multiplier", p.threshold_multiplier);
        o.ds = p;
    }
    if (j.contains("sprt")) {
        SprtParams p;
        detail::read_if(j.at("sprt"), "step_precision", p.step_precision);
        detail::read_if(j.at("sprt"), "log_upper", p.log_upper);
        detail::read_if(j.at("sprt"), "log_lower", p.log_lower);
        detail::read_if(j.at("sprt"), "max_steps", p.max_steps);
        o.sprt = p;
    }
    return o;
}

inline nlohmann::json to_json(const StrategyOptions& o) {
    nlohmann::json j = nlohmann::json::object();
    if (o.uniform_threshold) j["uniform_threshold"] = *o.uniform_threshold;
    j["sprt_epsilon"] = o.sprt_epsilon;
    if (o.sds) j["sds"] = {{"steps", o.sds->steps}, {"precision", o.sds->precision}};
    if (o.ds)
        j["ds"] = {{"stages", o.ds->stages},
                   {"fractions", o.ds->fractions},
                   {"threshold_multiplier", o.ds->threshold_multiplier}};
    if (o.sprt)
        j["sprt"] = {{"step_precision", o.sprt->step_precision},
                     {"log_upper", o.sprt->log_upper},
                     {"log_lower", o.sprt->log_lower},
                     {"max_steps", o.sprt->max_steps}};
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    detail::read_if(j, "strategy", c.strategy);
    detail::read_if(j, "n", c.n);
    detail::read_if(j, "s", c.s);
    detail::read_if(j, "m", c.m);
    if (!j.contains("m")) c.m = static_cast<double>(c.n);
    if (j.contains("amplitudes")) c.amplitudes = detail::amplitude_grid(j.at("amplitudes"));
    detail::read_if(j, "trials", c.trials);
    detail::read_if(j, "metric", c.metric);
    detail::read_if(j, "seed", c.seed);
    detail::read_if(j, "support_grid", c.support_grid);
    detail::read_if(j, "redraw_supports", c.redraw_supports);
    if (j.contains("options")) {
        try {
            c.options = options_from_json(j.at("options"));
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("field 'options' is malformed");
        }
    }
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"strategy", c.strategy},   {"n", c.n},
            {"s", c.s},                 {"m", c.m},
            {"amplitudes", c.amplitudes}, {"trials", c.trials},
            {"metric", c.metric},       {"seed", c.seed},
            {"support_grid", c.support_grid}, {"redraw_supports", c.redraw_supports},
            {"options", to_json(c.options)}};
}

// ---------------------------------------------------------------------------
// Running

namespace detail {

inline std::string coords(std::size_t point, double mu) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "grid point %zu (mu=%.17g)", point, mu);
    return buf;
}

// Re-raises a strategy failure with the trial that produced it.
inline Strategy tag_trials(Strategy inner) {
    return [inner = std::move(inner)](Sensor& sensor) -> RunOutcome {
        try {
            return inner(sensor);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " [trial " + std::to_string(sensor.trace().seed) + "]");
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) + " [trial " + std::to_string(sensor.trace().seed) + "]");
        }
    };
}

inline CurvePoint evaluate_point(const ExperimentConfig& c, std::size_t point, double mu) {
    const ProblemSpec problem{c.n, c.s, c.m, mu};
    const Strategy strategy = tag_trials(c.factory ? c.factory(problem) : make_strategy(c.strategy, problem, c.options));
    const auto cls = SupportClass::all_subsets(c.n, c.s);
    const Rng rng(c.seed, {point});
    const SupportGrid grid{c.support_grid, c.redraw_supports};
    CurvePoint p{c.s, mu, 0.0, 0.0, c.trials};
    if (is_detection_metric(c.metric)) {
        const auto r = detection_risk(strategy, cls, mu, c.m, c.trials, rng, grid);
        if (c.metric == "risk_sum") {
            p.risk = r.risk_sum;
            p.se = r.se_sum;
        } else if (c.metric == "risk_max") {
            p.risk = r.risk_max;
            p.se = r.se_max;
        } else {
            p.risk = r.risk_bayes;
            p.se = r.se_bayes;
        }
    } else {
        const auto r = estimation_risk(strategy, cls, mu, c.m, c.trials, rng, grid);
        if (c.metric == "mean_sym_diff") {
            p.risk = r.mean_sym_diff;
            p.se = r.se_sym_diff;
        } else if (c.metric == "exact_fail") {
            p.risk = r.exact_fail;
            p.se = r.se_exact_fail;
        } else {
            p.risk = r.fdr + r.ndr;
            p.se = std::hypot(r.se_fdr, r.se_ndr);
        }
    }
    return p;
}

} // namespace detail

inline nlohmann::json curve_metadata(const ExperimentConfig& c) {
    return {{"config", to_json(c)}, {"version", kVersion}};
}

inline RiskCurve run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::size_t> order(config.amplitudes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return config.amplitudes[a] < config.amplitudes[b]; });
    RiskCurve curve;
    curve.metadata = curve_metadata(config);
    for (std::size_t point : order) {
        const double mu = config.amplitudes[point];
        try {
            curve.points.push_back(detail::evaluate_point(config, point, mu));
        } catch (const ValidationError& e) {
            throw ValidationError(detail::coords(point, mu) + ": " + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(detail::coords(point, mu) + ": " + e.what());
        }
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Threshold scans

struct ScanResult {
    std::optional<double> mu_star;  // empty: target not reached on the grid
    std::vector<std::string> warnings;
    RiskCurve curve;
};

// Smallest mu whose risk + 2 se falls below `target`, interpolated linearly
// against the preceding grid point.
inline ScanResult threshold_from_curve(RiskCurve curve, double target) {
    ScanResult out;
    const auto& pts = curve.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1].risk > pts[i].risk + 2.0 * std::hypot(pts[i].se, pts[i + 1].se)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "risk increases from mu=%.6g to mu=%.6g (%.6g -> %.6g)", pts[i].mu,
                          pts[i + 1].mu, pts[i].risk, pts[i + 1].risk);
            out.warnings.emplace_back(buf);
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double hi = pts[i].risk + 2.0 * pts[i].se;
        if (!(hi < target)) continue;
        if (i == 0) {
            out.mu_star = pts[0].mu;
        } else {
            const double lo_mu = pts[i - 1].mu;
            const double prev = pts[i - 1].risk + 2.0 * pts[i - 1].se;
            const double frac = prev > hi ? (prev - target) / (prev - hi) : 1.0;
            out.mu_star = lo_mu + std::clamp(frac, 0.0, 1.0) * (pts[i].mu - lo_mu);
        }
        break;
    }
    out.curve = std::move(curve);
    return out;
}

inline ScanResult threshold_scan(const ExperimentConfig& config, double target) {
    if (!(target > 0.0)) throw ValidationError("target_risk must be positive");
    auto res = threshold_from_curve(run_experiment(config), target);
    res.curve.metadata["target_risk"] = target;
    return res;
}

struct PhaseRow {
    std::size_t s = 0;
    ScanResult scan;
};

struct PhaseDiagram {
    std::vector<PhaseRow> rows;
    nlohmann::json metadata;
};

inline PhaseDiagram phase_diagram(const ExperimentConfig& base, const std::vector<std::size_t>& s_grid, double target) {
    if (s_grid.empty()) throw ValidationError("s_grid must be non-empty");
    PhaseDiagram pd;
    pd.metadata = curve_metadata(base);
    pd.metadata["s_grid"] = s_grid;
    pd.metadata["target_risk"] = target;
    for (std::size_t s : s_grid) {
        ExperimentConfig c = base;
        c.s = s;
        pd.rows.push_back({s, threshold_scan(c, target)});
    }
    return pd;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_rows(std::ostream& os, const std::vector<CurvePoint>& pts) {
    for (const auto& p : pts)
        os << p.s << ',' << fmt17(p.mu) << ',' << fmt17(p.risk) << ',' << fmt17(p.se) << ',' << p.trials << '\n';
}
} // namespace detail

inline void write_curve_csv(std::ostream& os, const RiskCurve& curve) {
    os << "# " << curve.metadata.dump() << '\n';
    os << "s,mu,risk,se,trials\n";
    detail::write_rows(os, curve.points);
}

inline void write_phase_csv(std::ostream& os, const PhaseDiagram& pd) {
    nlohmann::json meta = pd.metadata;
    nlohmann::json stars = nlohmann::json::array();
    for (const auto& r : pd.rows)
        stars.push_back({{"s", r.s}, {"mu_star", r.scan.mu_star ? nlohmann::json(*r.scan.mu_star) : nlohmann::json()}});
    meta["mu_star"] = stars;
    os << "# " << meta.dump() << '\n';
    os << "s,mu,risk,se,trials\n";
    for (const auto& r : pd.rows) detail::write_rows(os, r.scan.curve.points);
}

inline RiskCurve read_curve_csv(std::istream& is) {
    RiskCurve curve;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            try {
                curve.metadata = nlohmann::json::parse(line.substr(1));
            } catch (const nlohmann::json::exception&) {
                throw ConfigError("malformed metadata line in curve CSV");
            }
            continue;
        }
        if (!header) {
            if (line != "s,mu,risk,se,trials") throw ConfigError("unexpected curve CSV header: " + line);
            header = true;
            continue;
        }
        CurvePoint p;
        std::istringstream ls(line);
        std::string f[5];
        for (auto& field : f)
            if (!std::getline(ls, field, ',')) throw ConfigError("short row in curve CSV: " + line);
        try {
            p.s = std::stoull(f[0]);
            p.mu = std::stod(f[1]);
            p.risk = std::stod(f[2]);
            p.se = std::stod(f[3]);
            p.trials = std::stoull(f[4]);
        } catch (const std::exception&) {
            throw ConfigError("unparsable row in curve CSV: " + line);
        }
        curve.points.push_back(p);
    }
    return curve;
}

inline nlohmann::json to_json(const CurvePoint& p) {
    return {{"s", p.s}, {"mu", p.mu}, {"risk", p.risk}, {"se", p.se}, {"trials", p.trials}};
}

inline nlohmann::json to_json(const RiskCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back(to_json(p));
    return {{"metadata", c.metadata}, {"points", pts}};
}

inline RiskCurve curve_from_json(const nlohmann::json& j) {
    RiskCurve c;
    c.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& p : j.at("points"))
        c.points.push_back({p.at("s").get<std::size_t>(), p.at("mu").get<double>(), p.at("risk").get<double>(),
                            p.at("se").get<double>(), p.at("trials").get<std::size_t>()});
    return c;
}

inline nlohmann::json to_json(const ScanResult& r) {
    nlohmann::json j = to_json(r.curve);
    j["mu_star"] = r.mu_star ? nlohmann::json(*r.mu_star) : nlohmann::json();
    j["reached"] = r.mu_star.has_value();
    j["warnings"] = r.warnings;
    return j;
}

inline nlohmann::json to_json(const PhaseDiagram& pd) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : pd.rows) {
        nlohmann::json row = to_json(r.scan);
        row.erase("metadata");
        row["s"] = r.s;
        rows.push_back(std::move(row));
    }
    return {{"metadata", pd.metadata}, {"rows", rows}};
}

} // namespace adasense
