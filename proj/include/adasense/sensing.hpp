// sensing.hpp
#pragma once
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace adasense {

enum class BudgetMode { hard, expected };

// Precision budget: the sum of all measurement precisions gamma^2 is capped
// at `total` (hard mode) or only tracked (expected mode).
class BudgetLedger {
public:
    explicit BudgetLedger(double total, BudgetMode mode = BudgetMode::hard) : total_(total), mode_(mode) {
        if (!(total > 0.0) || !std::isfinite(total)) throw ValidationError("budget m must be a positive finite number");
    }

    double total() const { return total_; }
    double spent() const { return spent_ + carry_; }
    double remaining() const { return total_ - spent(); }
    BudgetMode mode() const { return mode_; }
    bool overrun() const { return overrun_; }

    // Accumulated sums of p stay within a few ulps of k*p; the slack keeps an
    // exactly-budgeted allocation from tripping on rounding.
    bool affordable(double precision) const { return spent() + precision <= total_ * (1.0 + kSlack); }

    void charge(double precision) {
        if (!affordable(precision)) {
            if (mode_ == BudgetMode::hard) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "precision %.17g requested with %.17g of %.17g already spent", precision,
                              spent(), total_);
                throw BudgetExceeded(buf);
            }
            overrun_ = true;
        }
        // Neumaier-compensated running sum
        const double t = spent_ + precision;
        if (std::abs(spent_) >= std::abs(precision))
            carry_ += (spent_ - t) + precision;
        else
            carry_ += (precision - t) + spent_;
        spent_ = t;
    }

    static constexpr double kSlack = 1e-12;

private:
    double total_;
    double spent_ = 0.0;
    double carry_ = 0.0;
    BudgetMode mode_;
    bool overrun_ = false;
};

struct SensingRecord {
    std::size_t k;     // 1-based measurement counter
    Index action;      // entry actually measured
    double precision;  // gamma^2
    double y;
};

struct SensingTrace {
    std::vector<SensingRecord> records;
    BudgetLedger ledger{1.0};
    std::uint64_t seed = 0;

    double precision_sum() const {
        double acc = 0.0;
        for (const auto& r : records) acc += r.precision;
        return acc;
    }
};

// Measurement engine bound to one ground-truth signal. Every strategy talks to
// the world only through `observe`; an optional relabeling maps the actions a
// strategy issues onto true entries (used by the symmetrization wrapper).
class Sensor {
public:
    Sensor(const SparseSignal& signal, BudgetLedger ledger, Rng rng, std::uint64_t seed = 0)
        : signal_(&signal), rng_(rng) {
        trace_.ledger = ledger;
        trace_.seed = seed;
    }
    // the sensor keeps a pointer to the signal, so temporaries would dangle
    Sensor(SparseSignal&&, BudgetLedger, Rng, std::uint64_t = 0) = delete;

    std::size_t dimension() const { return signal_->dimension(); }
    double budget() const { return trace_.ledger.total(); }
    double spent() const { return trace_.ledger.spent(); }
    double remaining() const { return trace_.ledger.remaining(); }
    bool affordable(double precision) const { return trace_.ledger.affordable(precision); }
    std::size_t measurements() const { return trace_.records.size(); }

    // y = x_a + precision^{-1/2} Z.
    double observe(Index action, double precision) {
        if (action >= dimension())
            throw InvalidAction("action " + std::to_string(action + 1) + " outside {1.." + std::to_string(dimension()) + "}");
        if (!(precision > 0.0)) throw ValidationError("measurement precision must be positive");
        const Index entry = relabel_.empty() ? action : relabel_[action];
        trace_.ledger.charge(precision);
        const double y = signal_->value(entry) + rng_.normal() / std::sqrt(precision);
        trace_.records.push_back({trace_.records.size() + 1, entry, precision, y});
        return y;
    }

    // Auxiliary randomness for strategies (subsampling, permutations, coin flips).
    Rng& rng() { return rng_; }

    const SensingTrace& trace() const { return trace_; }
    SensingTrace take_trace() { return std::move(trace_); }

    // Installs `map` (strategy action -> outer action) on top of any existing
    // relabeling and returns the previous one for restore_relabeling.
    std::vector<Index> push_relabeling(const std::vector<Index>& map) {
        std::vector<Index> previous = relabel_;
        std::vector<Index> composed(map.size());
        for (std::size_t a = 0; a < map.size(); ++a) composed[a] = previous.empty() ? map[a] : previous[map[a]];
        relabel_ = std::move(composed);
        return previous;
    }
    void restore_relabeling(std::vector<Index> previous) { relabel_ = std::move(previous); }

private:
    const SparseSignal* signal_;
    Rng rng_;
    SensingTrace trace_;
    std::vector<Index> relabel_;
};

// log LR_{A,B}(trace): sum over records of the log ratio of Gaussian
// observation densities under supports A and B at common amplitude mu.
inline double log_likelihood_ratio(const SensingTrace& trace, const IndexSet& support_a, const IndexSet& support_b,
                                   double amplitude) {
    double acc = 0.0;
    for (const auto& r : trace.records) {
        const bool in_a = contains(support_a, r.action);
        const bool in_b = contains(support_b, r.action);
        if (in_a == in_b) continue;
        const double ma = in_a ? amplitude : 0.0;
        const double mb = in_b ? amplitude : 0.0;
        const double da = r.y - ma;
        const double db = r.y - mb;
        acc += r.precision * (-0.5 * da * da + 0.5 * db * db);
    }
    return acc;
}

// Per-trial conditional expectation of log LR_{null,S} given the actions:
// (mu^2/2) * sum of precision spent inside S.
inline double conditional_null_kl(const SensingTrace& trace, const IndexSet& support, double amplitude) {
    double acc = 0.0;
    for (const auto& r : trace.records)
        if (contains(support, r.action)) acc += r.precision;
    return 0.5 * amplitude * amplitude * acc;
}

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t trials = 0;
};

inline MeanEstimate mean_and_se(const std::vector<double>& xs) {
    MeanEstimate e;
    e.trials = xs.size();
    if (xs.empty()) return e;
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

// A sensing procedure run for its trace only (KL checks do not need its output).
using SensingProcedure = std::function<void(Sensor&)>;

// Runs `strategy` under the null signal and averages the conditional KL
// against `alt_support`.
inline MeanEstimate empirical_kl_under_null(const SensingProcedure& strategy, std::size_t n, double m,
                                            const IndexSet& alt_support, double amplitude, std::size_t trials,
                                            const Rng& rng) {
    if (trials < 2) throw ValidationError("trials must be at least 2");
    const auto null_signal = SparseSignal::null(n);
    std::vector<double> vals;
    vals.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Sensor sensor(null_signal, BudgetLedger(m), rng.derive({t}));
        strategy(sensor);
        vals.push_back(conditional_null_kl(sensor.trace(), alt_support, amplitude));
    }
    return mean_and_se(vals);
}

// Line-oriented trace format: header "k,a,gamma2,y", 1-based actions, 17
// significant digits.
inline void write_trace_csv(std::ostream& os, const SensingTrace& trace) {
    os << "k,a,gamma2,y\n";
    char buf[128];
    for (const auto& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%zu,%u,%.17g,%.17g\n", r.k, static_cast<unsigned>(r.action) + 1, r.precision, r.y);
        os << buf;
    }
}

inline std::vector<SensingRecord> read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "k,a,gamma2,y") throw ConfigError("trace csv: missing header k,a,gamma2,y");
    std::vector<SensingRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t k = 0;
        unsigned a = 0;
        double g = 0, y = 0;
        if (std::sscanf(line.c_str(), "%zu,%u,%lf,%lf", &k, &a, &g, &y) != 4 || a == 0)
            throw ConfigError("trace csv: malformed row '" + line + "'");
        out.push_back({k, static_cast<Index>(a - 1), g, y});
    }
    return out;
}

} // namespace adasense
