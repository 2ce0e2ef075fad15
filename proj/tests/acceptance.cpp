// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff every
// gating criterion passes.
#include <sys/wait.h>

#include <chrono>
#include <cstdarg>
#include <limits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "adasense/adasense.hpp"

using namespace adasense;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int k, bool pass, const std::string& detail, bool gating = true) {
    std::printf("%s criterion %d: %s%s\n", pass ? "PASS" : "FAIL", k, detail.c_str(),
                gating ? "" : " [informational]");
    std::fflush(stdout);
    if (!pass && gating) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double phi_c(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// 1. max-min and average allocation LPs on symmetric classes
void criterion1() {
    const double tol = 1e-9, time_limit = 30.0;
    const auto t0 = Clock::now();
    const auto sw = allocation_sweep({1.0, 3.5, 10.0});
    const double dt = seconds_since(t0);
    const bool pass = sw.max_error_maxmin <= tol && sw.max_error_average <= tol && dt < time_limit;
    report(1, pass,
           fmt("%zu classes, max |maxmin - ms/|Xi|| = %.3g, max |average - ms/|Xi|| = %.3g (tol %.0e), %.2f s (< %.0f s)",
               sw.classes, sw.max_error_maxmin, sw.max_error_average, tol, dt, time_limit));
}

// 2. KL cap for every registered strategy
void criterion2() {
    const std::size_t n = 64, s = 4, trials = 2000, supports = 100;
    const double m = 64, mu = 1, time_limit = 120.0;
    const auto cls = SupportClass::all_subsets(n, s);
    const auto t0 = Clock::now();
    bool all = true;
    std::string detail;
    for (const auto& name : strategy_names()) {
        const auto strat = make_strategy(name, {n, s, m, mu});
        const auto rep = kl_cap_check([&](Sensor& sensor) { strat(sensor); }, cls, mu, m, trials,
                                      Rng(2024, {0xa2}), supports);
        all = all && rep.pass;
        detail += fmt("%s %.4f (se %.4f)%s; ", name.c_str(), rep.min_empirical_kl, rep.max_se, rep.pass ? "" : " OVER");
    }
    const double dt = seconds_since(t0);
    const double cap = mu * mu * m * double(s) / (2.0 * double(n));
    report(2, all && dt < time_limit,
           fmt("min KL vs cap %.4f + 3 se: ", cap) + detail + fmt("%.1f s (< %.0f s)", dt, time_limit));
}

// 3. SDS counter law under the null
void criterion3() {
    const std::size_t n = 10000, l = 8, min_entries = 100000;
    const double m = double(n), tol = 0.01;
    const SdsParams params{l, m / (4.0 * double(n))};
    const auto x = SparseSignal::null(n);
    const std::size_t runs = (min_entries + n - 1) / n;
    auto counts = parallel_map<std::vector<std::uint32_t>>(runs, [&](std::size_t r) {
        Sensor sensor(x, BudgetLedger(m), Rng(33, {r}), r);
        return run_sds(sensor, params).counts;
    });
    std::vector<double> hist(l + 1, 0.0);
    std::size_t entries = 0;
    for (const auto& c : counts)
        for (auto v : c) {
            hist[std::min<std::size_t>(v, l)] += 1.0;
            ++entries;
        }
    double worst = hist[0] / double(entries);  // reference mass at 0 is nil
    for (std::size_t v = 1; v <= l; ++v)
        worst = std::max(worst, std::abs(hist[v] / double(entries) - truncated_geometric_pmf(l, v)));
    report(3, entries >= min_entries && worst <= tol,
           fmt("%zu entries, max |empirical - exact| = %.4f (tol %.2f)", entries, worst, tol));
}

// 4. SDS recovery at the sufficient amplitude
double sds_mean_d = -1.0;
void criterion4() {
    const std::size_t n = 1u << 14, s = 4, trials = 200;
    const double m = double(n), limit = 0.5, time_limit = 300.0;
    const double mu = estimation_upper_bound(double(n), double(s), m).value;
    const auto params = SdsParams::defaults(n, m);
    const auto t0 = Clock::now();
    struct Trial {
        double d = 0;
        bool within = false;
        bool threw = false;
    };
    auto res = parallel_map<Trial>(trials, [&](std::size_t t) {
        Rng r(44, {t});
        Rng pick = r.derive({1});
        const auto S = sample_without_replacement(n, s, pick);
        const SparseSignal x(n, S, mu);
        Sensor sensor(x, BudgetLedger(m), r, t);
        Trial out;
        try {
            const auto run = run_sds(sensor, params);
            out.d = double(sym_diff_error(run.outcome.estimate, S));
        } catch (const BudgetExceeded&) {
            out.threw = true;
        }
        out.within = sensor.spent() <= m;
        return out;
    });
    double sum = 0;
    std::size_t over = 0;
    for (const auto& r : res) {
        sum += r.d;
        over += (r.threw || !r.within) ? 1 : 0;
    }
    sds_mean_d = sum / double(trials);
    const double dt = seconds_since(t0);
    report(4, sds_mean_d <= limit && over == 0 && dt < time_limit,
           fmt("mu = %.6f, mean d = %.4f (<= %.1f), budget overruns %zu of %zu, %.1f s", mu, sds_mean_d, limit, over,
               trials, dt));
}

// 5. MDS detection at the sufficient amplitude
void criterion5() {
    const std::size_t n = 1u << 16, s = 256, trials = 500;
    const double m = double(n), risk_limit = 0.2, fa_limit = 0.1;
    const double mu = mds_sufficient_magnitude(double(n), double(s), m).value;
    const auto r = detection_risk(make_strategy("mds", {n, s, m, mu}), SupportClass::all_subsets(n, s), mu, m, trials,
                                  Rng(55), {1, true});
    report(5, r.risk_sum <= risk_limit && r.p_null <= fa_limit,
           fmt("mu = %.6f, R = %.4f (se %.4f, <= %.1f), false alarm %.4f (<= %.1f), miss %.4f", mu, r.risk_sum,
               r.se_sum, risk_limit, r.p_null, fa_limit, r.miss[0]));
}

// 6. MDS subsample overlap law
void criterion6() {
    const std::size_t n = 100, s = 10, draw = 20, draws = 100000;
    const double tol = 0.02;
    const auto x = SparseSignal::null(n);
    auto overlap = parallel_map<std::size_t>(draws, [&](std::size_t t) {
        Sensor sensor(x, BudgetLedger(double(n)), Rng(66, {t}), t);
        run_mds(sensor, s, std::nullopt, draw);
        // every subsampled entry is measured in the first distillation stage
        std::vector<bool> seen(n, false);
        for (const auto& rec : sensor.trace().records) seen[rec.action] = true;
        std::size_t chosen = 0, k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            chosen += seen[i];
            if (i < s) k += seen[i];
        }
        return chosen == draw ? k : std::size_t(1000);
    });
    std::vector<double> hist(s + 1, 0.0);
    bool sizes_ok = true;
    for (auto k : overlap) {
        if (k > s) {
            sizes_ok = false;
            continue;
        }
        hist[k] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t k = 0; k <= s; ++k) tv += std::abs(hist[k] / double(draws) - hypergeometric_pmf(n, s, draw, k));
    tv /= 2.0;
    report(6, sizes_ok && tv <= tol, fmt("%zu draws of %zu from %zu, TV = %.4f (tol %.2f)", draws, draw, n, tv, tol));
}

// 7. R- <= R <= 2 R~ <= 2 R on exact error probabilities of random linear tests
void criterion7() {
    const int tests = 200;
    Rng r(77);
    int ok = 0;
    for (int t = 0; t < tests; ++t) {
        const std::size_t n = 2 + r.below(5);
        const std::size_t s = 1 + r.below(n - 1);
        const auto all = enumerate_subsets(n, s);
        std::vector<IndexSet> members;
        for (const auto& S : all)
            if (r.bernoulli(0.6)) members.push_back(S);
        if (members.empty()) members.push_back(all[r.below(all.size())]);
        const auto cls = SupportClass::explicit_members(n, members);
        // reject iff sum_i w_i y_i > c with y_i ~ N(mu 1{i in S}, sigma^2)
        std::vector<double> w(n);
        for (auto& v : w) v = r.normal();
        const double c = 2.0 * r.normal(), mu = 3.0 * r.uniform(), sigma = 0.2 + r.uniform();
        double norm = 0;
        for (double v : w) norm += v * v;
        const double sd = sigma * std::sqrt(norm);
        const double p_null = phi_c(c / sd);
        std::vector<double> miss;
        for (const auto& S : cls.members()) {
            double shift = 0;
            for (Index i : S) shift += mu * w[i];
            miss.push_back(1.0 - phi_c((c - shift) / sd));
        }
        const auto tr = assemble_detection_risk(p_null, miss);
        if (tr.risk_bayes <= tr.risk_sum && tr.risk_sum <= 2.0 * tr.risk_max && 2.0 * tr.risk_max <= 2.0 * tr.risk_sum)
            ++ok;
    }
    report(7, ok == tests, fmt("%d of %d randomized tests satisfy the chain exactly", ok, tests));
}

// 8. relabeled estimator marginals against the double average
void criterion8() {
    const std::size_t n = 5, s = 2, trials = 100000;
    const double mu = 1.0, m = 5.0;
    const std::vector<double> tau{-0.5, 0.0, 0.5, 1.0, 2.0};
    const Strategy base = [&tau](Sensor& sensor) {
        RunOutcome out;
        for (Index a = 0; a < 5; ++a)
            if (sensor.observe(a, 1.0) > tau[a]) out.estimate.push_back(a);
        return out;
    };
    const Strategy sym = symmetrize(base);
    const IndexSet S{0, 1};
    const SparseSignal x(n, S, mu);
    auto missed = parallel_map<std::uint8_t>(trials, [&](std::size_t t) {
        Sensor sensor(x, BudgetLedger(m), Rng(88, {t}), t);
        const auto est = sym(sensor).estimate;
        return static_cast<std::uint8_t>((contains(est, 0) ? 0 : 1) | (contains(est, 1) ? 0 : 2));
    });
    // base miss probability for entry j at unit precision: P(mu + Z <= tau_j)
    const double ref = relabeled_miss_average(n, s, [&](const IndexSet&, Index j) { return 1.0 - phi_c(tau[j] - mu); });
    bool pass = true;
    std::string detail = fmt("double average %.5f; ", ref);
    for (int i = 0; i < 2; ++i) {
        double k = 0;
        for (auto v : missed) k += (v >> i) & 1;
        const double p = k / double(trials), se = std::sqrt(p * (1 - p) / double(trials));
        pass = pass && std::abs(p - ref) <= 3.0 * se;
        detail += fmt("entry %d: %.5f (se %.5f); ", i + 1, p, se);
    }
    report(8, pass, detail + "tol 3 se");
}

// 9. adaptive vs best non-adaptive threshold (informational)
void criterion9() {
    const std::size_t n = 1u << 14, s = 4, trials = 200, grid = 20;
    const double m = double(n), factor = 10.0;
    const double mu = estimation_upper_bound(double(n), double(s), m).value;
    double best = std::numeric_limits<double>::infinity(), best_tau = 0;
    for (std::size_t g = 0; g < grid; ++g) {
        const double tau = mu * double(g + 1) / double(grid);
        auto d = parallel_map<double>(trials, [&](std::size_t t) {
            Rng r(99, {g, t});
            Rng pick = r.derive({1});
            const auto S = sample_without_replacement(n, s, pick);
            const SparseSignal x(n, S, mu);
            Sensor sensor(x, BudgetLedger(m), r, t);
            return double(sym_diff_error(run_uniform(sensor, tau).estimate, S));
        });
        double sum = 0;
        for (double v : d) sum += v;
        if (sum / double(trials) < best) {
            best = sum / double(trials);
            best_tau = tau;
        }
    }
    const bool pass = sds_mean_d >= 0 && sds_mean_d <= 0.5 && best >= factor * sds_mean_d;
    report(9, pass,
           fmt("SDS mean d = %.4f, uniform best mean d = %.4f at tau = %.3f, ratio %.2f (needs >= %.0f)", sds_mean_d,
               best, best_tau, sds_mean_d > 0 ? best / sds_mean_d : INFINITY, factor),
           false);
}

// 10. bound calculator against 40-digit reference values
void criterion10() {
    struct Golden {
        const char* name;
        double value, ref;
    };
    const std::vector<Golden> goldens{
        {"detection_lower(1e4,100,1e4,0.05)", detection_lower_bound(1e4, 100, 1e4, 0.05).value, 0.214596602628934724},
        {"estimation_lower(2^14,16,2^14,0.05)", estimation_lower_bound(16384, 16, 16384, 0.05).value,
         3.18563517757207084},
        {"estimation_upper(2^16,1,2^16)", estimation_upper_bound(65536, 1, 65536).value, 7.81005453817546573},
        {"mds_sufficient(2^16,256,2^16)", mds_sufficient_magnitude(65536, 256, 65536).value, 0.331284832568076821},
    };
    bool pass = true;
    std::string detail;
    for (const auto& g : goldens) {
        // six significant digits: identical after rounding to 6 digits
        const std::string a = fmt("%.5e", g.value), b = fmt("%.5e", g.ref);
        pass = pass && a == b;
        detail += fmt("%s = %s vs %s; ", g.name, a.c_str(), b.c_str());
    }
    report(10, pass, detail);
}

// 11. CLI outputs byte-identical across runs and thread counts
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& threads, const std::string& args, const std::string& out) {
    const std::string cmd = "ADASENSE_THREADS=" + threads + " " + ADASENSE_CLI + " " + args + " -o " + out;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

void criterion11() {
    const std::string cfg = std::string(ADASENSE_CONFIG_DIR) + "/determinism.json";
    const char* tmp = std::getenv("TMPDIR");
    const std::string dir = tmp ? tmp : "/tmp";
    bool pass = true;
    std::string detail;
    for (const std::string sub : {"simulate", "scan"}) {
        std::vector<std::string> outs;
        bool ran = true;
        int k = 0;
        for (const std::string threads : {"1", "1", "8", "8"}) {
            const std::string out = dir + "/adasense_accept_" + sub + "_" + std::to_string(k++) + ".csv";
            ran = run_cli(threads, sub + " -c " + cfg, out) && ran;
            outs.push_back(slurp(out));
        }
        bool same = ran && !outs[0].empty();
        for (const auto& o : outs) same = same && o == outs[0];
        pass = pass && same;
        detail += fmt("%s: %s (%zu bytes); ", sub.c_str(), same ? "identical" : "DIFFERENT", outs[0].size());
    }
    report(11, pass, detail + "threads 1 and 8, two runs each");
}

} // namespace

int main() {
    const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                      criterion5, criterion6, criterion7, criterion8,
                                                      criterion9, criterion10, criterion11};
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        try {
            criteria[k]();
        } catch (const std::exception& e) {
            report(static_cast<int>(k + 1), false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d gating criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
