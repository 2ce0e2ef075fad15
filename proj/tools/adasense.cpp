// adasense: bound tables, risk simulations, threshold scans, phase diagrams
// and oracle self-checks.
//
// Exit codes: 0 success, 1 invalid input, 2 internal failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adasense/adasense.hpp"

using nlohmann::json;
namespace as = adasense;

namespace {

const std::vector<std::string> kConfigKeys{"strategy", "n",           "s",          "m",
                                           "amplitudes", "trials",    "metric",     "seed",
                                           "support_grid", "redraw_supports", "options", "target_risk",
                                           "s_grid",   "bounds"};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw as::ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw as::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

// key.sub.leaf=value; the value is taken as JSON when it parses, else as a string.
void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw as::ConfigError("--set expects path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &cfg;
    std::stringstream ss(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.')) {
        if (key.empty()) throw as::ConfigError("empty segment in --set path '" + path + "'");
        keys.push_back(key);
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!node->is_object()) throw as::ConfigError("--set path '" + path + "' runs through a non-object");
        node = &(*node)[keys[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw as::ConfigError("--set path '" + path + "' runs through a non-object");
    (*node)[keys.back()] = value;
}

void check_keys(const json& cfg) {
    if (!cfg.is_object()) throw as::ConfigError("config must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), it.key()) == kConfigKeys.end())
            throw as::ConfigError("unknown config field '" + it.key() + "'");
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw as::ConfigError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double target_risk(const json& cfg) {
    if (!cfg.contains("target_risk")) throw as::ConfigError("field 'target_risk' is required");
    if (!cfg.at("target_risk").is_number()) throw as::ConfigError("field 'target_risk' must be a number");
    return cfg.at("target_risk").get<double>();
}

std::vector<double> number_list(const json& j, const std::string& key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw as::ConfigError("field 'bounds." + key + "' must be a number or a list");
    for (const auto& x : v) {
        if (!x.is_number()) throw as::ConfigError("field 'bounds." + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

// ---------------------------------------------------------------------------

void cmd_bounds(const json& cfg, std::ostream& os, const std::string& format) {
    const json grid = cfg.value("bounds", json::object());
    const auto ns = number_list(grid, "n", {1024});
    const auto ss = number_list(grid, "s", {4});
    const auto eps_list = number_list(grid, "epsilon", {0.05});
    std::vector<std::string> names{"detection_lower", "estimation_lower", "estimation_upper", "mds_sufficient",
                                   "cs_lower"};
    if (grid.contains("names")) names = grid.at("names").get<std::vector<std::string>>();

    std::vector<std::pair<as::BoundSpec, double>> rows;  // bound, epsilon (NaN when unused)
    const double none = std::numeric_limits<double>::quiet_NaN();
    for (double n : ns)
        for (double s : ss) {
            const auto ms = number_list(grid, "m", {n});
            for (double m : ms)
                for (const auto& name : names) {
                    if (name == "detection_lower") {
                        const double xi = grid.contains("xi") ? grid.at("xi").get<double>() : n;
                        for (double e : eps_list) rows.emplace_back(as::detection_lower_bound(xi, s, m, e), e);
                    } else if (name == "estimation_lower") {
                        for (double e : eps_list) rows.emplace_back(as::estimation_lower_bound(n, s, m, e), e);
                    } else if (name == "cs_lower") {
                        for (double e : eps_list) rows.emplace_back(as::cs_lower_bound(n, s, m, e), e);
                    } else if (name == "estimation_upper") {
                        rows.emplace_back(as::estimation_upper_bound(n, s, m), none);
                    } else if (name == "mds_sufficient") {
                        rows.emplace_back(as::mds_sufficient_magnitude(n, s, m), none);
                    } else {
                        throw as::ConfigError("unknown bound '" + name + "' in field 'bounds.names'");
                    }
                }
        }

    if (format == "json") {
        json arr = json::array();
        for (const auto& [b, e] : rows)
            arr.push_back({{"name", b.name},
                           {"inputs", b.inputs},
                           {"value", b.value},
                           {"clamped", b.clamped},
                           {"validity_flag", b.validity_flag}});
        os << arr.dump(2) << '\n';
        return;
    }
    os << "name,n,s,m,epsilon,value,clamped,validity_flag\n";
    for (const auto& [b, e] : rows) {
        const double n = b.inputs.count("n") ? b.inputs.at("n") : b.inputs.at("xi");
        os << b.name << ',' << fmt17(n) << ',' << fmt17(b.inputs.at("s")) << ',' << fmt17(b.inputs.at("m")) << ','
           << (std::isnan(e) ? std::string() : fmt17(e)) << ',' << fmt17(b.value) << ',' << (b.clamped ? 1 : 0)
           << ',' << (b.validity_flag ? 1 : 0) << '\n';
    }
}

// Closed-form reference amplitudes drawn on scan plots; bounds whose
// preconditions fail at this operating point are left out.
std::vector<as::BoundSpec> reference_bounds(const as::ExperimentConfig& c, double target) {
    std::vector<as::BoundSpec> out;
    const double n = static_cast<double>(c.n), s = static_cast<double>(c.s);
    auto attempt = [&](auto&& fn) {
        try {
            out.push_back(fn());
        } catch (const as::ValidationError&) {
        }
    };
    if (as::is_detection_metric(c.metric)) {
        attempt([&] { return as::detection_lower_bound(n, s, c.m, target); });
        attempt([&] { return as::mds_sufficient_magnitude(n, s, c.m); });
    } else {
        attempt([&] { return as::estimation_lower_bound(n, s, c.m, target); });
        attempt([&] { return as::estimation_upper_bound(n, s, c.m); });
    }
    return out;
}

void emit_curve(const as::RiskCurve& curve, std::ostream& os, const std::string& format) {
    if (format == "json") {
        os << as::to_json(curve).dump(2) << '\n';
    } else {
        as::write_curve_csv(os, curve);
    }
}

void cmd_simulate(const json& cfg, std::ostream& os, const std::string& format) {
    if (format == "svg") throw as::ConfigError("format svg is only available for scan and phase");
    emit_curve(as::run_experiment(as::config_from_json(cfg)), os, format);
}

void cmd_scan(const json& cfg, std::ostream& os, const std::string& format) {
    const auto config = as::config_from_json(cfg);
    const double target = target_risk(cfg);
    const auto res = as::threshold_scan(config, target);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    if (format == "svg") {
        os << as::render_svg(res.curve, reference_bounds(config, target));
    } else if (format == "json") {
        os << as::to_json(res).dump(2) << '\n';
    } else {
        as::RiskCurve annotated = res.curve;
        annotated.metadata["mu_star"] = res.mu_star ? json(*res.mu_star) : json();
        as::write_curve_csv(os, annotated);
    }
}

void cmd_phase(const json& cfg, std::ostream& os, const std::string& format) {
    const auto config = as::config_from_json(cfg);
    const double target = target_risk(cfg);
    if (!cfg.contains("s_grid")) throw as::ConfigError("field 's_grid' is required");
    std::vector<std::size_t> s_grid;
    try {
        s_grid = cfg.at("s_grid").get<std::vector<std::size_t>>();
    } catch (const json::exception&) {
        throw as::ConfigError("field 's_grid' must be a list of positive integers");
    }
    const auto pd = as::phase_diagram(config, s_grid, target);
    for (const auto& r : pd.rows)
        for (const auto& w : r.scan.warnings) std::cerr << "warning (s=" << r.s << "): " << w << '\n';
    if (format == "svg") {
        std::vector<as::RiskCurve> curves;
        for (const auto& r : pd.rows) curves.push_back(r.scan.curve);
        os << as::render_svg(curves, {});
    } else if (format == "json") {
        os << as::to_json(pd).dump(2) << '\n';
    } else {
        as::write_phase_csv(os, pd);
    }
}

int cmd_verify(std::ostream& os) {
    const auto verdicts = as::run_verification();
    json arr = json::array();
    bool all = true;
    for (const auto& v : verdicts) {
        arr.push_back(as::to_json(v));
        all = all && v.pass;
    }
    os << arr.dump(2) << '\n';
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adasense: adaptive sensing simulations and bounds"};
    app.require_subcommand(1);
    std::string config_path, output_path, format = "csv";
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub, bool svg) {
        sub->add_option("-c,--config", config_path, "JSON config file");
        sub->add_option("-o,--output", output_path, "output file (default stdout)");
        auto* f = sub->add_option("-f,--format", format, "output format");
        if (svg)
            f->check(CLI::IsMember({"csv", "json", "svg"}));
        else
            f->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--set", overrides, "override a config field, e.g. --set options.sds.steps=10");
    };
    auto* bounds = app.add_subcommand("bounds", "closed-form bound table over a parameter grid");
    auto* simulate = app.add_subcommand("simulate", "risk curve over an amplitude grid");
    auto* scan = app.add_subcommand("scan", "amplitude at which risk crosses target_risk");
    auto* phase = app.add_subcommand("phase", "threshold scan repeated over s_grid");
    auto* verify = app.add_subcommand("verify", "oracle self-checks, JSON verdicts");
    add_common(bounds, false);
    add_common(simulate, false);
    add_common(scan, true);
    add_common(phase, true);
    verify->add_option("-o,--output", output_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        json cfg = load_config(config_path);
        for (const auto& o : overrides) apply_override(cfg, o);
        check_keys(cfg);
        Output out(output_path);
        auto& os = out.stream();
        if (*bounds) cmd_bounds(cfg, os, format);
        if (*simulate) cmd_simulate(cfg, os, format);
        if (*scan) cmd_scan(cfg, os, format);
        if (*phase) cmd_phase(cfg, os, format);
        if (*verify) return cmd_verify(os);
        os.flush();
        return 0;
    } catch (const as::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}
