#pragma once

// Command-line front end. run() is the whole program; tools/thetabound.cpp
// only forwards argv. Exit codes: 0 success, 1 verification violation,
// 2 usage or input error, 3 numeric failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "binary.hpp"
#include "channel.hpp"
#include "elias.hpp"
#include "error.hpp"
#include "io.hpp"
#include "oracle.hpp"
#include "theta.hpp"

namespace thetabound::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2, kNumeric = 3 };

struct RunConfig {
    std::string channel;
    double rho = 1.0;
    std::vector<double> rho_grid = default_rho_grid();
    std::vector<double> weights;  // Q or P; empty means uniform
    std::vector<double> rate_grid;
    double rate_min = 0.05;
    double rate_max = 0.65;
    int rate_steps = 13;
    std::uint64_t seed = 1;
    int restarts = 16;
    int search_restarts = 2;
    int threads = 1;
    double feas_tol = 1e-8;
    std::string output;
    bool bits = false;
    bool json = false;
    // verify
    std::size_t trials = 10000;
    std::size_t block_length = 3;
    std::size_t codewords = 2;
    std::optional<double> theta_value;
    // binary
    std::optional<double> b01;
    std::optional<double> z;
    std::vector<double> lambdas{0.0, 0.05, 0.11, 0.2, 0.3, 0.4, 0.5};
};

namespace detail {

inline double display(double nats, bool bits) { return bits ? nats / std::log(2.0) : nats; }
inline const char* unit(bool bits) { return bits ? "bits" : "nats"; }

inline ThetaOptions theta_options(const RunConfig& cfg) {
    ThetaOptions o;
    o.seed = cfg.seed;
    o.restarts = cfg.restarts;
    o.threads = cfg.threads;
    o.feas_tol = cfg.feas_tol;
    return o;
}

inline Composition weights_or_uniform(const RunConfig& cfg, std::size_t n) {
    if (cfg.weights.empty()) return Composition::uniform(n);
    if (cfg.weights.size() != n) throw ValidationError("composition length does not match the channel inputs");
    return Composition(io::to_vector(cfg.weights));
}

inline void print_certificate(std::ostream& out, const ThetaCertificate& c, bool bits) {
    out << std::setprecision(6);
    out << "rho        " << c.rho() << '\n';
    out << "value      " << display(c.value, bits) << ' ' << unit(bits) << '\n';
    out << "residual   " << c.feasibility_residual << '\n';
    out << "restarts   " << c.restarts_used << '\n';
    out << "converged  " << (c.converged ? "yes" : "no") << '\n';
}

inline void maybe_write_certificate(const RunConfig& cfg, const ThetaCertificate& c) {
    if (cfg.output.empty()) return;
    std::ofstream f(cfg.output);
    if (!f) throw ValidationError("cannot write '" + cfg.output + "'");
    f << io::certificate_to_json(c).dump(2) << '\n';
}

inline void report_random(std::ostream& out, const char* name, const oracle::RandomReport& r, bool as_json) {
    if (as_json) {
        io::json j{{"check", name}, {"checked", r.checked}, {"violations", r.violations},
                   {"tightest_instance", {{"slack", r.tightest_slack}, {"instance", r.tightest_instance}}}};
        out << j.dump(2) << '\n';
        return;
    }
    out << std::setprecision(6);
    out << name << ": checked " << r.checked << ", violations " << r.violations << ", tightest slack "
        << r.tightest_slack << '\n';
    for (const auto& v : r.violating) out << "violation:\n" << v << '\n';
}

inline std::string code_string(const oracle::Code& c) {
    std::ostringstream os;
    for (std::size_t m = 0; m < c.size(); ++m) {
        if (m) os << ' ';
        for (int s : c.words()[m]) os << s;
    }
    return os.str();
}

}  // namespace detail

inline int cmd_theta(const RunConfig& cfg, bool weighted, std::ostream& out) {
    const Channel ch = io::load_channel(cfg.channel);
    const GramMatrix b = gram(ch);
    const ThetaCertificate c = weighted
                                   ? optimize_theta_weighted(b, cfg.rho, detail::weights_or_uniform(cfg, b.size()),
                                                             detail::theta_options(cfg))
                                   : optimize_theta(b, cfg.rho, detail::theta_options(cfg));
    detail::print_certificate(out, c, cfg.bits);
    detail::maybe_write_certificate(cfg, c);
    return kOk;
}

inline int cmd_bound_curve(const RunConfig& cfg, std::ostream& out) {
    const Channel ch = io::load_channel(cfg.channel);
    const GramMatrix b = gram(ch);
    std::vector<double> rates = cfg.rate_grid;
    if (rates.empty()) {
        for (int k = 0; k < cfg.rate_steps; ++k)
            rates.push_back(cfg.rate_steps == 1 ? cfg.rate_min
                                                : cfg.rate_min + (cfg.rate_max - cfg.rate_min) * k / (cfg.rate_steps - 1));
    }
    if (rates.empty()) throw ValidationError("rate grid is empty");
    for (double r : rates)
        if (!(r > 0.0)) throw ValidationError("rates must be positive");
    SearchOptions so;
    so.theta = detail::theta_options(cfg);
    so.theta.restarts = cfg.search_restarts;
    const DistanceBoundCurve curve = bound_curve(b, detail::weights_or_uniform(cfg, b.size()), cfg.rho_grid, rates, so);
    if (cfg.output.empty()) {
        io::write_curve_csv(out, curve);
    } else {
        std::ofstream f(cfg.output);
        if (!f) throw ValidationError("cannot write '" + cfg.output + "'");
        io::write_curve_csv(f, curve);
    }
    return kOk;
}

/// Optimizer versus closed form on the binary grid rho x Q x b01.
inline int verify_closedform(const RunConfig& cfg, std::ostream& out) {
    std::size_t checked = 0, violations = 0;
    double worst = 0.0;
    ThetaOptions opt = detail::theta_options(cfg);
    for (double b01 : {0.2, 0.6, 0.9})
        for (double rho : {1.0, 2.0, 5.0, 10.0, 100.0})
            for (double q0 : {0.5, 0.7, 0.9}) {
                const Composition q{q0, 1.0 - q0};
                const double exact = binary::theta(binary::z_from_gram(b01), rho, q);
                const double got = optimize_theta_weighted(GramMatrix::binary(b01), rho, q, opt).value;
                const double err = std::abs(got - exact);
                worst = std::max(worst, err);
                ++checked;
                if (err > 1e-4) {
                    ++violations;
                    out << "violation: b01=" << b01 << " rho=" << rho << " Q0=" << q0 << " optimizer=" << got
                        << " closed form=" << exact << '\n';
                }
            }
    if (cfg.json) {
        out << io::json{{"check", "closedform"}, {"checked", checked}, {"violations", violations},
                        {"tightest_instance", {{"max_abs_error", worst}}}}
                   .dump(2)
            << '\n';
    } else {
        out << std::setprecision(6) << "closedform: checked " << checked << ", violations " << violations
            << ", max |optimizer - closed form| " << worst << '\n';
    }
    return violations == 0 ? kOk : kViolation;
}

inline int verify_theorem1(const RunConfig& cfg, std::ostream& out) {
    const Channel ch = io::load_channel(cfg.channel);
    const GramMatrix b = gram(ch);
    double theta_value = 0.0;
    std::string source;
    if (cfg.theta_value) {
        theta_value = *cfg.theta_value;
        source = "given";
    } else if (b.size() == 2 && b(0, 1) > 0.0) {
        theta_value = binary::theta(binary::z_from_gram(b(0, 1)), cfg.rho, Composition::uniform(2));
        source = "binary closed form";
    } else {
        theta_value = optimize_theta(b, cfg.rho, detail::theta_options(cfg)).value;
        source = "optimizer certificate";
    }
    const auto rep = oracle::check_theorem1_exhaustive(b, cfg.block_length, cfg.codewords, cfg.rho, theta_value);
    if (cfg.json) {
        io::json tight = nullptr;
        if (rep.tightest)
            tight = {{"code", detail::code_string(*rep.tightest)}, {"max_inner", rep.tightest_max_inner}};
        out << io::json{{"check", "theorem1"},   {"checked", rep.checked}, {"violations", rep.violations},
                        {"bound", rep.bound},    {"theta", theta_value},   {"theta_source", source},
                        {"tightest_instance", tight}}
                   .dump(2)
            << '\n';
    } else {
        out << std::setprecision(6) << "theorem1: n=" << cfg.block_length << " M=" << cfg.codewords
            << " rho=" << cfg.rho << " theta=" << theta_value << " (" << source << ")\n";
        out << "bound " << rep.bound << ", checked " << rep.checked << ", violations " << rep.violations << '\n';
        if (rep.tightest)
            out << "tightest code: " << detail::code_string(*rep.tightest) << " max inner " << rep.tightest_max_inner
                << '\n';
        for (const auto& c : rep.violating) out << "violation: " << detail::code_string(c) << '\n';
    }
    return rep.violations == 0 ? kOk : kViolation;
}

inline int cmd_verify(const std::string& which, const RunConfig& cfg, std::ostream& out) {
    if (which == "lemma1") {
        oracle::RandomReport total;
        const std::vector<std::pair<std::size_t, std::size_t>> shapes{{2, 2}, {2, 4}, {2, 8}, {3, 2}, {3, 4},
                                                                      {3, 8}, {5, 2}, {5, 4}, {5, 8}};
        for (std::size_t k = 0; k < shapes.size(); ++k) {
            const std::size_t n = cfg.trials / shapes.size() + (k < cfg.trials % shapes.size() ? 1 : 0);
            const auto r = oracle::check_lemma1(shapes[k].first, shapes[k].second, n, cfg.seed + k);
            total.checked += r.checked;
            total.violations += r.violations;
            if (r.tightest_slack < total.tightest_slack) {
                total.tightest_slack = r.tightest_slack;
                total.tightest_instance = r.tightest_instance;
            }
            total.violating.insert(total.violating.end(), r.violating.begin(), r.violating.end());
        }
        detail::report_random(out, "lemma1", total, cfg.json);
        return total.violations == 0 ? kOk : kViolation;
    }
    if (which == "rowsum") {
        const auto r = oracle::check_rowsum_eigenvalue(cfg.trials, cfg.seed);
        detail::report_random(out, "rowsum", r, cfg.json);
        return r.violations == 0 ? kOk : kViolation;
    }
    if (which == "theorem1") return verify_theorem1(cfg, out);
    if (which == "closedform") return verify_closedform(cfg, out);
    throw ValidationError("unknown verify suite '" + which + "'");
}

inline int cmd_binary(const RunConfig& cfg, std::ostream& out) {
    if (cfg.b01.has_value() == cfg.z.has_value()) throw ValidationError("give exactly one of --b01 or --Z");
    const double z = cfg.z ? *cfg.z : binary::z_from_gram(*cfg.b01);
    const bool bits = cfg.bits;
    out << std::setprecision(6);
    out << "Z = " << detail::display(z, bits) << ' ' << detail::unit(bits) << ", rho = " << cfg.rho << '\n';
    out << "lambda\ttheta\trho*theta\telias_limit\trate_threshold\n";
    for (double lambda : cfg.lambdas) {
        const Composition q{1.0 - lambda, lambda};
        const double th = binary::theta(z, cfg.rho, q);
        const auto e = binary::elias_limit(lambda, z);
        out << lambda << '\t' << detail::display(th, bits) << '\t' << detail::display(cfg.rho * th, bits) << '\t'
            << detail::display(e.distance_bound, bits) << '\t' << detail::display(e.rate_threshold, bits) << '\n';
    }
    return kOk;
}

/// Parses and dispatches; never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified upper bounds on the minimum Bhattacharyya distance of codes", "thetabound"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "random seed (deterministic by default)");
        sub->add_option("--restarts", cfg.restarts, "random restarts per optimization");
        sub->add_option("--threads", cfg.threads, "worker threads for restarts")->check(CLI::PositiveNumber);
        sub->add_option("--feas-tol", cfg.feas_tol, "feasibility tolerance of certificates");
        sub->add_flag("--bits", cfg.bits, "display values in bits instead of nats");
    };

    auto* theta = app.add_subcommand("theta", "upper bound on theta(rho)");
    theta->add_option("--channel", cfg.channel, "channel JSON file or bsc:<p> | pentagon | identity:<k>")->required();
    theta->add_option("--rho", cfg.rho, "degree rho >= 1")->required();
    theta->add_option("--cert", cfg.output, "write the certificate JSON here");
    add_common(theta);

    auto* theta_w = app.add_subcommand("theta-weighted", "upper bound on theta(rho, Q)");
    theta_w->add_option("--channel", cfg.channel, "channel JSON file or built-in")->required();
    theta_w->add_option("--rho", cfg.rho, "degree rho >= 1")->required();
    theta_w->add_option("--Q", cfg.weights, "composition Q (comma separated); uniform if omitted")->delimiter(',');
    theta_w->add_option("--cert", cfg.output, "write the certificate JSON here");
    add_common(theta_w);

    auto* curve = app.add_subcommand("bound-curve", "rate-distance bound curve as CSV");
    curve->add_option("--channel", cfg.channel, "channel JSON file or built-in")->required();
    curve->add_option("--P", cfg.weights, "composition P (comma separated); uniform if omitted")->delimiter(',');
    curve->add_option("--rho-grid", cfg.rho_grid, "rho values (comma separated)")->delimiter(',');
    auto* rgrid = curve->add_option("--R-grid", cfg.rate_grid, "rates in nats (comma separated)")->delimiter(',');
    curve->add_option("--R-min", cfg.rate_min, "first rate of the uniform grid");
    curve->add_option("--R-max", cfg.rate_max, "last rate of the uniform grid");
    curve->add_option("--R-steps", cfg.rate_steps, "number of rates in the uniform grid");
    curve->add_option("--search-restarts", cfg.search_restarts, "random restarts per subproblem in the V search");
    curve->add_option("--out", cfg.output, "CSV output file (stdout if omitted)");
    add_common(curve);

    std::string suite;
    auto* verify = app.add_subcommand("verify", "run an oracle suite");
    verify->add_option("suite", suite, "lemma1 | theorem1 | rowsum | closedform")
        ->required()
        ->check(CLI::IsMember({"lemma1", "theorem1", "rowsum", "closedform"}));
    verify->add_option("--trials", cfg.trials, "random instances");
    verify->add_option("--channel", cfg.channel, "channel for theorem1");
    verify->add_option("--n", cfg.block_length, "block length for theorem1");
    verify->add_option("--M", cfg.codewords, "codewords for theorem1");
    verify->add_option("--rho", cfg.rho, "degree rho for theorem1");
    verify->add_option("--theta", cfg.theta_value, "theta(rho) upper bound to test (computed if omitted)");
    verify->add_flag("--json", cfg.json, "emit a JSON summary");
    add_common(verify);

    auto* bin = app.add_subcommand("binary", "closed-form table for a binary channel");
    bin->add_option("--b01", cfg.b01, "Bhattacharyya coefficient between the two inputs");
    bin->add_option("--Z", cfg.z, "Bhattacharyya distance between the two inputs (nats)");
    bin->add_option("--lambda", cfg.lambdas, "lambda values in [0, 1/2] (comma separated)")->delimiter(',');
    bin->add_option("--rho", cfg.rho, "degree rho >= 1");
    bin->add_flag("--bits", cfg.bits, "display values in bits instead of nats");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*theta) return cmd_theta(cfg, false, out);
        if (*theta_w) return cmd_theta(cfg, true, out);
        if (*curve) {
            if (rgrid->count() > 0 && cfg.rate_grid.empty()) throw ValidationError("rate grid is empty");
            return cmd_bound_curve(cfg, out);
        }
        if (*verify) {
            if (suite == "theorem1" && cfg.channel.empty()) throw ValidationError("theorem1 needs --channel");
            return cmd_verify(suite, cfg, out);
        }
        if (*bin) {
            if (bin->count("--rho") == 0) cfg.rho = 1e4;
            return cmd_binary(cfg, out);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const GuardExceeded& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}

}  // namespace thetabound::cli
