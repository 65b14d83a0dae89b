#pragma once

/**
 * @file cli.hpp
 * @brief The tmoments command line: mk, dk, orbits, moment, dist, trace, verify.
 *
 * Exit status: 0 success, 1 verification failure or disagreeing routes,
 * 2 usage or capacity error. Output format comes from --format, else from
 * $TMOMENTS_FORMAT, else "text".
 */

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "closed_forms.hpp"
#include "local_counts.hpp"
#include "moment_lab.hpp"
#include "orbit_engine.hpp"
#include "report_json.hpp"
#include "verify.hpp"

namespace torsion_moments::cli {

inline constexpr const char* kFormatEnv = "TMOMENTS_FORMAT";

enum class Format { Text, Json, Human, Csv };

inline Format parse_format(const std::string& s) {
    if (s == "text") return Format::Text;
    if (s == "json") return Format::Json;
    if (s == "human") return Format::Human;
    if (s == "csv") return Format::Csv;
    throw UsageError("unknown format \"" + s + "\" (text, json, human, csv)");
}

/// "100000", "1e5" or "2.5e4"; the value must be a non-negative integer.
inline std::uint64_t parse_bound(const std::string& text) {
    const auto e = text.find_first_of("eE");
    try {
        if (e == std::string::npos) {
            std::size_t used = 0;
            const auto v = std::stoull(text, &used);
            if (used != text.size() || text.front() == '-') throw std::invalid_argument("trailing");
            return v;
        }
        std::string mantissa = text.substr(0, e);
        std::size_t used = 0;
        const int exponent = std::stoi(text.substr(e + 1), &used);
        if (used != text.size() - e - 1 || exponent < 0 || exponent > 18) throw std::invalid_argument("exponent");
        int shift = exponent;
        if (const auto dot = mantissa.find('.'); dot != std::string::npos) {
            shift -= static_cast<int>(mantissa.size() - dot - 1);
            mantissa.erase(dot, 1);
        }
        if (mantissa.empty() || mantissa.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("mantissa");
        BigInt v(mantissa);
        if (shift < 0) {
            const BigInt div = big_pow(BigInt(10), static_cast<std::uint32_t>(-shift));
            if (v % div != 0) throw std::invalid_argument("fractional");
            v /= div;
        } else {
            v *= big_pow(BigInt(10), static_cast<std::uint32_t>(shift));
        }
        if (v > std::numeric_limits<std::uint64_t>::max()) throw std::invalid_argument("range");
        return v.convert_to<std::uint64_t>();
    } catch (const std::exception&) {
        throw UsageError("cannot read \"" + text + "\" as a non-negative integer bound");
    }
}

inline std::vector<std::uint64_t> parse_bound_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_bound(item));
    return out;
}

/**
 * Scenarios:
 *   power:n,a           roots of x^n - a
 *   cyclotomic:n        power:n,1
 *   kummer:n,a          power:n,a with a != 1
 *   product:n,a,k1,k2   N_p(x^n - a)^k1 N_p(x^n - 1)^k2
 *   torsion:CURVE:l     N_p(E[l]); CURVE is a preset (17a3, 11a2, cm:-1, cm:-3) or "a,b"
 */
inline CounterSpec parse_scenario(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("scenario: expected kind:args, got \"" + text + "\"");
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "torsion") {
        const auto last = rest.rfind(':');
        if (last == std::string::npos) throw UsageError("scenario: expected torsion:CURVE:l");
        const auto l = parse_bound(rest.substr(last + 1));
        return CounterSpec::torsion(parse_curve(rest.substr(0, last)), l);
    }
    const auto args = detail::parse_int_list(rest, "scenario \"" + text + "\"");
    auto need = [&](std::size_t count) {
        if (args.size() != count)
            throw UsageError("scenario \"" + text + "\": expected " + std::to_string(count) + " argument(s)");
        if (args[0] < 1 || args[0] > 1'000'000) throw UsageError("scenario \"" + text + "\": n out of range");
    };
    if (kind == "power") {
        need(2);
        return CounterSpec::power(static_cast<std::uint32_t>(args[0]), args[1]);
    }
    if (kind == "cyclotomic") {
        need(1);
        return CounterSpec::power(static_cast<std::uint32_t>(args[0]), 1);
    }
    if (kind == "kummer") {
        need(2);
        if (args[1] == 1) throw UsageError("scenario \"" + text + "\": kummer needs a != 1");
        return CounterSpec::power(static_cast<std::uint32_t>(args[0]), args[1]);
    }
    if (kind == "product") {
        need(4);
        if (args[2] < 0 || args[3] < 0 || args[2] > 16 || args[3] > 16)
            throw UsageError("scenario \"" + text + "\": k1, k2 must lie in [0, 16]");
        return CounterSpec::product(static_cast<std::uint32_t>(args[0]), args[1], static_cast<std::uint32_t>(args[2]),
                                    static_cast<std::uint32_t>(args[3]));
    }
    throw UsageError("scenario: unknown kind \"" + kind + "\"");
}

namespace detail {

inline std::string histogram_text(const std::map<std::uint64_t, std::uint64_t>& h) {
    std::string s;
    for (auto [v, c] : h) s += (s.empty() ? "" : " ") + std::to_string(v) + ":" + std::to_string(c);
    return s;
}

inline std::optional<ExactRational> exact_rel_err(const MomentReport& r) {
    if (!r.predicted || *r.predicted == 0) return std::nullopt;
    return abs(r.empirical - *r.predicted) / abs(*r.predicted);
}

inline void print_report(std::ostream& out, const MomentReport& r, Format f) {
    switch (f) {
    case Format::Json: out << to_json(r).dump(2) << "\n"; return;
    case Format::Csv: out << csv_header() << "\n" << csv_row(r) << "\n"; return;
    case Format::Text:
        out << "scenario: " << r.scenario << "\n"
            << "k: " << r.k << "\n"
            << "x: " << r.x << "\n"
            << "pi_x: " << r.pi_x << "\n"
            << "excluded: " << r.excluded << "\n";
        if (r.filtered_out) out << "filtered_out: " << r.filtered_out << "\n";
        out << "empirical: " << to_string(r.empirical) << "\n";
        if (r.predicted) {
            out << "predicted: " << to_string(*r.predicted) << " (" << r.predicted_label << ")\n";
            out << "abs_err: " << to_string(*r.abs_err()) << "\n";
            if (auto e = exact_rel_err(r)) out << "rel_err: " << to_string(*e) << "\n";
        } else {
            out << "predicted: none\n";
        }
        if (r.orbit_predicted) out << "orbit_predicted: " << to_string(*r.orbit_predicted) << "\n";
        out << "histogram: " << histogram_text(r.histogram) << "\n";
        return;
    case Format::Human:
        out << r.scenario << ", k = " << r.k << ", x = " << r.x << " (pi(x) = " << r.pi_x << ", " << r.excluded
            << " excluded";
        if (r.filtered_out) out << ", " << r.filtered_out << " outside the filter";
        out << ")\n";
        out << "  empirical  " << to_decimal(r.empirical, 8) << "\n";
        if (r.predicted)
            out << "  predicted  " << to_decimal(*r.predicted, 8) << "  = " << r.predicted_label << "\n"
                << "  rel. error " << to_decimal(*exact_rel_err(r), 6) << "\n";
        if (r.orbit_predicted) out << "  orbit law  " << to_decimal(*r.orbit_predicted, 8) << "\n";
        out << "  N_p values " << histogram_text(r.histogram) << "\n";
        return;
    }
}

inline void add_threads(CLI::App& app, unsigned& threads) {
    app.add_option("--threads", threads, "worker threads for prime shards (results do not depend on it)")
        ->check(CLI::Range(1U, 256U));
}

} // namespace detail

/// Parses argv and runs one subcommand; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moments of N_p for zero-dimensional algebraic sets: closed forms, Burnside orbit counts "
                 "and prime-by-prime estimates"};
    app.name("tmoments");
    app.require_subcommand(1);
    std::string format_name;
    if (const char* env = std::getenv(kFormatEnv)) format_name = env;
    if (format_name.empty()) format_name = "text";
    app.add_option("--format", format_name, "text | json | human | csv (default from $TMOMENTS_FORMAT)");
    unsigned threads = 1;
    detail::add_threads(app, threads);

    std::uint64_t n = 1;
    std::uint32_t k = 1;
    int d = -1;

    auto* mk_cmd = app.add_subcommand("mk", "M_k(n) = sum_{de | n} d^k mu(e) / phi(de)");
    mk_cmd->add_option("--n", n)->required()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1'000'000'000'000}));
    mk_cmd->add_option("--k", k)->required()->check(CLI::Range(0U, 4096U));

    auto* dk_cmd = app.add_subcommand("dk", "number of ideal divisors of n O_K, K = Q(sqrt d)");
    dk_cmd->add_option("--n", n)->required()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1'000'000'000'000}));
    dk_cmd->add_option("--d", d)->required();

    std::string action_text;
    std::uint64_t oracle_budget = 1'000'000;
    auto* orbits_cmd = app.add_subcommand("orbits", "Burnside orbit count of G on X^k (with the union-find oracle when small)");
    orbits_cmd->add_option("--action", action_text, "units:n | glm:n,m | semidirect:n | quad:n,d | gl2:l")->required();
    orbits_cmd->add_option("--k", k)->required()->check(CLI::Range(1U, 4096U));
    orbits_cmd->add_option("--oracle-budget", oracle_budget, "largest |X|^k handed to the oracle");

    std::string scenario_text, x_text = "100000", filter_text;
    std::optional<int> field;
    bool good_only = false;
    auto* moment_cmd = app.add_subcommand("moment", "empirical k-th moment of N_p over p <= x");
    moment_cmd->add_option("--scenario", scenario_text)->required();
    moment_cmd->add_option("--k", k)->check(CLI::Range(0U, 64U));
    moment_cmd->add_option("--x", x_text);
    moment_cmd->add_option("--filter", filter_text, "keep only primes of these splitting types, e.g. split or inert+ramified");
    moment_cmd->add_option("--field", field, "d of K = Q(sqrt d) for --filter (default: the curve's CM field)");
    moment_cmd->add_flag("--good-only", good_only, "divide by the included primes instead of pi(x)");

    std::vector<double> ts;
    std::uint32_t order = 25;
    auto* dist_cmd = app.add_subcommand("dist", "empirical distribution of N_p, with predicted atoms |G(m)|/|G|");
    dist_cmd->add_option("--scenario", scenario_text)->required();
    dist_cmd->add_option("--x", x_text);
    dist_cmd->add_option("--action", action_text, "group action whose fixed-point law is the prediction");
    dist_cmd->add_option("--t", ts, "sample points for the characteristic function, |t| < 1")->delimiter(',');
    dist_cmd->add_option("--order", order, "truncation order K of the characteristic function")->check(CLI::Range(1U, 200U));

    std::string checkpoints_text = "1e4,1e5,1e6";
    auto* trace_cmd = app.add_subcommand("trace", "moment at ascending checkpoints from one prime pass");
    trace_cmd->add_option("--scenario", scenario_text)->required();
    trace_cmd->add_option("--k", k)->check(CLI::Range(0U, 64U));
    trace_cmd->add_option("--checkpoints", checkpoints_text);

    std::string suite = "all";
    std::optional<double> tol;
    auto* verify_cmd = app.add_subcommand("verify", "run a named acceptance suite");
    verify_cmd->add_option("--suite", suite);
    verify_cmd->add_option("--tol", tol, "override the empirical tolerances")->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const Format fmt = parse_format(format_name);
        const LabOptions lab{threads, good_only};

        if (*mk_cmd) {
            const auto v = mk(n, k);
            if (fmt == Format::Json) {
                Json j{{"n", n}, {"k", k}};
                put_rational(j, "value", v);
                out << j.dump(2) << "\n";
            } else if (fmt == Format::Human) {
                out << "M_" << k << "(" << n << ") = " << to_string(v) << " (" << to_decimal(v, 6) << ")\n";
            } else {
                out << to_string(v) << "\n";
            }
            return 0;
        }

        if (*dk_cmd) {
            const auto spec = QuadOrderSpec::make(d);
            const auto v = dk(n, spec);
            if (fmt == Format::Json) out << Json{{"n", n}, {"d", d}, {"value", v}}.dump(2) << "\n";
            else if (fmt == Format::Human) out << "d_K(" << n << ") = " << v << " for K = Q(sqrt(" << d << "))\n";
            else out << v << "\n";
            return 0;
        }

        if (*orbits_cmd) {
            const auto desc = parse_action(action_text);
            const auto h = fixed_point_histogram(desc);
            const auto b = burnside_moment(h, k);
            std::optional<std::uint64_t> oracle;
            const auto tuples = checked_pow(desc.set_size(), k);
            if (tuples && *tuples <= oracle_budget) {
                try {
                    oracle = orbit_count_oracle(build_action(desc), k, oracle_budget);
                } catch (const CapacityError&) {
                }
            }
            const bool agree = !oracle || b == *oracle;
            if (fmt == Format::Json) {
                Json j{{"action", desc.to_string()}, {"k", k}, {"group_order", h.group_order().str()},
                       {"set_size", desc.set_size()}, {"burnside", b.str()}};
                j["oracle"] = oracle ? Json(std::to_string(*oracle)) : Json(nullptr);
                j["histogram"] = histogram_json(h.counts);
                out << j.dump(2) << "\n";
            } else if (fmt == Format::Human) {
                out << desc.to_string() << ": |G| = " << h.group_order() << ", |X| = " << desc.set_size() << "\n"
                    << "  orbits on X^" << k << " (Burnside) " << b << "\n";
                if (oracle) out << "  orbits on X^" << k << " (union-find) " << *oracle << "\n";
                out << "  fixed points " << detail::histogram_text(h.counts) << "\n";
            } else {
                out << b << "\n";
            }
            if (!agree) {
                err << "error: Burnside count " << b << " differs from the oracle count " << *oracle << "\n";
                return 1;
            }
            return 0;
        }

        if (*moment_cmd) {
            auto c = parse_scenario(scenario_text);
            const auto x = parse_bound(x_text);
            if (!filter_text.empty()) {
                std::optional<QuadOrderSpec> spec;
                if (field) spec = QuadOrderSpec::make(*field);
                else if (c.kind() == CounterSpec::Kind::Torsion && c.curve().cm) spec = c.curve().cm;
                if (!spec) throw UsageError("--filter needs --field unless the scenario curve has CM");
                c = c.with_filter({*spec, parse_splitting_types(filter_text)});
            } else if (field) {
                throw UsageError("--field only applies together with --filter");
            }
            detail::print_report(out, empirical_moment(c, k, x, lab), fmt);
            return 0;
        }

        if (*dist_cmd) {
            const auto c = parse_scenario(scenario_text);
            const auto x = parse_bound(x_text);
            std::optional<FixedPointHistogram> predicted;
            if (!action_text.empty()) predicted = fixed_point_histogram(parse_action(action_text));
            auto rep = empirical_distribution(c, x, predicted, lab);
            if (!ts.empty()) {
                const auto moments = moments_from_masses(rep.masses, order);
                const std::uint64_t bound = std::max<std::uint64_t>(1, rep.masses.rbegin()->first);
                for (double t : ts) rep.phi.push_back(characteristic_function(moments, t, order, bound));
            }
            if (fmt == Format::Json) {
                out << to_json(rep).dump(2) << "\n";
            } else if (fmt == Format::Csv) {
                out << "z,mass,cdf,predicted\n";
                for (const auto& [z, cum] : rep.cdf) {
                    out << z << "," << to_string(rep.masses.at(z)) << "," << to_string(cum) << ",";
                    if (rep.predicted && rep.predicted->count(z)) out << to_string(rep.predicted->at(z));
                    out << "\n";
                }
            } else {
                const bool human = fmt == Format::Human;
                auto show = [&](const ExactRational& q) { return human ? to_decimal(q, 6) : to_string(q); };
                out << "scenario: " << rep.scenario << "\nx: " << rep.x << "\npi_x: " << rep.pi_x << "\n";
                for (const auto& [z, cum] : rep.cdf) {
                    out << "N_p = " << z << ": mass " << show(rep.masses.at(z)) << ", H(" << z << ") = " << show(cum);
                    if (rep.predicted) {
                        const auto it = rep.predicted->find(z);
                        out << ", predicted " << (it == rep.predicted->end() ? "0" : show(it->second));
                    }
                    out << "\n";
                }
                if (rep.predicted)
                    for (const auto& [z, w] : *rep.predicted)
                        if (!rep.masses.count(z)) out << "N_p = " << z << ": mass 0, predicted " << show(w) << "\n";
                for (const auto& s : rep.phi)
                    out << "phi(" << s.t << ") ~ " << s.value.real() << (s.value.imag() < 0 ? " - " : " + ")
                        << std::abs(s.value.imag()) << "i (K = " << s.order << ", tail <= " << s.tail_bound << ")\n";
            }
            return 0;
        }

        if (*trace_cmd) {
            const auto c = parse_scenario(scenario_text);
            const auto reports = convergence_trace(c, k, parse_bound_list(checkpoints_text), lab);
            if (fmt == Format::Json) {
                Json arr = Json::array();
                for (const auto& r : reports) arr.push_back(to_json(r));
                out << arr.dump(2) << "\n";
            } else if (fmt == Format::Human) {
                for (const auto& r : reports) detail::print_report(out, r, fmt);
            } else {
                out << csv_header() << "\n";
                for (const auto& r : reports) out << csv_row(r) << "\n";
            }
            return 0;
        }

        if (*verify_cmd) {
            const auto results = run_suite(suite, {tol, threads});
            bool all = true;
            if (fmt == Format::Json) {
                Json arr = Json::array();
                for (const auto& r : results) {
                    arr.push_back({{"criterion", r.criterion}, {"suite", r.name}, {"passed", r.passed},
                                   {"checks", r.checks}, {"failures", r.failures}, {"notes", r.notes}});
                    all = all && r.passed;
                }
                out << arr.dump(2) << "\n";
            } else {
                for (const auto& r : results) {
                    out << "[" << (r.passed ? "PASS" : "FAIL") << "] " << r.criterion << " " << r.name << " ("
                        << r.checks << " checks)\n";
                    for (const auto& f : r.failures) out << "    failed: " << f << "\n";
                    if (fmt == Format::Human)
                        for (const auto& note : r.notes) out << "    " << note << "\n";
                    all = all && r.passed;
                }
            }
            return all ? 0 : 1;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << "\n";
        return 2;
    } catch (const InternalFault& e) {
        err << "internal fault: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace torsion_moments::cli
