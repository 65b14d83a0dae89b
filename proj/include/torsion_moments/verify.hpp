#pragma once

/**
 * @file verify.hpp
 * @brief Named verification suites, one per acceptance criterion.
 *
 * Exact suites compare two independent routes to the same integer or
 * rational. Empirical suites compare prime averages against the limits with a
 * tolerance that can be overridden.
 */

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "closed_forms.hpp"
#include "local_counts.hpp"
#include "moment_lab.hpp"
#include "orbit_engine.hpp"

namespace torsion_moments {

struct SuiteResult {
    int criterion = 0;
    std::string name;
    bool passed = true;
    std::size_t checks = 0;
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void check(bool ok, const std::function<std::string()>& describe) {
        ++checks;
        if (!ok) {
            passed = false;
            if (failures.size() < 20) failures.push_back(describe());
        }
    }
};

struct VerifyOptions {
    std::optional<double> tolerance;  ///< overrides every empirical tolerance
    unsigned threads = 1;
};

namespace detail {

inline std::string str(const ExactRational& q) { return to_string(q); }

inline bool within_relative(const ExactRational& value, const ExactRational& target, double tol) {
    return to_double(abs(value - target)) <= tol * std::abs(to_double(target));
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

// 1
inline SuiteResult suite_orbit_vs_closed_form(const VerifyOptions&) {
    SuiteResult r{1, "orbit-vs-closed-form", true, 0, {}, {}};
    for (std::uint32_t n = 1; n <= 60; ++n) {
        const auto h = fixed_point_histogram(build_action(ActionDescriptor::units(n)));
        for (std::uint32_t k = 1; k <= 6; ++k) {
            const auto b = burnside_moment(h, k);
            const auto f = mk(n, k);
            r.check(ExactRational(b) == f, [&] {
                return "units(" + std::to_string(n) + ") k=" + std::to_string(k) + ": " + b.str() + " vs " + detail::str(f);
            });
        }
    }
    for (std::uint32_t n = 1; n <= 30; ++n) {
        const auto h = fixed_point_histogram(build_action(ActionDescriptor::semidirect(n)));
        for (std::uint32_t k = 1; k <= 3; ++k) {
            const auto b = burnside_moment(h, k);
            const auto f = mk(n, 2 * k - 1);
            r.check(ExactRational(b) == f, [&] {
                return "semidirect(" + std::to_string(n) + ") k=" + std::to_string(k) + ": " + b.str() + " vs " +
                       detail::str(f);
            });
        }
    }
    for (std::uint32_t l : {2U, 3U, 5U, 7U, 11U, 13U}) {
        const auto h = fixed_point_histogram(build_action(ActionDescriptor::gl2(l)));
        for (std::uint32_t k = 1; k <= 4; ++k) {
            const auto b = burnside_moment(h, k);
            const auto f = gl2_moment(l, k);
            r.check(ExactRational(b) == f, [&] {
                return "gl2(" + std::to_string(l) + ") k=" + std::to_string(k) + ": " + b.str() + " vs " + detail::str(f);
            });
        }
    }
    return r;
}

// 2
inline SuiteResult suite_orbit_divisor_counts(const VerifyOptions&) {
    SuiteResult r{2, "orbit-divisor-counts", true, 0, {}, {}};
    for (std::uint32_t m = 1; m <= 3; ++m)
        for (std::uint32_t n = 1; n <= 12; ++n) {
            const auto b = burnside_moment(glm_fixed_point_histogram(n, m), 1);
            r.check(b == divisor_count(n), [&] {
                return "glm(" + std::to_string(n) + "," + std::to_string(m) + "): " + b.str() + " vs d(n) = " +
                       std::to_string(divisor_count(n));
            });
        }
    for (int d : kClassNumberOneFields) {
        const auto spec = QuadOrderSpec::make(d);
        for (std::uint32_t n = 1; n <= 20; ++n) {
            const auto b = burnside_moment(build_action(ActionDescriptor::quad_units(n, d)), 1);
            r.check(b == dk(n, spec), [&] {
                return "quad(" + std::to_string(n) + "," + std::to_string(d) + "): " + b.str() + " vs d_K(n) = " +
                       std::to_string(dk(n, spec));
            });
        }
    }
    r.notes.push_back("GL_m histograms streamed by CRT and column counting");
    return r;
}

// 3
inline SuiteResult suite_gl2_fixed_points(const VerifyOptions&) {
    SuiteResult r{3, "gl2-fixed-points", true, 0, {}, {}};
    for (std::uint64_t l : {2U, 3U, 5U, 7U}) {
        const auto h = fixed_point_histogram(build_action(ActionDescriptor::gl2(static_cast<std::uint32_t>(l))));
        const std::uint64_t at_l = h.counts.count(l) ? h.counts.at(l) : 0;
        const std::uint64_t at_l2 = h.counts.count(l * l) ? h.counts.at(l * l) : 0;
        r.check(at_l == l * l * l - 2 * l - 1, [&] {
            return "gl2(" + std::to_string(l) + "): bucket l has " + std::to_string(at_l);
        });
        r.check(at_l2 == 1, [&] { return "gl2(" + std::to_string(l) + "): bucket l^2 has " + std::to_string(at_l2); });
    }
    return r;
}

// 4
inline SuiteResult suite_psi_partition(const VerifyOptions&) {
    SuiteResult r{4, "psi-partition", true, 0, {}, {}};
    for (std::uint64_t n = 1; n <= 200; ++n)
        for (std::uint32_t m = 1; m <= 3; ++m) {
            BigInt sum = 0;
            for (auto d : divisors(n)) sum += psi(n / d, m);
            r.check(sum == big_pow(BigInt(n), m),
                    [&] { return "sum psi(n/r) != n^m at n=" + std::to_string(n) + " m=" + std::to_string(m); });
        }
    for (std::uint32_t n = 1; n <= 10; ++n) {
        const auto action = build_action(ActionDescriptor::glm(n, 2));
        std::uint64_t covered = 0;
        for (auto rr : divisors(n)) {
            // (r, 0)^T has index r * n (r = n is the zero vector)
            const auto idx = static_cast<std::uint32_t>((rr % n) * n);
            const auto size = orbit_of(action, idx).size();
            covered += size;
            r.check(BigInt(size) == psi(n / rr, 2), [&] {
                return "glm(" + std::to_string(n) + ",2): orbit of (" + std::to_string(rr) + ",0) has size " +
                       std::to_string(size) + ", psi = " + psi(n / rr, 2).str();
            });
        }
        r.check(covered == static_cast<std::uint64_t>(n) * n,
                [&] { return "glm(" + std::to_string(n) + ",2): orbits do not partition n^2"; });
    }
    return r;
}

// 5
inline SuiteResult suite_formula_identities(const VerifyOptions&) {
    SuiteResult r{5, "formula-identities", true, 0, {}, {}};
    for (std::uint64_t n = 1; n <= 2000; ++n) {
        for (std::uint32_t k = 0; k <= 8; ++k) {
            const auto a = mk_divisor_sum(n, k), b = mk_euler_product(n, k);
            r.check(a == b, [&] { return "mk(" + std::to_string(n) + "," + std::to_string(k) + ") forms differ"; });
        }
        r.check(mk(n, 1) == divisor_count(n), [&] { return "M_1(" + std::to_string(n) + ") != d(n)"; });
    }
    for (std::uint64_t l = 2; l <= 13; ++l) {
        if (!is_prime(l)) continue;
        for (std::uint32_t k = 1; k <= 6; ++k)
            r.check(gl2_moment(l, k) == noncm_moment(l, k), [&] {
                return "gl2_moment vs noncm factor at l=" + std::to_string(l) + " k=" + std::to_string(k);
            });
        r.check(gl2_moment(l, 1) == 2, [&] { return "gl2_moment(" + std::to_string(l) + ",1) != d(l)"; });
        if (l == 2) continue;
        for (int dkl = 2; dkl <= 4; ++dkl) {
            for (std::uint32_t k = 1; k <= 6; ++k)
                r.check(cm_moment(l, k, dkl) == cm_moment_density_form(l, k, dkl), [&] {
                    return "cm forms differ at l=" + std::to_string(l) + " k=" + std::to_string(k);
                });
            r.check(cm_moment(l, 1, dkl) == ExactRational(dkl + 2, 2),
                    [&] { return "cm_moment(" + std::to_string(l) + ",1) != (d_K + d)/2"; });
        }
    }
    for (int d : kClassNumberOneFields)
        for (std::uint64_t l = 3; l <= 13; ++l)
            if (is_prime(l)) {
                const auto dkl = static_cast<int>(dk(l, QuadOrderSpec::make(d)));
                r.check(cm_moment(l, 1, dkl) == ExactRational(dkl + static_cast<int>(divisor_count(l)), 2),
                        [&] { return "cm k=1 specialization at l=" + std::to_string(l) + " d=" + std::to_string(d); });
            }
    return r;
}

// 6
inline SuiteResult suite_power_convergence(const VerifyOptions& opt) {
    SuiteResult r{6, "power-convergence", true, 0, {}, {}};
    const double tol = opt.tolerance.value_or(0.02);
    const std::uint64_t x = 1'000'000;
    struct Case {
        std::uint32_t n;
        std::int64_t a;
        std::uint32_t k;
    };
    auto run = [&](const CounterSpec& c, std::uint32_t k) {
        const auto rep = empirical_moment(c, k, x, {opt.threads});
        const bool ok = rep.predicted && detail::within_relative(rep.empirical, *rep.predicted, tol);
        r.notes.push_back(rep.scenario + " k=" + std::to_string(k) + ": " + to_decimal(rep.empirical, 5) + " vs " +
                          rep.predicted_label + " = " + (rep.predicted ? detail::str(*rep.predicted) : "-"));
        r.check(ok, [&] { return r.notes.back(); });
    };
    for (auto [n, a, k] : std::vector<Case>{{4, 1, 1}, {4, 1, 2}, {6, 1, 2}, {3, 2, 1}, {8, 3, 2}})
        run(CounterSpec::power(n, a), k);
    run(CounterSpec::product(6, 2, 1, 1), 1);
    return r;
}

// 7
inline SuiteResult suite_noncm_torsion(const VerifyOptions& opt) {
    SuiteResult r{7, "noncm-torsion", true, 0, {}, {}};
    const double tol = opt.tolerance.value_or(0.05);
    const auto c = CounterSpec::torsion(parse_curve("17a3"), 3);
    for (std::uint32_t k : {1U, 2U}) {
        const auto rep = empirical_moment(c, k, 100'000, {opt.threads});
        r.notes.push_back("17a3 l=3 k=" + std::to_string(k) + ": " + to_decimal(rep.empirical, 5) + " vs " +
                          detail::str(*rep.predicted));
        r.check(detail::within_relative(rep.empirical, *rep.predicted, tol), [&] { return r.notes.back(); });
    }
    const auto dist = empirical_distribution(c, 100'000, std::nullopt, {opt.threads});
    const auto dens = gl2_densities(3);
    const std::uint64_t atoms[] = {1, 3, 9};
    for (int i = 0; i < 3; ++i) {
        const ExactRational mass = dist.masses.count(atoms[i]) ? dist.masses.at(atoms[i]) : ExactRational(0);
        const double diff = std::abs(to_double(mass - dens[i]));
        r.notes.push_back("mass at " + std::to_string(atoms[i]) + ": " + to_decimal(mass, 5) + " vs " +
                          detail::str(dens[i]));
        r.check(diff <= tol, [&] { return r.notes.back(); });
    }
    return r;
}

// 8
inline SuiteResult suite_cm_torsion(const VerifyOptions& opt) {
    SuiteResult r{8, "cm-torsion", true, 0, {}, {}};
    const double tol = opt.tolerance.value_or(0.05);
    const auto curve = parse_curve("cm:-1");
    const auto spec = *curve.cm;
    const std::uint64_t x = 100'000;
    for (std::uint64_t l : {5U, 3U}) {
        const auto c = CounterSpec::torsion(curve, l);
        const auto whole = empirical_moment(c, 1, x, {opt.threads});
        const auto inert = conditioned_moment(
            c.with_filter({spec, {SplittingType::Inert, SplittingType::Ramified}}), 1, x, {opt.threads});
        const auto split = conditioned_moment(c.with_filter({spec, {SplittingType::Split}}), 1, x, {opt.threads});
        for (const auto* rep : {&whole, &inert, &split}) {
            r.notes.push_back(rep->scenario + " k=1: " + to_decimal(rep->empirical, 5) + " vs " + rep->predicted_label +
                              " = " + detail::str(*rep->predicted));
            r.check(detail::within_relative(rep->empirical, *rep->predicted, tol), [&] { return r.notes.back(); });
        }
        r.check(inert.empirical + split.empirical == whole.empirical,
                [&] { return "split + inert/ramified sums do not add up at l=" + std::to_string(l); });
    }
    return r;
}

// 9
inline SuiteResult suite_distribution(const VerifyOptions& opt) {
    SuiteResult r{9, "distribution", true, 0, {}, {}};
    const double tol = opt.tolerance.value_or(0.01);
    const auto action = fixed_point_histogram(build_action(ActionDescriptor::units(4)));
    const auto dist = empirical_distribution(CounterSpec::power(4, 1), 1'000'000, action, {opt.threads});
    for (std::uint64_t atom : {2U, 4U}) {
        const ExactRational mass = dist.masses.count(atom) ? dist.masses.at(atom) : ExactRational(0);
        const ExactRational want = dist.predicted->count(atom) ? dist.predicted->at(atom) : ExactRational(0);
        r.notes.push_back("mass at " + std::to_string(atom) + ": " + to_decimal(mass, 6) + " vs " + detail::str(want));
        r.check(want == ExactRational(1, 2) && std::abs(to_double(mass - want)) <= tol, [&] { return r.notes.back(); });
    }
    const std::uint32_t K = 25;
    std::vector<ExactRational> moments;
    for (std::uint32_t k = 0; k <= K; ++k) moments.push_back(mk(4, k));
    // floating evaluation of the atom sum and the partial sum
    const double slack = 1e-12;
    for (double t : {0.1, 0.5, 0.9}) {
        const auto sample = characteristic_function(moments, t, K, 4);
        std::complex<double> atoms = 0;
        for (const auto& [m, w] : *dist.predicted) atoms += to_double(w) * std::exp(std::complex<double>(0, t * m));
        const double gap = std::abs(sample.value - atoms);
        r.notes.push_back("phi(" + detail::fmt(t) + "): gap " + detail::fmt(gap) + ", tail bound " +
                          detail::fmt(sample.tail_bound));
        r.check(gap <= sample.tail_bound + slack, [&] { return r.notes.back(); });
    }
    return r;
}

/// Descriptors exercised by the oracle-equivalence suite.
inline std::vector<ActionDescriptor> oracle_action_family() {
    std::vector<ActionDescriptor> out;
    for (std::uint32_t n = 1; n <= 60; ++n) out.push_back(ActionDescriptor::units(n));
    for (std::uint32_t n = 1; n <= 30; ++n) out.push_back(ActionDescriptor::semidirect(n));
    for (int d : kClassNumberOneFields)
        for (std::uint32_t n = 1; n <= 20; ++n) out.push_back(ActionDescriptor::quad_units(n, d));
    for (std::uint32_t l : {2U, 3U, 5U, 7U, 11U, 13U}) out.push_back(ActionDescriptor::gl2(l));
    for (std::uint32_t n = 1; n <= 12; ++n) out.push_back(ActionDescriptor::glm(n, 2));
    for (std::uint32_t n = 1; n <= 4; ++n) out.push_back(ActionDescriptor::glm(n, 3));
    return out;
}

inline constexpr std::uint32_t kOracleMaxK = 6;

// 10
inline SuiteResult suite_oracle_equivalence(const VerifyOptions&) {
    SuiteResult r{10, "oracle-equivalence", true, 0, {}, {}};
    const std::uint64_t limit = 1'000'000;
    for (const auto& desc : oracle_action_family()) {
        const auto action = build_action(desc);
        const auto h = fixed_point_histogram(action);
        for (std::uint32_t k = 1; k <= kOracleMaxK; ++k) {
            const auto tuples = checked_pow(action.set_size(), k);
            if (!tuples || *tuples > limit) break;
            const auto b = burnside_moment(h, k);
            const auto o = orbit_count_oracle(action, k, limit);
            r.check(b == o, [&] {
                return desc.to_string() + " k=" + std::to_string(k) + ": burnside " + b.str() + " vs oracle " +
                       std::to_string(o);
            });
        }
    }
    r.notes.push_back(std::to_string(r.checks) + " (action, k) pairs, k <= " + std::to_string(kOracleMaxK));
    return r;
}

struct NamedSuite {
    int criterion;
    const char* name;
    SuiteResult (*run)(const VerifyOptions&);
};

inline const std::vector<NamedSuite>& suites() {
    static const std::vector<NamedSuite> all = {
        {1, "orbit-vs-closed-form", suite_orbit_vs_closed_form},
        {2, "orbit-divisor-counts", suite_orbit_divisor_counts},
        {3, "gl2-fixed-points", suite_gl2_fixed_points},
        {4, "psi-partition", suite_psi_partition},
        {5, "formula-identities", suite_formula_identities},
        {6, "power-convergence", suite_power_convergence},
        {7, "noncm-torsion", suite_noncm_torsion},
        {8, "cm-torsion", suite_cm_torsion},
        {9, "distribution", suite_distribution},
        {10, "oracle-equivalence", suite_oracle_equivalence},
    };
    return all;
}

/// Runs one suite by name, or every suite for "all".
inline std::vector<SuiteResult> run_suite(const std::string& name, const VerifyOptions& opt = {}) {
    std::vector<SuiteResult> out;
    for (const auto& s : suites())
        if (name == "all" || name == s.name) out.push_back(s.run(opt));
    if (out.empty()) {
        std::string known;
        for (const auto& s : suites()) known += std::string(" ") + s.name;
        throw UsageError("verify: unknown suite \"" + name + "\"; known: all" + known);
    }
    return out;
}

} // namespace torsion_moments
