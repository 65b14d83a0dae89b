#pragma once

/**
 * @file moment_lab.hpp
 * @brief Empirical moments of N_p over primes p <= x for the power, product
 *        and elliptic-torsion scenarios, compared against the exact limits.
 *
 * Normalization is by pi(x) over all primes; excluded primes and primes
 * outside a splitting filter count as N_p = 0.
 */

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "closed_forms.hpp"
#include "core_arith.hpp"
#include "local_counts.hpp"
#include "orbit_engine.hpp"

namespace torsion_moments {

// =============================================================================
// Scenarios
// =============================================================================

struct SplittingFilter {
    QuadOrderSpec spec;
    std::set<SplittingType> accepted;

    bool accepts(std::uint64_t p) const { return accepted.count(splitting_type(p, spec)) > 0; }

    bool is_split_class() const { return accepted == std::set<SplittingType>{SplittingType::Split}; }
    bool is_inert_ramified_class() const {
        return accepted == std::set<SplittingType>{SplittingType::Inert, SplittingType::Ramified};
    }

    std::string to_string() const {
        std::string s;
        for (auto t : accepted) s += (s.empty() ? "" : "+") + std::string(torsion_moments::to_string(t));
        return s + "@d=" + std::to_string(spec.d);
    }
};

/// "split", "inert", "ramified" or a '+'/','-joined list such as "inert+ramified".
inline std::set<SplittingType> parse_splitting_types(const std::string& text) {
    std::set<SplittingType> out;
    std::string item;
    auto flush = [&] {
        if (item == "split") out.insert(SplittingType::Split);
        else if (item == "inert") out.insert(SplittingType::Inert);
        else if (item == "ramified") out.insert(SplittingType::Ramified);
        else throw UsageError("filter: unknown splitting type \"" + item + "\"");
        item.clear();
    };
    for (char ch : text) {
        if (ch == '+' || ch == ',') flush();
        else item += ch;
    }
    flush();
    return out;
}

class CounterSpec {
public:
    enum class Kind { Power, Product, Torsion };

    static CounterSpec power(std::uint32_t n, std::int64_t a) {
        CounterSpec c;
        c.kind_ = Kind::Power;
        c.eq_ = {n, a};
        validate_power_conditions(c.eq_);
        c.label_ = "power:" + std::to_string(n) + "," + std::to_string(a);
        return c;
    }

    /// N_p(x^n - a)^k1 * N_p(x^n - 1)^k2
    static CounterSpec product(std::uint32_t n, std::int64_t a, std::uint32_t k1, std::uint32_t k2) {
        CounterSpec c;
        c.kind_ = Kind::Product;
        c.eq_ = {n, a};
        if (a == 1) throw UsageError("product scenario: a must differ from 1");
        validate_power_conditions(c.eq_);
        if (k1 + k2 == 0) throw UsageError("product scenario: k1 + k2 must be >= 1");
        c.k1_ = k1;
        c.k2_ = k2;
        c.label_ = "product:" + std::to_string(n) + "," + std::to_string(a) + "," + std::to_string(k1) + "," +
                   std::to_string(k2);
        return c;
    }

    static CounterSpec torsion(WeierstrassCurve curve, std::uint64_t l) {
        if (!is_prime(l)) throw UsageError("torsion scenario: l=" + std::to_string(l) + " is not prime");
        if (l > 50) throw UsageError("torsion scenario: l must be <= 50");
        CounterSpec c;
        c.kind_ = Kind::Torsion;
        c.l_ = l;
        c.psi_ = division_polynomial(curve, l);
        c.label_ = "torsion:" + curve.label + ":" + std::to_string(l);
        c.curve_ = std::move(curve);
        return c;
    }

    CounterSpec with_filter(SplittingFilter filter) const {
        if (kind_ == Kind::Product) throw UsageError("splitting filter applies only to power and torsion scenarios");
        if (filter.accepted.empty()) throw UsageError("splitting filter: no accepted types");
        CounterSpec c = *this;
        c.filter_ = std::move(filter);
        return c;
    }

    Kind kind() const { return kind_; }
    const PowerEquation& equation() const { return eq_; }
    std::uint32_t k1() const { return k1_; }
    std::uint32_t k2() const { return k2_; }
    const WeierstrassCurve& curve() const { return curve_; }
    std::uint64_t ell() const { return l_; }
    const std::optional<SplittingFilter>& filter() const { return filter_; }

    std::string label() const { return filter_ ? label_ + "|" + filter_->to_string() : label_; }

    bool excluded(std::uint64_t p) const {
        if (kind_ == Kind::Torsion) return torsion_prime_excluded(curve_, p, l_);
        const std::uint64_t na = static_cast<std::uint64_t>(eq_.n) * static_cast<std::uint64_t>(eq_.a);
        return na % p == 0;
    }

    /// N_p for a non-excluded prime.
    std::uint64_t count(std::uint64_t p) const {
        switch (kind_) {
        case Kind::Power: return count_roots_formula(eq_, p);
        case Kind::Product: {
            const auto na = count_roots_formula(eq_, p);
            const auto n1 = count_roots_formula({eq_.n, 1}, p);
            return *checked_pow(na, k1_) * *checked_pow(n1, k2_);
        }
        case Kind::Torsion: return ec_torsion_count_divpoly(curve_, p, l_, psi_);
        }
        return 0;
    }

private:
    CounterSpec() = default;

    Kind kind_ = Kind::Power;
    PowerEquation eq_;
    std::uint32_t k1_ = 0, k2_ = 0;
    WeierstrassCurve curve_;
    std::uint64_t l_ = 0;
    IntPoly psi_;
    std::optional<SplittingFilter> filter_;
    std::string label_;
};

// =============================================================================
// Tallies
// =============================================================================

/// Per-range counts. values[] covers included primes only.
struct Tally {
    std::uint64_t pi = 0;
    std::uint64_t excluded = 0;
    std::uint64_t filtered_out = 0;
    std::map<std::uint64_t, std::uint64_t> values;

    Tally& operator+=(const Tally& o) {
        pi += o.pi;
        excluded += o.excluded;
        filtered_out += o.filtered_out;
        for (auto [v, c] : o.values) values[v] += c;
        return *this;
    }

    std::uint64_t included() const { return pi - excluded - filtered_out; }

    /// sum of N_p^k over included primes (0^0 = 1 there); excluded primes add 0.
    BigInt power_sum(std::uint32_t k) const {
        BigInt s = 0;
        for (auto [v, c] : values) s += big_pow(BigInt(v), k) * c;
        return s;
    }

    /// Histogram over all primes, excluded and filtered-out ones at value 0.
    std::map<std::uint64_t, std::uint64_t> full_histogram() const {
        auto h = values;
        if (excluded + filtered_out > 0) h[0] += excluded + filtered_out;
        return h;
    }
};

struct LabOptions {
    unsigned threads = 1;
    bool good_primes_only = false;  ///< normalize by included primes instead of pi(x)
};

inline Tally tally_range(const CounterSpec& c, const PrimeStream& range) {
    Tally t;
    range.for_each([&](std::uint64_t p) {
        ++t.pi;
        if (c.excluded(p)) {
            ++t.excluded;
            return;
        }
        if (c.filter() && !c.filter()->accepts(p)) {
            ++t.filtered_out;
            return;
        }
        ++t.values[c.count(p)];
    });
    return t;
}

/// Shards [lo, hi] over `threads` workers; the merge is an exact sum, so the result is thread-count independent.
inline Tally tally(const CounterSpec& c, std::uint64_t lo, std::uint64_t hi, unsigned threads = 1) {
    const PrimeStream range(lo, hi);
    if (threads <= 1) return tally_range(c, range);
    const auto shards = range.split(threads);
    std::vector<Tally> parts(shards.size());
    std::vector<std::thread> workers;
    workers.reserve(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i)
        workers.emplace_back([&, i] { parts[i] = tally_range(c, shards[i]); });
    for (auto& w : workers) w.join();
    Tally total;
    for (const auto& part : parts) total += part;
    return total;
}

// =============================================================================
// Reports
// =============================================================================

/// Fixed-point decimal rendering, rounded half away from zero.
inline std::string to_decimal(const ExactRational& q, unsigned digits = 12) {
    const BigInt num = numerator_of(q), den = denominator_of(q);
    const bool negative = num < 0;
    const BigInt scale = big_pow(BigInt(10), digits);
    BigInt scaled = (abs(num) * scale * 2 + den) / (den * 2);
    const BigInt whole = scaled / scale;
    std::string frac = BigInt(scaled % scale).str();
    std::string s = (negative && scaled != 0 ? "-" : "") + whole.str();
    if (digits > 0) s += "." + std::string(digits - frac.size(), '0') + frac;
    return s;
}

struct MomentReport {
    std::string scenario;
    std::uint32_t k = 1;
    std::uint64_t x = 0;
    std::uint64_t pi_x = 0;
    std::uint64_t excluded = 0;
    std::uint64_t filtered_out = 0;
    bool good_primes_only = false;
    ExactRational empirical;
    std::optional<ExactRational> predicted;
    std::string predicted_label;
    /// For CM curves: the limit obtained from the orbit counts of the CM Galois image.
    std::optional<ExactRational> orbit_predicted;
    std::map<std::uint64_t, std::uint64_t> histogram;

    std::optional<ExactRational> abs_err() const {
        if (!predicted) return std::nullopt;
        return abs(empirical - *predicted);
    }

    std::optional<double> rel_err() const {
        if (!predicted || *predicted == 0) return std::nullopt;
        return to_double(*abs_err() / abs(*predicted));
    }
};

namespace detail {

inline ExactRational mk_shifted(std::uint64_t n, std::int64_t k) {
    if (k < 0) throw UsageError("no closed form for a negative moment order");
    return mk(n, static_cast<std::uint32_t>(k));
}

/**
 * CM limit from the Galois image: split primes have Frobenius uniform in
 * (O_K/l)^x acting on O_K/l; inert primes give gcd(l, p+1). Only for odd l
 * unramified in K.
 */
inline std::optional<ExactRational> cm_orbit_prediction(const QuadOrderSpec& spec, std::uint64_t l,
                                                         std::uint32_t k) {
    if (l == 2 || splitting_type(l, spec) == SplittingType::Ramified) return std::nullopt;
    const auto h = fixed_point_histogram(ActionDescriptor::quad_units(static_cast<std::uint32_t>(l), spec.d));
    return ExactRational(burnside_moment(h, k)) / 2 + inert_partial_moment(l, k);
}

} // namespace detail

/// Closed-form limit attached to an unconditioned moment; empty when none applies.
inline std::optional<std::pair<ExactRational, std::string>> predicted_moment(const CounterSpec& c,
                                                                             std::uint32_t k) {
    using R = std::pair<ExactRational, std::string>;
    if (k == 0) return R{ExactRational(1), "1"};
    const auto n = c.equation().n;
    auto mk_label = [&](std::int64_t kk) {
        return "M_" + std::to_string(kk) + "(" + std::to_string(n) + ")";
    };
    switch (c.kind()) {
    case CounterSpec::Kind::Power:
        if (c.equation().a == 1) return R{mk(n, k), mk_label(k)};
        return R{detail::mk_shifted(n, static_cast<std::int64_t>(k) - 1), mk_label(static_cast<std::int64_t>(k) - 1)};
    case CounterSpec::Kind::Product: {
        const std::int64_t order = static_cast<std::int64_t>(k) * (c.k1() + c.k2()) - 1;
        return R{detail::mk_shifted(n, order), mk_label(order)};
    }
    case CounterSpec::Kind::Torsion: {
        const auto l = c.ell();
        if (!c.curve().cm) return R{gl2_moment(l, k), "gl2_moment(" + std::to_string(l) + "," + std::to_string(k) + ")"};
        if (l == 2) return std::nullopt;
        const auto dkl = static_cast<int>(dk(l, *c.curve().cm));
        return R{cm_moment(l, k, dkl),
                 "cm_moment(" + std::to_string(l) + "," + std::to_string(k) + "," + std::to_string(dkl) + ")"};
    }
    }
    return std::nullopt;
}

/// Closed-form limit of the filtered sum, normalized by pi(x).
inline std::optional<std::pair<ExactRational, std::string>> predicted_conditioned_moment(const CounterSpec& c,
                                                                                         std::uint32_t k) {
    using R = std::pair<ExactRational, std::string>;
    const auto& f = *c.filter();
    const bool split = f.is_split_class();
    const bool inert_ram = f.is_inert_ramified_class();
    if (c.kind() == CounterSpec::Kind::Torsion && c.curve().cm && f.spec == *c.curve().cm && c.ell() != 2) {
        const auto l = c.ell();
        if (inert_ram) return R{inert_partial_moment(l, k), "M_" + std::to_string(k) + "(" + std::to_string(l) + ")/2"};
        if (split) {
            const auto dkl = static_cast<int>(dk(l, f.spec));
            return R{split_partial_moment(l, k, dkl), "sum_i delta_i^s " + std::to_string(l) + "^(i" +
                                                          std::to_string(k) + "), d_K=" + std::to_string(dkl)};
        }
    }
    if (k == 0 && (split || inert_ram)) return R{ExactRational(1, 2), "1/2"};
    return std::nullopt;
}

namespace detail {

inline MomentReport make_report(const CounterSpec& c, std::uint32_t k, std::uint64_t x, const Tally& t,
                                const LabOptions& opts) {
    MomentReport r;
    r.scenario = c.label();
    r.k = k;
    r.x = x;
    r.pi_x = t.pi;
    r.excluded = t.excluded;
    r.filtered_out = t.filtered_out;
    r.good_primes_only = opts.good_primes_only;
    r.histogram = t.full_histogram();
    const std::uint64_t denom = opts.good_primes_only ? t.included() : t.pi;
    r.empirical = denom == 0 ? ExactRational(0) : ExactRational(t.power_sum(k), BigInt(denom));
    const auto pred = c.filter() ? predicted_conditioned_moment(c, k) : predicted_moment(c, k);
    if (pred) {
        r.predicted = pred->first;
        r.predicted_label = pred->second;
    }
    if (!c.filter() && c.kind() == CounterSpec::Kind::Torsion && c.curve().cm && k > 0)
        r.orbit_predicted = cm_orbit_prediction(*c.curve().cm, c.ell(), k);
    return r;
}

inline void require_bound(std::uint64_t x) {
    if (x < 2) throw UsageError("x must be >= 2");
}

} // namespace detail

inline MomentReport empirical_moment(const CounterSpec& c, std::uint32_t k, std::uint64_t x, LabOptions opts = {}) {
    detail::require_bound(x);
    return detail::make_report(c, k, x, tally(c, 2, x, opts.threads), opts);
}

inline MomentReport conditioned_moment(const CounterSpec& c, std::uint32_t k, std::uint64_t x, LabOptions opts = {}) {
    if (!c.filter()) throw UsageError("conditioned_moment: scenario has no splitting filter");
    return empirical_moment(c, k, x, opts);
}

/// One report per checkpoint from a single ascending pass over the primes.
inline std::vector<MomentReport> convergence_trace(const CounterSpec& c, std::uint32_t k,
                                                   const std::vector<std::uint64_t>& checkpoints,
                                                   LabOptions opts = {}) {
    if (checkpoints.empty()) throw UsageError("trace: no checkpoints");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
        std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end())
        throw UsageError("trace: checkpoints must be strictly ascending");
    detail::require_bound(checkpoints.front());
    std::vector<MomentReport> out;
    Tally running;
    std::uint64_t lo = 2;
    for (auto x : checkpoints) {
        running += tally(c, lo, x, opts.threads);
        lo = x + 1;
        out.push_back(detail::make_report(c, k, x, running, opts));
    }
    return out;
}

// =============================================================================
// Distributions
// =============================================================================

struct CharacteristicSample {
    double t = 0;
    std::uint32_t order = 0;
    std::complex<double> value;  ///< partial sum up to order K
    double tail_bound = 0;
};

/**
 * sum_{k<=K} M_k (it)^k / k!, evaluated exactly in t's binary value, plus the
 * tail bound B^(K+1) |t|^(K+1) / (K+1)! from M_k <= B^k.
 */
inline CharacteristicSample characteristic_function(const std::vector<ExactRational>& moments, double t,
                                                    std::uint32_t order, std::uint64_t bound) {
    if (!(std::abs(t) < 1)) throw UsageError("characteristic_function: |t| must be < 1");
    if (order < 1) throw UsageError("characteristic_function: order K must be >= 1");
    if (moments.size() < order + 1) throw UsageError("characteristic_function: need moments M_0..M_K");
    if (bound < 1) throw UsageError("characteristic_function: bound B must be >= 1");
    const ExactRational tq(t);
    ExactRational re = 0, im = 0;
    ExactRational term = 1;  // t^k / k!
    for (std::uint32_t k = 0; k <= order; ++k) {
        if (k > 0) term = term * tq / k;
        const ExactRational v = moments[k] * term;
        switch (k % 4) {
        case 0: re += v; break;
        case 1: im += v; break;
        case 2: re -= v; break;
        case 3: im -= v; break;
        }
    }
    ExactRational tail = 1;
    const ExactRational bt = ExactRational(BigInt(bound)) * abs(tq);
    for (std::uint32_t k = 1; k <= order + 1; ++k) tail = tail * bt / k;
    return {t, order, {to_double(re), to_double(im)}, to_double(tail)};
}

struct DistributionReport {
    std::string scenario;
    std::uint64_t x = 0;
    std::uint64_t pi_x = 0;
    std::map<std::uint64_t, ExactRational> masses;  ///< value -> share of primes, excluded at 0
    std::vector<std::pair<std::uint64_t, ExactRational>> cdf;  ///< step points (z, H(z))
    std::optional<std::map<std::uint64_t, ExactRational>> predicted;  ///< |G(m)|/|G|
    std::vector<CharacteristicSample> phi;
};

inline DistributionReport empirical_distribution(const CounterSpec& c, std::uint64_t x,
                                                 const std::optional<FixedPointHistogram>& action = std::nullopt,
                                                 LabOptions opts = {}) {
    detail::require_bound(x);
    const Tally t = tally(c, 2, x, opts.threads);
    DistributionReport r;
    r.scenario = c.label();
    r.x = x;
    r.pi_x = t.pi;
    ExactRational cumulative = 0;
    for (auto [v, count] : t.full_histogram()) {
        const ExactRational share(BigInt(count), BigInt(t.pi));
        r.masses[v] = share;
        cumulative += share;
        r.cdf.emplace_back(v, cumulative);
    }
    if (action) r.predicted = predicted_value_distribution(*action);
    return r;
}

/// Empirical moments M_0..M_K read off a distribution's masses.
inline std::vector<ExactRational> moments_from_masses(const std::map<std::uint64_t, ExactRational>& masses,
                                                      std::uint32_t order) {
    std::vector<ExactRational> out;
    for (std::uint32_t k = 0; k <= order; ++k) {
        ExactRational s = 0;
        for (const auto& [v, w] : masses) s += w * ExactRational(big_pow(BigInt(v), k));
        out.push_back(s);
    }
    return out;
}

// =============================================================================
// Serialization
// =============================================================================

inline std::string csv_header() { return "x,pi_x,empirical,predicted,rel_err"; }

inline std::string csv_row(const MomentReport& r) {
    std::string s = std::to_string(r.x) + "," + std::to_string(r.pi_x) + "," + to_decimal(r.empirical) + ",";
    s += r.predicted ? to_decimal(*r.predicted) : "";
    s += ",";
    if (auto e = r.rel_err()) s += to_decimal(ExactRational(*e), 8);
    return s;
}

} // namespace torsion_moments
