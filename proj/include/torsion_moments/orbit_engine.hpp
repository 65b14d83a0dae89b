#pragma once

/**
 * @file orbit_engine.hpp
 * @brief Finite group actions as explicit permutation lists, their fixed-point
 *        histograms, Burnside orbit counts on X^k, and an independent
 *        union-find orbit counter.
 *
 * Supported actions (descriptor syntax in parentheses):
 *   (Z/nZ)^x on Z/nZ by multiplication                    units:n
 *   GL_m(Z/nZ) on (Z/nZ)^m                                 glm:n,m
 *   {(b,d)}, d a unit, on pairs (i,j) -> (b + i d, j d)    semidirect:n
 *   (O_K/nO_K)^x on O_K/nO_K by multiplication             quad:n,d
 *   GL_2(F_l) on F_l^2                                     gl2:l
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "closed_forms.hpp"
#include "core_arith.hpp"
#include "residue_algebra.hpp"

namespace torsion_moments {

inline constexpr std::uint64_t kDefaultGroupBudget = 10'000'000;
inline constexpr std::uint64_t kDefaultPermutationEntryBudget = 50'000'000;
inline constexpr std::uint64_t kDefaultTupleBudget = 10'000'000;
inline constexpr std::uint64_t kDefaultStreamingWorkBudget = 20'000'000'000ULL;

// =============================================================================
// Descriptors
// =============================================================================

struct ActionDescriptor {
    enum class Kind { Units, Glm, Semidirect, QuadUnits, Gl2 };

    Kind kind = Kind::Units;
    std::uint32_t n = 1;  ///< modulus (l for gl2)
    std::uint32_t m = 1;  ///< matrix dimension (glm only)
    int d = 0;            ///< field parameter (quad only)

    static ActionDescriptor units(std::uint32_t n) { return {Kind::Units, n, 1, 0}; }
    static ActionDescriptor glm(std::uint32_t n, std::uint32_t m) { return {Kind::Glm, n, m, 0}; }
    static ActionDescriptor semidirect(std::uint32_t n) { return {Kind::Semidirect, n, 1, 0}; }
    static ActionDescriptor quad_units(std::uint32_t n, int d) { return {Kind::QuadUnits, n, 1, d}; }
    static ActionDescriptor gl2(std::uint32_t l) { return {Kind::Gl2, l, 2, 0}; }

    std::string to_string() const {
        switch (kind) {
        case Kind::Units: return "units:" + std::to_string(n);
        case Kind::Glm: return "glm:" + std::to_string(n) + "," + std::to_string(m);
        case Kind::Semidirect: return "semidirect:" + std::to_string(n);
        case Kind::QuadUnits: return "quad:" + std::to_string(n) + "," + std::to_string(d);
        case Kind::Gl2: return "gl2:" + std::to_string(n);
        }
        return "?";
    }

    /// |X|
    std::uint64_t set_size() const {
        switch (kind) {
        case Kind::Units: return n;
        case Kind::Glm: return *checked_pow(n, m);
        case Kind::Semidirect:
        case Kind::QuadUnits: return static_cast<std::uint64_t>(n) * n;
        case Kind::Gl2: return static_cast<std::uint64_t>(n) * n;
        }
        return 0;
    }

    /// |G|
    BigInt group_order() const {
        switch (kind) {
        case Kind::Units: return euler_phi(n);
        case Kind::Glm: return glm_order(n, m);
        case Kind::Semidirect: return BigInt(euler_phi(n)) * n;
        case Kind::QuadUnits: {
            const auto spec = QuadOrderSpec::make(d);
            std::uint64_t count = 0;
            for (std::uint32_t a = 0; a < n; ++a)
                for (std::uint32_t b = 0; b < n; ++b)
                    if (quad_is_unit(QuadResidue::make(a, b, spec, n))) ++count;
            return count;
        }
        case Kind::Gl2: return glm_order(n, 2);
        }
        return 0;
    }
};

namespace detail {

inline std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& context) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UsageError(context + ": cannot parse integer \"" + item + "\"");
        }
    }
    return out;
}

} // namespace detail

inline ActionDescriptor parse_action(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("action: expected kind:args, got \"" + text + "\"");
    const std::string kind = text.substr(0, colon);
    const auto args = detail::parse_int_list(text.substr(colon + 1), "action \"" + text + "\"");
    auto need = [&](std::size_t count) {
        if (args.size() != count)
            throw UsageError("action \"" + text + "\": expected " + std::to_string(count) + " argument(s)");
    };
    auto positive = [&](std::int64_t v, const char* what) -> std::uint32_t {
        if (v < 1 || v > 1'000'000) throw UsageError("action \"" + text + "\": " + what + " out of range");
        return static_cast<std::uint32_t>(v);
    };
    if (kind == "units") {
        need(1);
        return ActionDescriptor::units(positive(args[0], "n"));
    }
    if (kind == "glm") {
        need(2);
        const auto m = positive(args[1], "m");
        if (m > kMaxMatrixDim) throw UsageError("action \"" + text + "\": m must be <= 4");
        return ActionDescriptor::glm(positive(args[0], "n"), m);
    }
    if (kind == "semidirect") {
        need(1);
        return ActionDescriptor::semidirect(positive(args[0], "n"));
    }
    if (kind == "quad") {
        need(2);
        QuadOrderSpec::make(static_cast<int>(args[1]));
        return ActionDescriptor::quad_units(positive(args[0], "n"), static_cast<int>(args[1]));
    }
    if (kind == "gl2") {
        need(1);
        const auto l = positive(args[0], "l");
        if (!is_prime(l)) throw UsageError("action \"" + text + "\": l must be prime");
        return ActionDescriptor::gl2(l);
    }
    throw UsageError("action: unknown kind \"" + kind + "\"");
}

// =============================================================================
// Permutation actions
// =============================================================================

/**
 * A finite group given as the full list of its elements, each a permutation
 * of {0, ..., |X|-1}. Element g maps i to element(g)[i].
 */
class PermutationAction {
public:
    PermutationAction(std::uint32_t set_size, std::vector<std::uint32_t> images, std::vector<std::string> labels = {})
        : set_size_(set_size), images_(std::move(images)), labels_(std::move(labels)) {
        if (set_size_ == 0) throw UsageError("PermutationAction: empty set");
        if (images_.size() % set_size_ != 0) throw UsageError("PermutationAction: image table is ragged");
        std::vector<std::uint8_t> seen(set_size_);
        for (std::size_t g = 0; g < order(); ++g) {
            std::fill(seen.begin(), seen.end(), 0);
            for (auto v : element(g)) {
                if (v >= set_size_ || seen[v]) throw UsageError("PermutationAction: element is not a bijection");
                seen[v] = 1;
            }
        }
        if (!labels_.empty() && labels_.size() != order()) throw UsageError("PermutationAction: label count mismatch");
    }

    std::uint32_t set_size() const { return set_size_; }
    std::size_t order() const { return images_.size() / set_size_; }

    std::span<const std::uint32_t> element(std::size_t g) const {
        return {images_.data() + g * set_size_, set_size_};
    }

    const std::string* label(std::size_t g) const { return labels_.empty() ? nullptr : &labels_[g]; }

    std::uint32_t fixed_points(std::size_t g) const {
        const auto perm = element(g);
        std::uint32_t count = 0;
        for (std::uint32_t i = 0; i < set_size_; ++i)
            if (perm[i] == i) ++count;
        return count;
    }

    /// Index of the element equal to `perm`, or order() when absent.
    std::size_t find(std::span<const std::uint32_t> perm) const {
        ensure_index();
        const auto [lo, hi] = index_.equal_range(hash(perm));
        for (auto it = lo; it != hi; ++it)
            if (std::equal(perm.begin(), perm.end(), element(it->second).begin())) return it->second;
        return order();
    }

    /// Contains the identity, closed under composition and inverse. O(|G|^2 |X|).
    bool is_group() const {
        std::vector<std::uint32_t> id(set_size_);
        std::iota(id.begin(), id.end(), 0U);
        if (find(id) == order()) return false;
        std::vector<std::uint32_t> tmp(set_size_);
        for (std::size_t g = 0; g < order(); ++g) {
            const auto pg = element(g);
            for (std::uint32_t i = 0; i < set_size_; ++i) tmp[pg[i]] = i;
            if (find(tmp) == order()) return false;
            for (std::size_t h = 0; h < order(); ++h) {
                const auto ph = element(h);
                for (std::uint32_t i = 0; i < set_size_; ++i) tmp[i] = pg[ph[i]];
                if (find(tmp) == order()) return false;
            }
        }
        return true;
    }

private:
    static std::uint64_t hash(std::span<const std::uint32_t> perm) {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto v : perm) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return h;
    }

    void ensure_index() const {
        if (!index_.empty() || order() == 0) return;
        index_.reserve(order());
        for (std::size_t g = 0; g < order(); ++g) index_.emplace(hash(element(g)), g);
    }

    std::uint32_t set_size_;
    std::vector<std::uint32_t> images_;
    std::vector<std::string> labels_;
    mutable std::unordered_multimap<std::uint64_t, std::size_t> index_;
};

namespace detail {

inline void check_build_budget(const ActionDescriptor& desc, std::uint64_t group_budget) {
    const BigInt order = desc.group_order();
    const BigInt entries = order * desc.set_size();
    if (order > group_budget || entries > kDefaultPermutationEntryBudget)
        throw CapacityError("build_action: " + desc.to_string() + " exceeds the materialization budget (|G| <= " +
                                std::to_string(group_budget) + ", |G||X| <= " +
                                std::to_string(kDefaultPermutationEntryBudget) + ")",
                            "|G| = " + order.str());
}

inline std::uint32_t vector_index(const std::array<std::uint32_t, kMaxMatrixDim>& v, std::uint32_t m,
                                  std::uint32_t n) {
    std::uint32_t idx = 0;
    for (std::uint32_t i = 0; i < m; ++i) idx = idx * n + v[i];
    return idx;
}

inline std::array<std::uint32_t, kMaxMatrixDim> vector_from_index(std::uint32_t idx, std::uint32_t m,
                                                                  std::uint32_t n) {
    std::array<std::uint32_t, kMaxMatrixDim> v{};
    for (std::uint32_t i = m; i-- > 0;) {
        v[i] = idx % n;
        idx /= n;
    }
    return v;
}

inline std::string matrix_label(const MatrixModN& a) {
    std::string s = "[";
    for (std::uint32_t r = 0; r < a.m; ++r) {
        s += (r ? ",[" : "[");
        for (std::uint32_t c = 0; c < a.m; ++c) s += (c ? "," : "") + std::to_string(a.at(r, c));
        s += "]";
    }
    return s + "]";
}

inline PermutationAction build_matrix_action(std::uint32_t n, std::uint32_t m, std::uint64_t group_budget) {
    const auto size = static_cast<std::uint32_t>(*checked_pow(n, m));
    std::vector<std::uint32_t> images;
    std::vector<std::string> labels;
    enumerate_glm(
        n, m,
        [&](const MatrixModN& a) {
            for (std::uint32_t idx = 0; idx < size; ++idx) {
                const auto v = vector_from_index(idx, m, n);
                std::array<std::uint32_t, kMaxMatrixDim> w{};
                for (std::uint32_t r = 0; r < m; ++r) {
                    std::uint64_t acc = 0;
                    for (std::uint32_t c = 0; c < m; ++c) acc += static_cast<std::uint64_t>(a.at(r, c)) * v[c];
                    w[r] = static_cast<std::uint32_t>(acc % n);
                }
                images.push_back(vector_index(w, m, n));
            }
            labels.push_back(matrix_label(a));
        },
        group_budget);
    return PermutationAction(size, std::move(images), std::move(labels));
}

} // namespace detail

/// Materialize the full element list of a descriptor's action.
inline PermutationAction build_action(const ActionDescriptor& desc, std::uint64_t group_budget = kDefaultGroupBudget) {
    detail::check_build_budget(desc, group_budget);
    const std::uint32_t n = desc.n;
    std::vector<std::uint32_t> images;
    std::vector<std::string> labels;
    switch (desc.kind) {
    case ActionDescriptor::Kind::Units:
        for (std::uint32_t r = 0; r < n; ++r) {
            if (std::gcd(r, n) != 1) continue;
            for (std::uint32_t x = 0; x < n; ++x)
                images.push_back(static_cast<std::uint32_t>(static_cast<std::uint64_t>(r) * x % n));
            labels.push_back(std::to_string(r));
        }
        return PermutationAction(n, std::move(images), std::move(labels));
    case ActionDescriptor::Kind::Semidirect:
        for (std::uint32_t d = 0; d < n; ++d) {
            if (std::gcd(d, n) != 1) continue;
            for (std::uint32_t b = 0; b < n; ++b) {
                for (std::uint32_t i = 0; i < n; ++i)
                    for (std::uint32_t j = 0; j < n; ++j) {
                        const auto ii = static_cast<std::uint32_t>((b + static_cast<std::uint64_t>(i) * d) % n);
                        const auto jj = static_cast<std::uint32_t>(static_cast<std::uint64_t>(j) * d % n);
                        images.push_back(ii * n + jj);
                    }
                labels.push_back("(" + std::to_string(b) + "," + std::to_string(d) + ")");
            }
        }
        return PermutationAction(n * n, std::move(images), std::move(labels));
    case ActionDescriptor::Kind::QuadUnits: {
        const auto spec = QuadOrderSpec::make(desc.d);
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = 0; b < n; ++b) {
                const auto u = QuadResidue::make(a, b, spec, n);
                if (!quad_is_unit(u)) continue;
                for (std::uint32_t xa = 0; xa < n; ++xa)
                    for (std::uint32_t xb = 0; xb < n; ++xb) {
                        const auto y = quad_mul(u, QuadResidue::make(xa, xb, spec, n));
                        images.push_back(y.a * n + y.b);
                    }
                labels.push_back(std::to_string(a) + "+" + std::to_string(b) + "w");
            }
        return PermutationAction(n * n, std::move(images), std::move(labels));
    }
    case ActionDescriptor::Kind::Glm: return detail::build_matrix_action(n, desc.m, group_budget);
    case ActionDescriptor::Kind::Gl2: return detail::build_matrix_action(n, 2, group_budget);
    }
    throw UsageError("build_action: unknown kind");
}

/// Sorted orbit of point x.
inline std::vector<std::uint32_t> orbit_of(const PermutationAction& action, std::uint32_t x) {
    std::vector<std::uint32_t> out;
    for (std::size_t g = 0; g < action.order(); ++g) out.push_back(action.element(g)[x]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// =============================================================================
// Fixed-point histograms and Burnside
// =============================================================================

/// counts[m] = number of group elements fixing exactly m points.
struct FixedPointHistogram {
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t set_size = 0;

    BigInt group_order() const {
        BigInt total = 0;
        for (auto [m, c] : counts) total += c;
        return total;
    }

    bool operator==(const FixedPointHistogram&) const = default;
};

inline FixedPointHistogram fixed_point_histogram(const PermutationAction& action) {
    FixedPointHistogram h;
    h.set_size = action.set_size();
    for (std::size_t g = 0; g < action.order(); ++g) ++h.counts[action.fixed_points(g)];
    return h;
}

namespace detail {

/**
 * Fixed-point histogram of GL_m(R) on R^m for R = Z/p^a, without
 * materializing the group. chi(g) = |ker(g - I)| = q^m / |Im(g - I)|.
 * The first m-1 columns are enumerated; with S the span of their (c_j - e_j),
 * the last column c contributes |S + R(c - e_m)| = |S| * ord(c - e_m mod S).
 * Over a field the last column is counted in closed form per prefix.
 */
class GlmPrimePowerHistogram {
public:
    GlmPrimePowerHistogram(std::uint32_t p, std::uint32_t a, std::uint32_t m)
        : p_(p), a_(a), q_(static_cast<std::uint32_t>(*checked_pow(p, a))), m_(m) {
        qm_ = static_cast<std::uint32_t>(*checked_pow(q_, m));
        pm_ = static_cast<std::uint32_t>(*checked_pow(p_, m));
        span_marks_.assign(m, std::vector<std::uint32_t>(pm_, 0));
        span_members_.assign(m, {});
        s_marks_.assign(qm_, 0);
        reduce_table_.resize(qm_);
        times_p_table_.resize(qm_);
        for (std::uint32_t idx = 0; idx < qm_; ++idx) {
            Vec v = decode(idx, q_);
            reduce_table_[idx] = reduce_index(v);
            for (std::uint32_t i = 0; i < m_; ++i) v[i] = static_cast<std::uint32_t>(static_cast<std::uint64_t>(v[i]) * p_ % q_);
            times_p_table_[idx] = encode(v, q_);
        }
    }

    FixedPointHistogram run() {
        // level 0 span is {0}
        level_stamps_[0] = ++stamp_;
        span_members_[0] = {0};
        span_marks_[0][0] = stamp_;
        if (a_ == 1 && m_ == 1) field_leaf();
        else descend(0);
        FixedPointHistogram h;
        h.set_size = qm_;
        h.counts = std::move(counts_);
        return h;
    }

private:
    using Vec = std::array<std::uint32_t, kMaxMatrixDim>;

    Vec decode(std::uint32_t idx, std::uint32_t base) const { return vector_from_index(idx, m_, base); }
    std::uint32_t encode(const Vec& v, std::uint32_t base) const { return vector_index(v, m_, base); }

    std::uint32_t reduce_index(const Vec& v) const {
        Vec r{};
        for (std::uint32_t i = 0; i < m_; ++i) r[i] = v[i] % p_;
        return encode(r, p_);
    }

    // Columns 0..level-1 are chosen; span_*[level] holds their span mod p.
    void descend(std::uint32_t level) {
        if (level + 1 == m_) {
            leaf();
            return;
        }
        for (std::uint32_t idx = 0; idx < qm_; ++idx) {
            const std::uint32_t r = reduce_table_[idx];
            if (span_marks_[level][r] == level_stamp(level)) continue;
            cols_[level] = decode(idx, q_);
            if (a_ == 1 && level + 2 == m_) {
                field_leaf();
                continue;
            }
            extend_span(level, decode(r, p_));
            descend(level + 1);
        }
    }

    std::uint32_t level_stamp(std::uint32_t level) const { return level_stamps_[level]; }

    void extend_span(std::uint32_t level, const Vec& r) {
        const std::uint32_t next = level + 1;
        const std::uint32_t stamp = ++stamp_;
        level_stamps_[next] = stamp;
        auto& members = span_members_[next];
        members.clear();
        for (auto base : span_members_[level]) {
            Vec v = decode(base, p_);
            for (std::uint32_t t = 0; t < p_; ++t) {
                const std::uint32_t idx = encode(v, p_);
                if (span_marks_[next][idx] != stamp) {
                    span_marks_[next][idx] = stamp;
                    members.push_back(idx);
                }
                for (std::uint32_t i = 0; i < m_; ++i) v[i] = (v[i] + r[i]) % p_;
            }
        }
    }

    /**
     * Over F_p, with prefix columns c_j: det(c_0..c_{m-2}, v) = L(v) is linear,
     * so c = s + e_last is invertible iff L(s) != -L(e_last), and L is either
     * zero or equidistributed on S.
     */
    void field_leaf() {
        const std::uint32_t last = m_ - 1;
        std::array<Vec, kMaxMatrixDim> u{};
        for (std::uint32_t j = 0; j < last; ++j) {
            u[j] = cols_[j];
            u[j][j] = (u[j][j] + p_ - 1) % p_;
        }
        const std::uint32_t rank = rank_mod_p(u, last);
        std::uint64_t s_size = 1;
        for (std::uint32_t i = 0; i < rank; ++i) s_size *= p_;
        const Vec L = cofactors();
        bool vanishes = true;
        for (std::uint32_t j = 0; j < last && vanishes; ++j) {
            std::uint64_t dot = 0;
            for (std::uint32_t i = 0; i < m_; ++i) dot += static_cast<std::uint64_t>(L[i]) * u[j][i];
            vanishes = dot % p_ == 0;
        }
        const std::uint64_t in = vanishes ? (L[last] != 0 ? s_size : 0) : s_size - s_size / p_;
        const std::uint64_t valid = qm_ - qm_ / p_;
        const std::uint64_t chi_in = qm_ / s_size;
        if (in > 0) add(chi_in, in);
        if (valid > in) add(chi_in / p_, valid - in);
    }

    std::uint32_t rank_mod_p(std::array<Vec, kMaxMatrixDim> rows, std::uint32_t count) const {
        std::uint32_t rank = 0;
        for (std::uint32_t col = 0; col < m_ && rank < count; ++col) {
            std::uint32_t pivot = rank;
            while (pivot < count && rows[pivot][col] == 0) ++pivot;
            if (pivot == count) continue;
            std::swap(rows[rank], rows[pivot]);
            const std::uint64_t inv = *inverse_mod(rows[rank][col], p_);
            for (std::uint32_t r = 0; r < count; ++r) {
                if (r == rank || rows[r][col] == 0) continue;
                const std::uint64_t f = rows[r][col] * inv % p_;
                for (std::uint32_t c = 0; c < m_; ++c)
                    rows[r][c] = static_cast<std::uint32_t>((rows[r][c] + (p_ - f) * rows[rank][c]) % p_);
            }
            ++rank;
        }
        return rank;
    }

    /// L_i with det(c_0, ..., c_{m-2}, v) = sum_i L_i v_i mod p.
    Vec cofactors() const {
        const std::uint32_t last = m_ - 1;
        Vec L{};
        if (m_ == 1) {
            L[0] = 1 % p_;
            return L;
        }
        for (std::uint32_t i = 0; i < m_; ++i) {
            MatrixModN minor{last, p_, {}};
            for (std::uint32_t r = 0, rr = 0; r < m_; ++r) {
                if (r == i) continue;
                for (std::uint32_t j = 0; j < last; ++j) minor.at(rr, j) = cols_[j][r] % p_;
                ++rr;
            }
            const std::uint32_t d = det_mod_n(minor);
            L[i] = ((i + last) % 2 == 0) ? d : (p_ - d) % p_;
        }
        return L;
    }

    void leaf() {
        const std::uint32_t last = m_ - 1;
        const std::uint32_t prefix_stamp = level_stamps_[last];
        // S = span_R(c_j - e_j)
        const std::uint32_t s_stamp = ++stamp_;
        s_members_.assign(1, 0);
        s_vectors_.assign(1, Vec{});
        s_marks_[0] = s_stamp;
        for (std::uint32_t j = 0; j < last; ++j) {
            Vec u = cols_[j];
            u[j] = (u[j] + q_ - 1) % q_;
            const std::size_t existing = s_members_.size();
            for (std::size_t k = 0; k < existing; ++k) {
                Vec v = s_vectors_[k];
                for (std::uint32_t t = 1; t < q_; ++t) {
                    for (std::uint32_t i = 0; i < m_; ++i) {
                        v[i] += u[i];
                        if (v[i] >= q_) v[i] -= q_;
                    }
                    const std::uint32_t idx = encode(v, q_);
                    if (s_marks_[idx] != s_stamp) {
                        s_marks_[idx] = s_stamp;
                        s_members_.push_back(idx);
                        s_vectors_.push_back(v);
                    }
                }
            }
        }
        const std::uint64_t s_size = s_members_.size();
        if (qm_ % s_size != 0) throw InternalFault("GL_m histogram: |S| does not divide q^m");
        const std::uint64_t chi_in = qm_ / s_size;
        for (std::uint32_t idx = 0; idx < qm_; ++idx) {
            if (span_marks_[last][reduce_table_[idx]] == prefix_stamp) continue;
            std::uint32_t w = (idx % q_ == 0) ? idx + q_ - 1 : idx - 1;
            std::uint64_t order = 1;
            while (s_marks_[w] != s_stamp) {
                w = times_p_table_[w];
                order *= p_;
            }
            add(chi_in / order, 1);
        }
    }

    void add(std::uint64_t chi, std::uint64_t count) { counts_[chi] += count; }

    std::uint32_t p_, a_, q_, m_;
    std::uint32_t qm_ = 0, pm_ = 0;
    std::uint32_t stamp_ = 0;
    std::array<std::uint32_t, kMaxMatrixDim + 1> level_stamps_{};
    std::array<Vec, kMaxMatrixDim> cols_{};
    std::vector<std::vector<std::uint32_t>> span_marks_;
    std::vector<std::vector<std::uint32_t>> span_members_;
    std::vector<std::uint32_t> s_marks_;
    std::vector<std::uint32_t> s_members_;
    std::vector<Vec> s_vectors_;
    std::vector<std::uint32_t> reduce_table_;
    std::vector<std::uint32_t> times_p_table_;
    std::map<std::uint64_t, std::uint64_t> counts_;
};

/// Histogram of the product action G1 x G2 on X1 x X2: fixed points multiply.
inline FixedPointHistogram product_histogram(const FixedPointHistogram& h1, const FixedPointHistogram& h2) {
    FixedPointHistogram out;
    const auto size = checked_mul(h1.set_size, h2.set_size);
    if (!size) throw CapacityError("product_histogram: set size overflows 64 bits", "|X1||X2|");
    out.set_size = *size;
    for (auto [m1, c1] : h1.counts)
        for (auto [m2, c2] : h2.counts) {
            const auto c = checked_mul(c1, c2);
            if (!c) throw CapacityError("product_histogram: element count overflows 64 bits", "|G1||G2|");
            const auto sum = checked_add(out.counts[m1 * m2], *c);
            if (!sum) throw CapacityError("product_histogram: element count overflows 64 bits", "|G1||G2|");
            out.counts[m1 * m2] = *sum;
        }
    return out;
}

/// Prime-power histograms are pure functions of (p, a, m); keep them across calls.
inline FixedPointHistogram cached_prime_power_histogram(std::uint32_t p, std::uint32_t a, std::uint32_t m) {
    static std::mutex lock;
    static std::map<std::array<std::uint32_t, 3>, FixedPointHistogram> cache;
    const std::array<std::uint32_t, 3> key{p, a, m};
    {
        std::lock_guard guard(lock);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto h = GlmPrimePowerHistogram(p, a, m).run();
    std::lock_guard guard(lock);
    return cache.emplace(key, std::move(h)).first->second;
}

} // namespace detail

/**
 * Fixed-point histogram of GL_m(Z/nZ) on (Z/nZ)^m by CRT over the prime
 * powers of n, never materializing the group.
 */
inline FixedPointHistogram glm_fixed_point_histogram(std::uint32_t n, std::uint32_t m,
                                                     std::uint64_t work_budget = kDefaultStreamingWorkBudget) {
    if (n == 0) throw UsageError("glm: n must be >= 1");
    if (m == 0 || m > kMaxMatrixDim) throw UsageError("glm: m must be in [1, 4]");
    FixedPointHistogram total;
    total.set_size = 1;
    total.counts[1] = 1;
    for (auto [p, a] : factorize(n).factors) {
        const BigInt q = big_pow(BigInt(p), a);
        const BigInt qm = big_pow(q, m);
        // leaves ~ q^(m(m-1)), each costing ~ q^m steps
        const BigInt work = big_pow(qm, m);
        if (work > work_budget || qm > 50'000'000)
            throw CapacityError("glm histogram: GL_" + std::to_string(m) + "(Z/" + q.str() +
                                    "Z) exceeds the streaming work budget",
                                "|G| = " + glm_order(q.convert_to<std::uint64_t>(), m).str());
        total = detail::product_histogram(total, detail::cached_prime_power_histogram(static_cast<std::uint32_t>(p), a, m));
    }
    return total;
}

/// Histogram for any descriptor; GL_m goes through the streaming route.
inline FixedPointHistogram fixed_point_histogram(const ActionDescriptor& desc,
                                                 std::uint64_t group_budget = kDefaultGroupBudget) {
    if (desc.kind == ActionDescriptor::Kind::Glm) return glm_fixed_point_histogram(desc.n, desc.m);
    if (desc.kind == ActionDescriptor::Kind::Gl2) return glm_fixed_point_histogram(desc.n, 2);
    return fixed_point_histogram(build_action(desc, group_budget));
}

/// (1/|G|) sum_g chi(g)^k; the division must be exact.
inline BigInt burnside_moment(const FixedPointHistogram& h, std::uint32_t k) {
    BigInt sum = 0;
    for (auto [m, c] : h.counts) sum += big_pow(BigInt(m), k) * c;
    const BigInt order = h.group_order();
    if (order == 0) throw UsageError("burnside_moment: empty group");
    if (sum % order != 0)
        throw InternalFault("burnside_moment: sum of chi^k (" + sum.str() + ") not divisible by |G| = " +
                            order.str() + "; the element list is not a group action");
    return sum / order;
}

inline BigInt burnside_moment(const PermutationAction& action, std::uint32_t k) {
    return burnside_moment(fixed_point_histogram(action), k);
}

/// m -> |G(m)| / |G|
inline std::map<std::uint64_t, ExactRational> predicted_value_distribution(const FixedPointHistogram& h) {
    std::map<std::uint64_t, ExactRational> out;
    const BigInt order = h.group_order();
    for (auto [m, c] : h.counts) out[m] = ExactRational(BigInt(c), order);
    return out;
}

// =============================================================================
// Union-find oracle
// =============================================================================

/**
 * A subset of element indices generating the whole group: greedily add the
 * first element outside the subgroup generated so far.
 */
inline std::vector<std::size_t> generating_subset(const PermutationAction& action) {
    const std::size_t order = action.order();
    const std::uint32_t size = action.set_size();
    std::vector<std::size_t> gens;
    std::vector<std::uint8_t> in_subgroup(order, 0);
    std::vector<std::uint32_t> identity(size);
    std::iota(identity.begin(), identity.end(), 0U);
    const std::size_t id = action.find(identity);
    if (id == order) throw UsageError("generating_subset: element list lacks the identity");
    std::vector<std::uint32_t> tmp(size);
    for (std::size_t candidate = 0; candidate < order; ++candidate) {
        if (candidate == id || in_subgroup[candidate]) continue;
        gens.push_back(candidate);
        std::fill(in_subgroup.begin(), in_subgroup.end(), 0);
        std::vector<std::size_t> members{id};
        in_subgroup[id] = 1;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto h = action.element(members[i]);
            for (auto g : gens) {
                const auto pg = action.element(g);
                for (std::uint32_t x = 0; x < size; ++x) tmp[x] = pg[h[x]];
                const std::size_t idx = action.find(tmp);
                if (idx == order) throw UsageError("generating_subset: element list is not closed under composition");
                if (!in_subgroup[idx]) {
                    in_subgroup[idx] = 1;
                    members.push_back(idx);
                }
            }
        }
        if (members.size() == order) break;
    }
    return gens;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0U); }

    std::uint32_t find(std::uint32_t i) {
        std::uint32_t root = i;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[i] != root) i = std::exchange(parent_[i], root);
        return root;
    }

    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    std::size_t components() const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < parent_.size(); ++i)
            if (parent_[i] == i) ++c;
        return c;
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

/// Orbits of G on X^k counted directly: union t with g.t for every generator g.
inline std::uint64_t orbit_count_oracle(const PermutationAction& action, std::uint32_t k,
                                        std::uint64_t tuple_budget = kDefaultTupleBudget) {
    if (k == 0) return 1;
    const auto tuples = checked_pow(action.set_size(), k);
    if (!tuples || *tuples > tuple_budget)
        throw CapacityError("orbit_count_oracle: |X|^k exceeds the tuple budget " + std::to_string(tuple_budget),
                            "|X|^k = " + big_pow(BigInt(action.set_size()), k).str());
    const auto gens = generating_subset(action);
    const std::uint32_t size = action.set_size();
    UnionFind uf(*tuples);
    std::vector<std::uint32_t> digits(k);
    for (std::uint64_t t = 0; t < *tuples; ++t) {
        std::uint64_t rest = t;
        for (std::uint32_t i = k; i-- > 0;) {
            digits[i] = static_cast<std::uint32_t>(rest % size);
            rest /= size;
        }
        for (auto g : gens) {
            const auto perm = action.element(g);
            std::uint64_t image = 0;
            for (std::uint32_t i = 0; i < k; ++i) image = image * size + perm[digits[i]];
            uf.unite(static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(image));
        }
    }
    return uf.components();
}

} // namespace torsion_moments
