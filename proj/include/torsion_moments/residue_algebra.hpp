#pragma once

/**
 * @file residue_algebra.hpp
 * @brief Finite rings Z/nZ and O_K/nO_K (K imaginary quadratic of class number
 *        one) and the matrix groups GL_m(Z/nZ) built over them.
 *
 * O_K is presented on the basis {1, w} with w = (1 + sqrt d)/2 when d = 1 mod 4
 * and w = sqrt d otherwise, so that w^2 = t*w + s.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core_arith.hpp"

namespace torsion_moments {

// =============================================================================
// Quadratic orders
// =============================================================================

inline constexpr std::array<int, 9> kClassNumberOneFields = {-1, -2, -3, -7, -11, -19, -43, -67, -163};

struct QuadOrderSpec {
    int d;  ///< squarefree negative
    int t;  ///< w^2 = t*w + s
    int s;

    static QuadOrderSpec make(int d) {
        if (std::find(kClassNumberOneFields.begin(), kClassNumberOneFields.end(), d) ==
            kClassNumberOneFields.end())
            throw UsageError("QuadOrderSpec: d=" + std::to_string(d) +
                             " is not one of the nine class-number-one imaginary quadratic fields");
        // d is negative, so d mod 4 == 1 means d = -3, -7, -11, ...
        if (((d % 4) + 4) % 4 == 1) return {d, 1, (d - 1) / 4};
        return {d, 0, d};
    }

    /// Field discriminant: d when d = 1 mod 4, else 4d.
    int discriminant() const { return (((d % 4) + 4) % 4 == 1) ? d : 4 * d; }

    bool operator==(const QuadOrderSpec&) const = default;
};

/// a + b*w in O_K / n O_K.
struct QuadResidue {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    QuadOrderSpec spec;
    std::uint32_t n = 1;

    static QuadResidue make(std::int64_t a, std::int64_t b, const QuadOrderSpec& spec, std::uint32_t n) {
        if (n == 0) throw UsageError("QuadResidue: modulus must be >= 1");
        return {static_cast<std::uint32_t>(reduce_mod(a, n)), static_cast<std::uint32_t>(reduce_mod(b, n)), spec, n};
    }

    bool operator==(const QuadResidue&) const = default;
};

inline QuadResidue quad_mul(const QuadResidue& u, const QuadResidue& v) {
    if (u.n != v.n || !(u.spec == v.spec)) throw UsageError("quad_mul: operands live in different rings");
    const std::int64_t n = u.n;
    const std::int64_t a1 = u.a, b1 = u.b, a2 = v.a, b2 = v.b;
    const std::int64_t bb = b1 * b2 % n;
    const std::int64_t re = (a1 * a2 + u.spec.s * bb) % n;
    const std::int64_t im = (a1 * b2 + a2 * b1 + u.spec.t * bb) % n;
    return QuadResidue::make(re, im, u.spec, u.n);
}

/// Determinant of multiplication-by-u on the basis {1, w}: a^2 + t*a*b - s*b^2.
inline std::uint32_t quad_norm(const QuadResidue& u) {
    const std::int64_t n = u.n;
    const std::int64_t a = u.a, b = u.b;
    const std::int64_t v = (a * a + u.spec.t * (a * b % n) - u.spec.s * (b * b % n)) % n;
    return static_cast<std::uint32_t>(reduce_mod(v, static_cast<std::uint64_t>(n)));
}

inline bool quad_is_unit(const QuadResidue& u) { return std::gcd<std::uint64_t>(quad_norm(u), u.n) == 1; }

// =============================================================================
// Matrices over Z/nZ
// =============================================================================

inline constexpr std::uint32_t kMaxMatrixDim = 4;
inline constexpr std::uint64_t kDefaultEnumerationBudget = 100'000'000;

struct MatrixModN {
    std::uint32_t m = 1;
    std::uint32_t n = 1;
    std::array<std::uint32_t, kMaxMatrixDim * kMaxMatrixDim> entries{};  ///< row-major, first m*m used

    std::uint32_t at(std::uint32_t r, std::uint32_t c) const { return entries[r * m + c]; }
    std::uint32_t& at(std::uint32_t r, std::uint32_t c) { return entries[r * m + c]; }

    static MatrixModN identity(std::uint32_t m, std::uint32_t n) {
        MatrixModN a{m, n, {}};
        for (std::uint32_t i = 0; i < m; ++i) a.at(i, i) = 1 % n;
        return a;
    }

    static MatrixModN from_rows(std::uint32_t n, const std::vector<std::vector<std::int64_t>>& rows) {
        const auto m = static_cast<std::uint32_t>(rows.size());
        if (m == 0 || m > kMaxMatrixDim) throw UsageError("MatrixModN: dimension must be in [1, 4]");
        MatrixModN a{m, n, {}};
        for (std::uint32_t r = 0; r < m; ++r) {
            if (rows[r].size() != m) throw UsageError("MatrixModN: rows must be square");
            for (std::uint32_t c = 0; c < m; ++c) a.at(r, c) = static_cast<std::uint32_t>(reduce_mod(rows[r][c], n));
        }
        return a;
    }

    bool operator==(const MatrixModN& o) const {
        return m == o.m && n == o.n && std::equal(entries.begin(), entries.begin() + m * m, o.entries.begin());
    }
};

namespace detail {

// Laplace expansion along the first row of the minor selected by `cols`.
inline std::int64_t det_expand(const MatrixModN& a, std::uint32_t row, std::array<std::uint32_t, kMaxMatrixDim>& cols,
                               std::uint32_t count) {
    const std::int64_t n = a.n;
    if (count == 1) return a.at(row, cols[0]) % n;
    std::int64_t acc = 0;
    for (std::uint32_t j = 0; j < count; ++j) {
        const std::uint32_t col = cols[j];
        std::array<std::uint32_t, kMaxMatrixDim> rest{};
        for (std::uint32_t i = 0, w = 0; i < count; ++i)
            if (i != j) rest[w++] = cols[i];
        const std::int64_t minor = det_expand(a, row + 1, rest, count - 1);
        const std::int64_t term = static_cast<std::int64_t>(a.at(row, col)) * minor % n;
        acc = (j % 2 == 0) ? (acc + term) % n : (acc - term) % n;
    }
    return acc;
}

} // namespace detail

inline std::uint32_t det_mod_n(const MatrixModN& a) {
    if (a.n == 1) return 0;
    std::array<std::uint32_t, kMaxMatrixDim> cols{0, 1, 2, 3};
    return static_cast<std::uint32_t>(reduce_mod(detail::det_expand(a, 0, cols, a.m), a.n));
}

inline bool is_invertible(const MatrixModN& a) { return std::gcd<std::uint64_t>(det_mod_n(a), a.n) == 1; }

/// |GL_m(Z/nZ)| = prod over p^a || n of p^((a-1)m^2) prod_{i<m} (p^m - p^i).
inline BigInt glm_order(std::uint64_t n, std::uint32_t m) {
    BigInt order = 1;
    for (auto [p, a] : factorize(n).factors) {
        const BigInt bp = p;
        order *= big_pow(bp, (a - 1) * m * m);
        for (std::uint32_t i = 0; i < m; ++i) order *= big_pow(bp, m) - big_pow(bp, i);
    }
    return order;
}

/**
 * Visit every A in GL_m(Z/nZ) exactly once, row-major lexicographic over the
 * entries. Throws CapacityError when |GL_m(Z/nZ)| exceeds `budget`.
 */
template <class Fn>
void enumerate_glm(std::uint32_t n, std::uint32_t m, Fn&& fn, std::uint64_t budget = kDefaultEnumerationBudget) {
    if (n == 0) throw UsageError("enumerate_glm: modulus must be >= 1");
    if (m == 0 || m > kMaxMatrixDim) throw UsageError("enumerate_glm: dimension must be in [1, 4]");
    const BigInt order = glm_order(n, m);
    if (order > budget)
        throw CapacityError("enumerate_glm: |GL_" + std::to_string(m) + "(Z/" + std::to_string(n) +
                                "Z)| exceeds enumeration budget " + std::to_string(budget),
                            order.str());
    MatrixModN a{m, n, {}};
    const std::uint32_t cells = m * m;
    while (true) {
        if (is_invertible(a)) fn(static_cast<const MatrixModN&>(a));
        // odometer, last cell fastest
        std::int64_t i = cells - 1;
        while (i >= 0) {
            if (++a.entries[i] < n) break;
            a.entries[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

inline std::vector<MatrixModN> collect_glm(std::uint32_t n, std::uint32_t m,
                                           std::uint64_t budget = kDefaultEnumerationBudget) {
    std::vector<MatrixModN> out;
    enumerate_glm(n, m, [&](const MatrixModN& a) { out.push_back(a); }, budget);
    return out;
}

/// Multiplicative, psi(1) = 1, psi(p^a) = p^(a m) - p^((a-1) m).
inline BigInt psi(std::uint64_t n, std::uint32_t m) {
    if (n == 0 || m == 0) throw UsageError("psi: n and m must be >= 1");
    BigInt result = 1;
    for (auto [p, a] : factorize(n).factors) {
        const BigInt bp = p;
        result *= big_pow(bp, a * m) - big_pow(bp, (a - 1) * m);
    }
    return result;
}

} // namespace torsion_moments
