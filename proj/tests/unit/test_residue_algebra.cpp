#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "torsion_moments/residue_algebra.hpp"

using namespace torsion_moments;

namespace {

// Leibniz formula: sum over permutations of sign * prod a[i][sigma(i)].
std::int64_t det_by_permutations(const MatrixModN& a) {
    std::vector<std::uint32_t> perm(a.m);
    std::iota(perm.begin(), perm.end(), 0U);
    std::int64_t total = 0;
    do {
        int inversions = 0;
        for (std::uint32_t i = 0; i < a.m; ++i)
            for (std::uint32_t j = i + 1; j < a.m; ++j) inversions += perm[i] > perm[j];
        std::int64_t term = inversions % 2 ? -1 : 1;
        for (std::uint32_t i = 0; i < a.m; ++i) term = term * a.at(i, perm[i]) % static_cast<std::int64_t>(a.n);
        total = (total + term) % static_cast<std::int64_t>(a.n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<std::int64_t>(reduce_mod(total, a.n));
}

} // namespace

TEST(QuadOrder, SpecsForAllNineFields) {
    EXPECT_EQ(QuadOrderSpec::make(-1).t, 0);
    EXPECT_EQ(QuadOrderSpec::make(-1).s, -1);
    EXPECT_EQ(QuadOrderSpec::make(-3).t, 1);
    EXPECT_EQ(QuadOrderSpec::make(-3).s, -1);
    EXPECT_EQ(QuadOrderSpec::make(-163).s, -41);
    EXPECT_EQ(QuadOrderSpec::make(-1).discriminant(), -4);
    EXPECT_EQ(QuadOrderSpec::make(-2).discriminant(), -8);
    EXPECT_EQ(QuadOrderSpec::make(-7).discriminant(), -7);
    EXPECT_THROW(QuadOrderSpec::make(-5), UsageError);
    EXPECT_THROW(QuadOrderSpec::make(3), UsageError);
}

TEST(QuadResidue, GaussianSplitPrime) {
    const auto spec = QuadOrderSpec::make(-1);
    const auto u = QuadResidue::make(2, 1, spec, 5), v = QuadResidue::make(2, -1, spec, 5);
    EXPECT_EQ(quad_mul(u, v), QuadResidue::make(0, 0, spec, 5));
    const auto one = QuadResidue::make(1, 0, spec, 5);
    EXPECT_EQ(quad_mul(one, u), u);
    EXPECT_EQ(quad_norm(one), 1U);
}

TEST(QuadResidue, GaussianNormIsSumOfSquares) {
    const auto spec = QuadOrderSpec::make(-1);
    for (std::uint32_t n = 2; n <= 13; ++n)
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = 0; b < n; ++b)
                ASSERT_EQ(quad_norm(QuadResidue::make(a, b, spec, n)), (a * a + b * b) % n);
}

TEST(QuadResidue, EisensteinAssociativityRandomTriples) {
    const auto spec = QuadOrderSpec::make(-3);
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pick(0, 6);
    for (int i = 0; i < 100; ++i) {
        const auto u = QuadResidue::make(pick(rng), pick(rng), spec, 7);
        const auto v = QuadResidue::make(pick(rng), pick(rng), spec, 7);
        const auto w = QuadResidue::make(pick(rng), pick(rng), spec, 7);
        ASSERT_EQ(quad_mul(quad_mul(u, v), w), quad_mul(u, quad_mul(v, w)));
        ASSERT_EQ(quad_mul(u, v), quad_mul(v, u));
    }
}

TEST(QuadResidue, MismatchedRingsRejected) {
    const auto a = QuadResidue::make(1, 1, QuadOrderSpec::make(-1), 5);
    EXPECT_THROW(quad_mul(a, QuadResidue::make(1, 1, QuadOrderSpec::make(-1), 7)), UsageError);
    EXPECT_THROW(quad_mul(a, QuadResidue::make(1, 1, QuadOrderSpec::make(-2), 5)), UsageError);
}

TEST(QuadResidue, UnitCriterionMatchesInverseSearch) {
    for (int d : kClassNumberOneFields) {
        const auto spec = QuadOrderSpec::make(d);
        for (std::uint32_t n = 1; n <= 15; ++n) {
            const auto one = QuadResidue::make(1, 0, spec, n);
            for (std::uint32_t a = 0; a < n; ++a)
                for (std::uint32_t b = 0; b < n; ++b) {
                    const auto u = QuadResidue::make(a, b, spec, n);
                    bool has_inverse = false;
                    for (std::uint32_t c = 0; c < n && !has_inverse; ++c)
                        for (std::uint32_t e = 0; e < n && !has_inverse; ++e)
                            has_inverse = quad_mul(u, QuadResidue::make(c, e, spec, n)) == one;
                    ASSERT_EQ(quad_is_unit(u), has_inverse) << "d=" << d << " n=" << n << " u=" << a << "+" << b << "w";
                }
        }
    }
}

TEST(QuadResidue, UnitsClosedUnderMultiplication) {
    for (int d : kClassNumberOneFields) {
        const auto spec = QuadOrderSpec::make(d);
        for (std::uint32_t n = 1; n <= 12; ++n) {
            std::vector<QuadResidue> units;
            for (std::uint32_t a = 0; a < n; ++a)
                for (std::uint32_t b = 0; b < n; ++b)
                    if (auto u = QuadResidue::make(a, b, spec, n); quad_is_unit(u)) units.push_back(u);
            for (const auto& u : units)
                for (const auto& v : units) ASSERT_TRUE(quad_is_unit(quad_mul(u, v)));
        }
    }
}

TEST(Matrix, DeterminantExamples) {
    EXPECT_EQ(det_mod_n(MatrixModN::identity(3, 7)), 1U);
    EXPECT_EQ(det_mod_n(MatrixModN::from_rows(5, {{1, 1}, {0, 1}})), 1U);
    EXPECT_EQ(det_mod_n(MatrixModN::from_rows(10, {{1, 2}, {3, 4}})), 8U);
    EXPECT_EQ(det_mod_n(MatrixModN::from_rows(97, {{2, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 5, 0}, {1, 1, 1, 7}})), 210U % 97);
}

TEST(Matrix, DeterminantMatchesPermutationExpansion) {
    std::mt19937 rng(11);
    for (int i = 0; i < 500; ++i) {
        const std::uint32_t m = 1 + i % 3;
        const std::uint32_t n = 2 + (i * 7) % 11;
        MatrixModN a{m, n, {}};
        for (std::uint32_t c = 0; c < m * m; ++c) a.entries[c] = rng() % n;
        ASSERT_EQ(static_cast<std::int64_t>(det_mod_n(a)), det_by_permutations(a));
    }
}

TEST(Matrix, GroupOrders) {
    for (std::uint32_t n = 1; n <= 30; ++n) {
        EXPECT_EQ(collect_glm(n, 1).size(), euler_phi(n));
        EXPECT_EQ(glm_order(n, 1), euler_phi(n));
    }
    EXPECT_EQ(collect_glm(3, 2).size(), 48U);
    EXPECT_EQ(collect_glm(4, 2).size(), 96U);
    EXPECT_EQ(BigInt(96), big_pow(BigInt(2), 4) * glm_order(2, 2));
    EXPECT_EQ(glm_order(12, 2), glm_order(4, 2) * glm_order(3, 2));
    EXPECT_EQ(collect_glm(2, 3).size(), 168U);
}

TEST(Matrix, EnumerationIsExactlyTheInvertibleSet) {
    for (std::uint32_t n = 1; n <= 6; ++n) {
        const auto listed = collect_glm(n, 2);
        std::set<std::array<std::uint32_t, 4>> seen;
        for (const auto& a : listed) {
            ASSERT_TRUE(is_invertible(a));
            ASSERT_TRUE(seen.insert({a.at(0, 0), a.at(0, 1), a.at(1, 0), a.at(1, 1)}).second);
        }
        std::size_t invertible = 0;
        for (std::uint32_t w = 0; w < n; ++w)
            for (std::uint32_t x = 0; x < n; ++x)
                for (std::uint32_t y = 0; y < n; ++y)
                    for (std::uint32_t z = 0; z < n; ++z) {
                        const std::int64_t det = static_cast<std::int64_t>(w * z) - static_cast<std::int64_t>(x * y);
                        if (std::gcd<std::uint64_t>(reduce_mod(det, n), n) == 1) {
                            ++invertible;
                            ASSERT_TRUE(seen.count({w, x, y, z}));
                        }
                    }
        EXPECT_EQ(invertible, listed.size());
    }
}

TEST(Matrix, EnumerationOrderIsLexicographic) {
    const auto listed = collect_glm(3, 2);
    for (std::size_t i = 1; i < listed.size(); ++i)
        ASSERT_TRUE(std::lexicographical_compare(listed[i - 1].entries.begin(), listed[i - 1].entries.begin() + 4,
                                                 listed[i].entries.begin(), listed[i].entries.begin() + 4));
}

TEST(Matrix, BudgetExceededNamesTheOrder) {
    try {
        collect_glm(11, 3, 1000);
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.required(), glm_order(11, 3).str());
    }
}

TEST(Psi, Examples) {
    EXPECT_EQ(psi(1, 2), 1);
    EXPECT_EQ(psi(4, 2), 12);
    EXPECT_EQ(psi(6, 2), psi(2, 2) * psi(3, 2));
}

TEST(Psi, PartitionsTheModule) {
    for (std::uint64_t n = 1; n <= 200; ++n)
        for (std::uint32_t m = 1; m <= 3; ++m) {
            BigInt sum = 0;
            for (std::uint64_t r = 1; r <= n; ++r)
                if (n % r == 0) sum += psi(n / r, m);
            ASSERT_EQ(sum, big_pow(BigInt(n), m)) << n << "," << m;
        }
}
