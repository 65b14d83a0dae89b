#include <gtest/gtest.h>

#include "torsion_moments/closed_forms.hpp"

using namespace torsion_moments;

namespace {

// M_k(n) straight from sum_{de | n} d^k mu(e) / phi(de), iterating pairs (d, e).
ExactRational mk_by_pairs(std::uint64_t n, std::uint32_t k) {
    ExactRational total = 0;
    for (std::uint64_t d = 1; d <= n; ++d)
        for (std::uint64_t e = 1; d * e <= n; ++e)
            if (n % (d * e) == 0)
                total += ExactRational(big_pow(BigInt(d), k) * mobius(e), BigInt(euler_phi(d * e)));
    return total;
}

} // namespace

TEST(PPoly, Examples) {
    EXPECT_EQ(p_poly(2, 1, 2), 3);
    EXPECT_EQ(p_poly(4, 2, 3), 28);
    EXPECT_EQ(p_poly(7, 3, 0), 0);
    EXPECT_EQ(p_poly(7, 3, 1), 1);
    for (int a = -5; a <= 5; ++a)
        for (int b = -5; b <= 5; ++b) {
            if (a == b) continue;
            for (std::uint32_t k = 0; k <= 6; ++k) {
                ASSERT_EQ(p_poly(a, b, k), p_poly(b, a, k));
                ASSERT_EQ(p_poly(a, b, k) * (a - b), big_pow(BigInt(a), k) - big_pow(BigInt(b), k));
            }
        }
    EXPECT_THROW(p_poly(3, 3, 2), UsageError);
}

TEST(Mk, Examples) {
    for (std::uint64_t n = 1; n <= 100; ++n) EXPECT_EQ(mk(n, 0), 1);
    EXPECT_EQ(mk(12, 1), 6);
    EXPECT_EQ(mk(4, 2), 10);
    EXPECT_EQ(mk(6, 2), 20);  // 4 * 5
    EXPECT_EQ(mk(2, 3), 8);
}

TEST(Mk, MatchesPairSumOracle) {
    for (std::uint64_t n = 1; n <= 150; ++n)
        for (std::uint32_t k = 0; k <= 5; ++k) ASSERT_EQ(mk(n, k), mk_by_pairs(n, k)) << n << "," << k;
}

TEST(Mk, BothFormsAgreeAndAreIntegral) {
    for (std::uint64_t n = 1; n <= 2000; ++n)
        for (std::uint32_t k = 0; k <= 8; ++k) {
            const auto a = mk_divisor_sum(n, k);
            ASSERT_EQ(a, mk_euler_product(n, k));
            ASSERT_TRUE(is_integral(a));
            ASSERT_GE(a, 0);
        }
}

TEST(Mk, Multiplicative) {
    for (std::uint64_t a = 1; a <= 100; ++a)
        for (std::uint64_t b = 1; b <= 100; b += 3)
            if (std::gcd(a, b) == 1) {
                for (std::uint32_t k = 0; k <= 4; ++k) ASSERT_EQ(mk(a * b, k), mk(a, k) * mk(b, k));
            }
}

TEST(Dk, GaussianPrimes) {
    const auto gauss = QuadOrderSpec::make(-1);
    EXPECT_EQ(dk(5, gauss), 4U);
    EXPECT_EQ(dk(7, gauss), 2U);
    EXPECT_EQ(dk(2, gauss), 3U);
    EXPECT_EQ(dk(25, gauss), 9U);
    EXPECT_EQ(dk(4, gauss), 5U);
    EXPECT_EQ(dk(49, gauss), 3U);
    EXPECT_EQ(dk(35, gauss), 8U);
}

TEST(Dk, SplittingTypeByFactoringThePolynomial) {
    // p splits iff the minimal polynomial of w has two distinct roots mod p
    for (int d : kClassNumberOneFields) {
        const auto spec = QuadOrderSpec::make(d);
        for (std::uint64_t p : {2U, 3U, 5U, 7U, 11U, 13U, 17U, 19U, 23U, 29U, 31U, 37U, 41U, 43U, 67U, 163U}) {
            int roots = 0;
            for (std::int64_t x = 0; x < static_cast<std::int64_t>(p); ++x)
                roots += reduce_mod(x * x - spec.t * x - spec.s, p) == 0;
            const auto type = splitting_type(p, spec);
            const auto expect = roots == 2 ? SplittingType::Split : (roots == 1 ? SplittingType::Ramified : SplittingType::Inert);
            ASSERT_EQ(type, expect) << "d=" << d << " p=" << p;
        }
    }
}

TEST(Gl2, Examples) {
    for (std::uint64_t l : {2U, 3U, 5U, 7U, 11U, 13U}) EXPECT_EQ(gl2_moment(l, 0), 1);
    EXPECT_EQ(gl2_moment(3, 1), 2);
    EXPECT_EQ(gl2_moment(3, 2), 6);
    EXPECT_EQ(gl2_densities(3)[2], ExactRational(1, 48));
    EXPECT_EQ(gl2_densities(3)[1] * 48, 20);
}

TEST(Gl2, DensitiesSumToOne) {
    for (std::uint64_t l = 2; l <= 50; ++l) {
        if (!is_prime(l)) continue;
        const auto d = gl2_densities(l);
        EXPECT_EQ(d[0] + d[1] + d[2], 1);
        for (std::uint32_t k = 0; k <= 5; ++k) {
            const BigInt L = l;
            EXPECT_EQ(gl2_moment(l, k), d[0] + d[1] * ExactRational(big_pow(L, k)) + d[2] * ExactRational(big_pow(L, 2 * k)));
        }
    }
    EXPECT_THROW(gl2_densities(4), UsageError);
}

TEST(NonCm, Examples) {
    EXPECT_EQ(noncm_moment(3, 1), 2);
    EXPECT_EQ(noncm_moment(15, 2), 48);
    for (std::uint64_t l = 2; l <= 13; ++l) {
        if (!is_prime(l)) continue;
        for (std::uint32_t k = 1; k <= 6; ++k) EXPECT_EQ(noncm_moment(l, k), gl2_moment(l, k));
        EXPECT_EQ(noncm_moment(l, 2), ExactRational(l + 3));
    }
    EXPECT_THROW(noncm_moment(12, 1), UsageError);
    EXPECT_THROW(noncm_moment(3, 0), UsageError);
}

TEST(Cm, Examples) {
    EXPECT_EQ(cm_moment(5, 2, 4), 23);
    for (std::uint64_t l : {3U, 5U, 7U, 11U, 13U})
        for (int d = 2; d <= 4; ++d) {
            EXPECT_EQ(cm_moment(l, 0, d), 1);
            EXPECT_EQ(cm_moment(l, 1, d), ExactRational(d + 2, 2));
            for (std::uint32_t k = 0; k <= 6; ++k) EXPECT_EQ(cm_moment(l, k, d), cm_moment_density_form(l, k, d));
        }
    EXPECT_THROW(cm_moment(2, 1, 3), UsageError);
    EXPECT_THROW(cm_moment(5, 1, 5), UsageError);
}

TEST(Cm, InertPart) {
    EXPECT_EQ(inert_partial_moment(5, 0), ExactRational(1, 2));
    EXPECT_EQ(inert_partial_moment(7, 1), 1);
    EXPECT_EQ(inert_partial_moment(5, 3), 16);
    for (std::uint64_t l : {3U, 5U, 7U, 11U, 13U})
        for (std::uint32_t k = 0; k <= 6; ++k) EXPECT_EQ(inert_partial_moment(l, k) * 2, mk(l, k));
}

TEST(Cm, SplitDensities) {
    for (std::uint64_t l = 3; l <= 50; ++l) {
        if (!is_prime(l)) continue;
        for (int d = 2; d <= 4; ++d) {
            const auto s = split_densities(l, d);
            EXPECT_EQ(s[0] + s[1] + s[2], ExactRational(1, 2));
            EXPECT_EQ(s[2], ExactRational(BigInt(1), 2 * (BigInt(l) * l - 1)));
            for (std::uint32_t k = 0; k <= 4; ++k)
                EXPECT_EQ(split_partial_moment(l, k, d) + inert_partial_moment(l, k), cm_moment(l, k, d));
        }
    }
    EXPECT_EQ(split_densities(5, 4)[1], ExactRational(1, 4));
    EXPECT_EQ(split_densities(7, 2)[1], 0);
}

TEST(Rational, Rendering) {
    EXPECT_EQ(to_string(ExactRational(6, 4)), "3/2");
    EXPECT_EQ(to_string(ExactRational(-8, 4)), "-2");
    EXPECT_EQ(to_string(ExactRational(0)), "0");
}
