#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "torsion_moments/orbit_engine.hpp"
#include "torsion_moments/closed_forms.hpp"

using namespace torsion_moments;

namespace {

/// Orbits of G on X^k by flood fill with every group element (no generators, no union-find).
std::uint64_t orbits_by_flood_fill(const PermutationAction& act, std::uint32_t k) {
    const std::uint64_t size = act.set_size();
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < k; ++i) total *= size;
    std::vector<std::uint8_t> seen(total, 0);
    std::uint64_t orbits = 0;
    std::vector<std::uint32_t> digits(k);
    for (std::uint64_t t = 0; t < total; ++t) {
        if (seen[t]) continue;
        ++orbits;
        std::uint64_t rest = t;
        for (std::uint32_t i = 0; i < k; ++i) {
            digits[i] = static_cast<std::uint32_t>(rest % size);
            rest /= size;
        }
        for (std::size_t g = 0; g < act.order(); ++g) {
            const auto perm = act.element(g);
            std::uint64_t image = 0;
            for (std::uint32_t i = k; i-- > 0;) image = image * size + perm[digits[i]];
            seen[image] = 1;
        }
    }
    return orbits;
}

/// Fixed-point histogram of GL_m(Z/n) computed by enumerating matrices and counting kernel vectors of A - I.
FixedPointHistogram glm_by_enumeration(std::uint32_t n, std::uint32_t m) {
    FixedPointHistogram h;
    std::uint64_t vectors = 1;
    for (std::uint32_t i = 0; i < m; ++i) vectors *= n;
    h.set_size = vectors;
    enumerate_glm(n, m, [&](const MatrixModN& a) {
        std::uint64_t fixed = 0;
        for (std::uint64_t idx = 0; idx < vectors; ++idx) {
            std::vector<std::uint64_t> v(m);
            std::uint64_t rest = idx;
            for (std::uint32_t i = 0; i < m; ++i) {
                v[i] = rest % n;
                rest /= n;
            }
            bool ok = true;
            for (std::uint32_t r = 0; r < m && ok; ++r) {
                std::uint64_t s = 0;
                for (std::uint32_t c = 0; c < m; ++c) s += a.at(r, c) * v[c];
                ok = s % n == v[r];
            }
            fixed += ok;
        }
        ++h.counts[fixed];
    });
    return h;
}

} // namespace

TEST(Descriptor, ParseAndRender) {
    for (auto text : {"units:4", "glm:12,2", "semidirect:6", "quad:5,-1", "gl2:7"})
        EXPECT_EQ(parse_action(text).to_string(), text);
    EXPECT_THROW(parse_action("units"), UsageError);
    EXPECT_THROW(parse_action("glm:5"), UsageError);
    EXPECT_THROW(parse_action("gl2:6"), UsageError);
    EXPECT_THROW(parse_action("quad:5,-5"), UsageError);
    EXPECT_THROW(parse_action("glm:5,9"), UsageError);
    EXPECT_THROW(parse_action("units:0"), UsageError);
    EXPECT_THROW(parse_action("mystery:3"), UsageError);
}

TEST(Descriptor, GroupOrders) {
    EXPECT_EQ(ActionDescriptor::gl2(3).group_order(), 48);
    EXPECT_EQ(ActionDescriptor::units(12).group_order(), 4);
    EXPECT_EQ(ActionDescriptor::semidirect(6).group_order(), 12);
    EXPECT_EQ(ActionDescriptor::quad_units(5, -1).group_order(), 16);  // split: (F_5^*)^2
    EXPECT_EQ(ActionDescriptor::quad_units(7, -1).group_order(), 48);  // inert: F_49^*
    for (auto desc : {ActionDescriptor::units(9), ActionDescriptor::semidirect(8), ActionDescriptor::quad_units(6, -3),
                      ActionDescriptor::gl2(5), ActionDescriptor::glm(4, 2)}) {
        const auto act = build_action(desc);
        EXPECT_EQ(BigInt(act.order()), desc.group_order()) << desc.to_string();
        EXPECT_EQ(act.set_size(), desc.set_size()) << desc.to_string();
    }
}

TEST(Burnside, SpecExamples) {
    const auto u4 = fixed_point_histogram(ActionDescriptor::units(4));
    EXPECT_EQ(burnside_moment(u4, 1), 3);
    EXPECT_EQ(burnside_moment(u4, 2), 10);
    EXPECT_EQ(burnside_moment(fixed_point_histogram(ActionDescriptor::semidirect(2)), 2), 8);
    EXPECT_EQ(burnside_moment(fixed_point_histogram(ActionDescriptor::gl2(3)), 1), 2);
    EXPECT_EQ(burnside_moment(fixed_point_histogram(ActionDescriptor::gl2(3)), 2), 6);
    for (std::uint32_t n : {1U, 5U, 12U}) EXPECT_EQ(burnside_moment(fixed_point_histogram(ActionDescriptor::units(n)), 0), 1);
}

TEST(Burnside, UnitsAgreeWithDivisorSums) {
    for (std::uint32_t n = 1; n <= 60; ++n) {
        const auto h = fixed_point_histogram(ActionDescriptor::units(n));
        for (std::uint32_t k = 0; k <= 4; ++k) ASSERT_EQ(ExactRational(burnside_moment(h, k)), mk(n, k)) << n << "," << k;
    }
}

TEST(Burnside, NonExactDivisionIsAFault) {
    FixedPointHistogram bogus;
    bogus.set_size = 3;
    bogus.counts = {{3, 1}, {0, 1}};  // not the character of any action
    EXPECT_THROW(burnside_moment(bogus, 1), InternalFault);
}

TEST(Streaming, MatchesMatrixEnumeration) {
    for (std::uint32_t n = 1; n <= 12; ++n) EXPECT_EQ(glm_fixed_point_histogram(n, 2), glm_by_enumeration(n, 2)) << n;
    for (std::uint32_t n = 1; n <= 3; ++n) EXPECT_EQ(glm_fixed_point_histogram(n, 3), glm_by_enumeration(n, 3)) << n;
    EXPECT_EQ(glm_fixed_point_histogram(1, 4), glm_by_enumeration(1, 4));
}

TEST(Streaming, MatchesMaterializedAction) {
    for (std::uint32_t n : {2U, 3U, 4U, 5U, 6U, 8U, 9U, 10U, 16U}) {
        const auto act = build_action(ActionDescriptor::glm(n, 2));
        EXPECT_EQ(glm_fixed_point_histogram(n, 2), fixed_point_histogram(act)) << n;
    }
    EXPECT_EQ(glm_fixed_point_histogram(4, 3), fixed_point_histogram(build_action(ActionDescriptor::glm(4, 3))));
    EXPECT_EQ(glm_fixed_point_histogram(2, 4), fixed_point_histogram(build_action(ActionDescriptor::glm(2, 4))));
}

TEST(Streaming, CrtProductOfCoprimeParts) {
    const auto h = glm_fixed_point_histogram(15, 2);
    EXPECT_EQ(h.group_order(), glm_order(15, 2));
    for (std::uint32_t k = 0; k <= 4; ++k)
        EXPECT_EQ(burnside_moment(h, k),
                  burnside_moment(glm_fixed_point_histogram(3, 2), k) * burnside_moment(glm_fixed_point_histogram(5, 2), k));
}

TEST(Streaming, LargerCasesAreGroupCharacters) {
    // The Burnside division succeeds exactly only for genuine permutation characters.
    for (auto [n, m] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{49, 2}, {64, 2}, {7, 3}, {8, 3}, {3, 4}}) {
        const auto h = glm_fixed_point_histogram(n, m);
        EXPECT_EQ(h.group_order(), glm_order(n, m));
        EXPECT_EQ(burnside_moment(h, 0), 1);
        for (std::uint32_t k = 1; k <= 4; ++k) EXPECT_NO_THROW(burnside_moment(h, k)) << n << "," << m;
    }
}

TEST(Streaming, BudgetExceeded) {
    EXPECT_THROW(glm_fixed_point_histogram(1009, 4), CapacityError);
    EXPECT_THROW(glm_fixed_point_histogram(49, 3, 1000), CapacityError);
    EXPECT_THROW(build_action(ActionDescriptor::glm(11, 3), 1000), CapacityError);
}

TEST(Oracle, AgreesWithFloodFill) {
    for (auto text : {"units:7", "units:12", "semidirect:5", "semidirect:6", "quad:3,-1", "quad:4,-3", "quad:5,-2",
                      "gl2:2", "gl2:3", "glm:4,2"}) {
        const auto act = build_action(parse_action(text));
        for (std::uint32_t k = 1; k <= 3; ++k) {
            const auto expect = orbits_by_flood_fill(act, k);
            if (expect > 2'000'000) break;
            ASSERT_EQ(orbit_count_oracle(act, k), expect) << text << " k=" << k;
            ASSERT_EQ(burnside_moment(act, k), expect) << text << " k=" << k;
        }
    }
}

TEST(Oracle, TrivialCases) {
    const auto single = build_action(ActionDescriptor::units(1));
    for (std::uint32_t k = 0; k <= 5; ++k) {
        EXPECT_EQ(orbit_count_oracle(single, k), 1U);
        EXPECT_EQ(burnside_moment(single, k), 1);
    }
    EXPECT_THROW(orbit_count_oracle(build_action(ActionDescriptor::units(50)), 5, 1000), CapacityError);
}

TEST(Oracle, GeneratingSubsetGeneratesTheGroup) {
    const auto act = build_action(ActionDescriptor::gl2(5));
    const auto gens = generating_subset(act);
    EXPECT_LE(gens.size(), 6U);
    EXPECT_FALSE(gens.empty());
}

TEST(Action, OrbitsAndGroupAxioms) {
    const auto act = build_action(ActionDescriptor::units(10));
    EXPECT_TRUE(act.is_group());
    const auto orbit = orbit_of(act, 1);
    const std::set<std::uint32_t> orbit_of_one(orbit.begin(), orbit.end());
    EXPECT_EQ(orbit_of_one, (std::set<std::uint32_t>{1, 3, 7, 9}));
    EXPECT_EQ(orbit_of(act, 0), (std::vector<std::uint32_t>{0}));
    EXPECT_TRUE(build_action(ActionDescriptor::semidirect(4)).is_group());
    EXPECT_TRUE(build_action(ActionDescriptor::quad_units(4, -7)).is_group());
    EXPECT_TRUE(build_action(ActionDescriptor::gl2(3)).is_group());

    // {id, a transposition, a 3-cycle} is not closed
    PermutationAction broken(3, {0, 1, 2, 1, 0, 2, 1, 2, 0});
    EXPECT_FALSE(broken.is_group());
    EXPECT_THROW(PermutationAction(3, {0, 0, 2}), UsageError);
    EXPECT_THROW(PermutationAction(3, {0, 1}), UsageError);
}

TEST(Action, LabelsDescribeElements) {
    const auto act = build_action(ActionDescriptor::gl2(2));
    ASSERT_NE(act.label(0), nullptr);
    std::set<std::string> labels;
    for (std::size_t g = 0; g < act.order(); ++g) labels.insert(*act.label(g));
    EXPECT_EQ(labels.size(), 6U);
}

TEST(Distribution, PredictedMassesFromHistogram) {
    const auto d = predicted_value_distribution(fixed_point_histogram(ActionDescriptor::gl2(3)));
    ASSERT_EQ(d.size(), 3U);
    EXPECT_EQ(d.at(9), ExactRational(1, 48));
    EXPECT_EQ(d.at(3), ExactRational(20, 48));
    EXPECT_EQ(d.at(1), ExactRational(27, 48));
    const auto g = gl2_densities(3);
    EXPECT_EQ(d.at(1), g[0]);
    EXPECT_EQ(d.at(3), g[1]);
    EXPECT_EQ(d.at(9), g[2]);
}

TEST(Distribution, Gl2HistogramMatchesClosedFormForSmallPrimes) {
    for (std::uint32_t l : {2U, 3U, 5U, 7U, 11U, 13U, 17U, 19U, 23U}) {
        const auto d = predicted_value_distribution(fixed_point_histogram(ActionDescriptor::gl2(l)));
        const auto g = gl2_densities(l);
        EXPECT_EQ(d.at(1), g[0]) << l;
        EXPECT_EQ(d.at(l), g[1]) << l;
        EXPECT_EQ(d.at(static_cast<std::uint64_t>(l) * l), g[2]) << l;
    }
}
