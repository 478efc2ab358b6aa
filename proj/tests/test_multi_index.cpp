#include <gtest/gtest.h>

#include <set>

#include "normflow/multi_index.hpp"

using normflow::MultiIndex;

TEST(MultiIndex, OrderIsSumOfExponents)
{
    const MultiIndex k{3, 0, 2};
    EXPECT_EQ(k.dim(), 3);
    EXPECT_EQ(k.order(), 5);
    EXPECT_EQ(k[0], 3);
    EXPECT_EQ(k[2], 2);
    EXPECT_EQ(k.dashed(), "3-0-2");
    EXPECT_EQ(k.to_vector(), (std::vector<int>{3, 0, 2}));
}

TEST(MultiIndex, RejectsNegativeAndOversizedExponents)
{
    EXPECT_THROW(MultiIndex({1, -1}), normflow::PreconditionError);
    EXPECT_THROW(MultiIndex({256, 0}), normflow::PreconditionError);
    EXPECT_THROW(MultiIndex(9), normflow::PreconditionError);
}

TEST(MultiIndex, ArithmeticHelpers)
{
    const MultiIndex a{2, 1};
    const MultiIndex b{1, 1};
    EXPECT_EQ(a + b, (MultiIndex{3, 2}));
    MultiIndex d;
    ASSERT_TRUE(a.try_subtract(b, d));
    EXPECT_EQ(d, (MultiIndex{1, 0}));
    EXPECT_FALSE(b.try_subtract(a, d));
    ASSERT_TRUE(a.try_decrement(1, d));
    EXPECT_EQ(d, (MultiIndex{2, 0}));
    EXPECT_FALSE(d.try_decrement(1, d));
    EXPECT_EQ(MultiIndex::unit(3, 1), (MultiIndex{0, 1, 0}));
}

TEST(MultiIndex, OrderingIsLexicographicAndHashable)
{
    std::set<MultiIndex> s{MultiIndex{0, 2}, MultiIndex{2, 0}, MultiIndex{1, 1}};
    std::vector<MultiIndex> v(s.begin(), s.end());
    EXPECT_EQ(v.front(), (MultiIndex{0, 2}));
    EXPECT_EQ(v.back(), (MultiIndex{2, 0}));
    EXPECT_EQ(std::hash<MultiIndex>{}(MultiIndex{1, 1}), std::hash<MultiIndex>{}(MultiIndex{1, 1}));
}

TEST(MultiIndex, IndicesOfDegreeCountMatchesStarsAndBars)
{
    // C(D + n - 1, n - 1)
    EXPECT_EQ(normflow::indices_of_degree(2, 5).size(), 6u);
    EXPECT_EQ(normflow::indices_of_degree(3, 4).size(), 15u);
    EXPECT_EQ(normflow::indices_of_degree(4, 3).size(), 20u);
    for (const auto& k : normflow::indices_of_degree(3, 4)) EXPECT_EQ(k.order(), 4);
}

TEST(MultiIndex, Multinomial)
{
    EXPECT_DOUBLE_EQ(normflow::multinomial(MultiIndex{2, 0}), 1.0);
    EXPECT_DOUBLE_EQ(normflow::multinomial(MultiIndex{1, 1}), 2.0);
    EXPECT_DOUBLE_EQ(normflow::multinomial(MultiIndex{2, 1, 1}), 12.0);
    // Sum over a shell is n^D.
    double s = 0.0;
    for (const auto& k : normflow::indices_of_degree(3, 5)) s += normflow::multinomial(k);
    EXPECT_DOUBLE_EQ(s, 243.0);
}
