#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace normflow;
using oracle::C;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

MultiIndex mi(std::initializer_list<int> e) { return MultiIndex(e); }

// 1/min|p + q phi| over 0 < |p| + |q| <= 2^j + 1, j = 1..16, and the running
// sums of 2^{-j} ln of those values; 40-digit enumeration, frozen.
const double kGoldenOmega[16] = {
    2.6180339887498948, 4.2360679774997897, 6.8541019662496845, 11.090169943749474,
    17.944271909999159, 46.978713763747792, 76.013155617496425, 199.00502499874064,
    321.99689437998486, 842.99881375871036, 1364.0007331374359, 2206.9995468961462,
    5777.9998269297283, 9349.0001069633104, 24476.000040856349, 39602.999974749388};
const double kGoldenSums[16] = {
    0.48121182505960345, 0.84212069385430603, 1.0827266063841078, 1.2331053017152338,
    1.3233325189139095, 1.3834839970463599, 1.4173192034958633, 1.4379962741038931,
    1.4492746762537276, 1.4558537441744643, 1.4593782448462876, 1.4612579785379267,
    1.4623153287394737, 1.462873374679179, 1.4631817684879635, 1.4633433081020888};

} // namespace

TEST(SmallDivisor, Examples)
{
    const Spectrum s1({1.0, -1.0});
    EXPECT_EQ(s1.small_divisor(mi({2, 1}), 0), C(0.0));
    EXPECT_TRUE(s1.is_resonant(mi({2, 1}), 0));
    const Spectrum s2({1.0, 2.0});
    EXPECT_EQ(small_divisor(s2, mi({2, 0}), 1), C(0.0));
    const Spectrum g({1.0, kPhi});
    for (int D = 2; D <= 12; ++D)
        for (const auto& k : indices_of_degree(2, D))
            for (int m = 0; m < 2; ++m) EXPECT_FALSE(g.is_resonant(k, m));
    EXPECT_THROW(s1.small_divisor(mi({2, 1}), 2), PreconditionError);
}

TEST(SmallDivisor, SingleArithmeticPath)
{
    oracle::Rng rng(6);
    const Spectrum s({rng.complex(2.0), rng.complex(2.0), rng.complex(2.0)});
    for (const auto& k : indices_of_degree(3, 4))
        for (int m = 0; m < 3; ++m) EXPECT_EQ(s.small_divisor(k, m), s.inner(k) - s.lambda()[static_cast<std::size_t>(m)]);
}

TEST(ResonantSet, Examples)
{
    EXPECT_TRUE(resonant_set(Spectrum({1.0, kPhi}), 10).empty());
    EXPECT_TRUE(resonant_set(Spectrum({1.0}), 10).empty());
    const auto r = resonant_set(Spectrum({1.0, -1.0}), 3);
    // Brute force over |k| <= 3: exactly (2,1) for m = 1 and (1,2) for m = 2.
    std::vector<std::pair<int, MultiIndex>> brute;
    for (int D = 2; D <= 3; ++D)
        for (int a = 0; a <= D; ++a)
            for (int m = 0; m < 2; ++m) {
                const int b = D - a;
                const int e1 = a - (m == 0), e2 = b - (m == 1);
                if (e1 * 1 + e2 * -1 == 0) brute.emplace_back(m, mi({a, b}));
            }
    ASSERT_EQ(r.size(), brute.size());
    for (const auto& s : r)
        EXPECT_NE(std::find(brute.begin(), brute.end(), std::make_pair(s.m, s.k)), brute.end());
}

TEST(ResonantSet, DeterministicLexicographicOrder)
{
    const auto a = resonant_set(Spectrum({1.0, -1.0, 0.0}), 4);
    const auto b = resonant_set(Spectrum({1.0, -1.0, 0.0}), 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].k, b[i].k);
        EXPECT_EQ(a[i].m, b[i].m);
    }
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto key = [](const ResonantSlot& s) { return std::make_tuple(s.k.order(), s.k, s.m); };
        EXPECT_LT(key(a[i - 1]), key(a[i]));
    }
}

TEST(Omega, GoldenRatioSmallOrders)
{
    const Spectrum g({1.0, kPhi});
    EXPECT_NEAR(omega_s(g, 2), kPhi, 1e-14);
    EXPECT_EQ(omega_s(Spectrum({1.0}), 7), 1.0);
    EXPECT_EQ(omega_s(g, 1), 1.0);
}

TEST(Omega, GoldenRatioDyadicTable)
{
    const Spectrum g({1.0, kPhi});
    // Divisors come from |k| ~ s cancelling terms, so the relative error grows like eps s Omega.
    const double eps = std::numeric_limits<double>::epsilon();
    for (int j = 1; j <= 16; ++j) {
        const int s = (1 << j) + 1;
        const double tol = std::max(1e-14, 4.0 * eps * s * kPhi * kGoldenOmega[j - 1]);
        EXPECT_NEAR(omega_s(g, s) / kGoldenOmega[j - 1], 1.0, tol) << "j = " << j;
    }
}

TEST(Omega, MatchesBruteForceEnumeration)
{
    oracle::Rng rng(123);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + trial % 2;
        std::vector<C> lam;
        for (int j = 0; j < n; ++j) lam.push_back(rng.complex(2.0));
        const Spectrum s(lam);
        for (int order : {1, 2, 3, 5, 8}) {
            const double want = oracle::omega_brute(lam, order, s.tolerance());
            EXPECT_NEAR(omega_s(s, order) / want, 1.0, 1e-12) << "trial " << trial << " s " << order;
        }
    }
    // Exactly resonant spectra skip the lattice.
    const std::vector<C> res{1.0, -1.0, 2.0};
    for (int order : {2, 4, 6}) EXPECT_EQ(omega_s(Spectrum(res), order), oracle::omega_brute(res, order, 1e-12));
}

TEST(Omega, NondecreasingInOrder)
{
    const Spectrum s({{0.3, 1.1}, {-0.7, 0.2}, {1.9, -0.4}});
    double prev = 0.0;
    for (int order = 1; order <= 20; ++order) {
        const double w = omega_s(s, order);
        EXPECT_GE(w, prev);
        prev = w;
    }
}

TEST(Omega, NearResonanceIsSignalled)
{
    // 1e-11 is above the resonance tolerance but below the near-resonance floor.
    const Spectrum s({1.0, -1.0 + 1e-11});
    EXPECT_THROW(omega_s(s, 3), PreconditionError);
}

TEST(Brjuno, GoldenRatioPartialSums)
{
    const auto b = brjuno_partial_sums(Spectrum({1.0, kPhi}), 16);
    ASSERT_EQ(b.partial.size(), 16u);
    EXPECT_TRUE(b.a_nondecreasing);
    for (int j = 0; j < 16; ++j) EXPECT_NEAR(b.partial[static_cast<std::size_t>(j)], kGoldenSums[j], 1e-10);
    for (int j = 1; j < 16; ++j) EXPECT_GT(b.partial[static_cast<std::size_t>(j)], b.partial[static_cast<std::size_t>(j - 1)]);
    // Flattening: the increment from J = 8 on is below 3%.
    EXPECT_LT(b.partial[15] - b.partial[7], 0.03 * b.partial[7]);
}

TEST(Brjuno, ResonantAndTrivialSpectra)
{
    const auto r = brjuno_partial_sums(Spectrum({1.0, -1.0}), 8);
    for (double a : r.a) EXPECT_EQ(a, 1.0);
    for (double s : r.partial) EXPECT_EQ(s, 0.0);
    const auto one = brjuno_partial_sums(Spectrum({1.0}), 6);
    for (double s : one.partial) EXPECT_EQ(s, 0.0);
}

TEST(BSequence, PropertyCheckerExamples)
{
    EXPECT_TRUE(check_b_properties(std::vector<double>(20, 0.0)).all());
    std::vector<double> lin;
    for (int i = 2; i < 40; ++i) lin.push_back(-static_cast<double>(i));
    const auto r = check_b_properties(lin);
    EXPECT_TRUE(r.convex);
    EXPECT_TRUE(r.nonincreasing);
    EXPECT_FALSE(r.sublinear);
    std::vector<double> bump{-1.0, -3.0, -2.0, -4.0};
    const auto rb = check_b_properties(bump);
    EXPECT_FALSE(rb.convex);
    EXPECT_FALSE(rb.nonincreasing);
    EXPECT_EQ(rb.first_nonincreasing_violation, 4);
}

TEST(BSequence, ConstantScaleOutput)
{
    const BSequence b = build_b_sequence(3.0, 2, 12);
    ASSERT_EQ(b.anchors.size(), 12u);
    for (std::size_t j = 1; j < b.anchors.size(); ++j) EXPECT_LE(b.anchors[j], b.anchors[j - 1]);
    for (double v : b.anchors) EXPECT_LT(v, 0.0);
    EXPECT_TRUE(check_b_properties(b).all());
    EXPECT_THROW(build_b_sequence(0.5, 2, 12), PreconditionError);
}

TEST(BSequence, DefiningRelationWiredToOmega)
{
    const Spectrum g({1.0, -kPhi});
    const BSequence b = build_b_sequence(g, 14);
    EXPECT_TRUE(check_b_properties(b).all());
    // exp(b_{r_{m+1}} - 2 b_{r_m}) = n 2^m (2 r_m)^{n+1} Omega_{r_m}
    for (int m = 1; m < 14; ++m) {
        const double lhs = std::exp(b.anchors[static_cast<std::size_t>(m)] - 2.0 * b.anchors[static_cast<std::size_t>(m - 1)]);
        const double rm = static_cast<double>(anchor_index(m));
        const double rhs = 2.0 * std::ldexp(1.0, m) * std::pow(2.0 * rm, 3) * omega_s(g, static_cast<int>(rm));
        EXPECT_NEAR(lhs / rhs, 1.0, 1e-10) << "m = " << m;
    }
    // The exp-gap ratio a_m is nondecreasing.
    for (std::size_t m = 1; m < b.a.size(); ++m) EXPECT_GE(b.a[m], b.a[m - 1]);
}

TEST(BSequence, SublinearRatiosSettle)
{
    const BSequence b = build_b_sequence(Spectrum({1.0, kPhi}), 16);
    // b_{2^j+1} / 2^j converges: successive differences shrink geometrically.
    std::vector<double> q;
    for (int j = 1; j < 16; ++j) q.push_back(b.anchors[static_cast<std::size_t>(j)] / std::ldexp(1.0, j));
    for (std::size_t i = 2; i < q.size(); ++i) EXPECT_LE(std::abs(q[i] - q[i - 1]), std::abs(q[i - 1] - q[i - 2]) + 1e-12);
}

TEST(BSequence, ThreeIndexInequalities)
{
    const BSequence b = build_b_sequence(Spectrum({1.0, kPhi}), 12);
    const long long top = b.max_index();
    oracle::Rng rng(777);
    for (int t = 0; t < 1000; ++t) {
        long long i1 = 2 + static_cast<long long>(rng.next() % static_cast<std::uint64_t>(top - 1));
        long long i2 = 2 + static_cast<long long>(rng.next() % static_cast<std::uint64_t>(top - 1));
        long long i3 = 2 + static_cast<long long>(rng.next() % static_cast<std::uint64_t>(top - 1));
        std::array<long long, 3> v{i1, i2, i3};
        std::sort(v.begin(), v.end());
        if (v[0] == v[1] || v[1] == v[2]) continue;
        const long long m = v[0], k = v[1], l = v[2];
        EXPECT_GE((l - k) * b.at(m) + (m - l) * b.at(k) + (k - m) * b.at(l), -1e-10);
        // b_k + b_l <= b_{k-d} + b_{l+d} for d < k - 1, k <= l, l + d <= top
        const long long d = m - 1;
        if (k - d >= 2 && l + d <= top) EXPECT_LE(b.at(k) + b.at(l), b.at(k - d) + b.at(l + d) + 1e-10);
    }
}

TEST(ResonanceReport, Contents)
{
    const auto r = resonance_report(Spectrum({1.0, -1.0}), 5, 4);
    EXPECT_FALSE(r.resonant.empty());
    EXPECT_EQ(r.omega.size(), 5u);
    for (const auto& s : r.resonant) EXPECT_LE(std::abs(Spectrum({1.0, -1.0}).small_divisor(s.k, s.m)), 1e-12);
    EXPECT_EQ(r.brjuno.partial.size(), 4u);
}
