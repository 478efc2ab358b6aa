#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "oracles.hpp"

using namespace normflow;
using oracle::C;

namespace {

MultiIndex mi(std::initializer_list<int> e) { return MultiIndex(e); }

FormalVectorField nonlinear(int n, int cap) { return FormalVectorField::zero(n, cap); }

} // namespace

TEST(Bracket, DiagonalLinearPartGivesSmallDivisor)
{
    const std::vector<C> lam{{1.0, 0.5}, {-2.0, 0.25}, {0.3, -1.0}};
    FormalVectorField lin(lam, 6);
    FormalVectorField mono = nonlinear(3, 6);
    const MultiIndex k = mi({2, 1, 1});
    mono.set(2, k, {0.7, -0.2});
    const FormalVectorField br = lie_bracket(lin, mono, 6);
    const C expect = (2.0 * lam[0] + lam[1] + lam[2] - lam[2]) * C(0.7, -0.2);
    ASSERT_EQ(br.size(), 1u);
    EXPECT_LT(std::abs(br.coeff(2, k) - expect), 1e-15);
}

TEST(Bracket, SelfBracketVanishes)
{
    oracle::Rng rng(11);
    const FormalVectorField u = oracle::random_field(rng, {{1, 0}, {-0.5, 2}}, 7, 6, 2, 4);
    EXPECT_LT(max_abs_difference(lie_bracket(u, u, 7), FormalVectorField::zero(2, 7)), 1e-13);
}

TEST(Bracket, HandExpandedExample)
{
    // u = z1 z2 e1, v = z1^2 e2: [u, v] = -z1^3 e1 + 2 z1^2 z2 e2.
    FormalVectorField u = nonlinear(2, 4), v = nonlinear(2, 4);
    u.set(0, mi({1, 1}), 1.0);
    v.set(1, mi({2, 0}), 1.0);
    const FormalVectorField br = lie_bracket(u, v, 4);
    EXPECT_EQ(br.size(), 2u);
    EXPECT_EQ(br.coeff(0, mi({3, 0})), C(-1.0));
    EXPECT_EQ(br.coeff(1, mi({2, 1})), C(2.0));
    // Same answer from the dense differentiation oracle.
    EXPECT_EQ(oracle::distance(oracle::bracket(oracle::from_field(u), oracle::from_field(v), 4), br, 4), 0.0);
}

TEST(Bracket, MatchesDenseOracleOnRandomFields)
{
    oracle::Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = trial % 2 ? 3 : 2;
        std::vector<C> lam;
        for (int j = 0; j < n; ++j) lam.push_back(rng.complex(2.0));
        const FormalVectorField u = oracle::random_field(rng, lam, 6, 5, 2, 4);
        const FormalVectorField v = oracle::random_field(rng, lam, 6, 5, 2, 4);
        const auto want = oracle::bracket(oracle::from_field(u), oracle::from_field(v), 6);
        EXPECT_LT(oracle::distance(want, lie_bracket(u, v, 6), 6), 1e-13) << "trial " << trial;
    }
}

TEST(Bracket, BilinearAndAntisymmetric)
{
    oracle::Rng rng(5);
    const std::vector<C> lam{{1, 0}, {0, 1}};
    const auto u = oracle::random_field(rng, lam, 6, 5, 2, 4);
    const auto v = oracle::random_field(rng, lam, 6, 5, 2, 4);
    const auto w = oracle::random_field(rng, lam, 6, 5, 2, 4);
    const C a{0.3, -1.2}, b{-2.0, 0.5};
    const auto lhs = lie_bracket(add(scale(u, a), scale(v, b), 6), w, 6);
    const auto rhs = add(scale(lie_bracket(u, w, 6), a), scale(lie_bracket(v, w, 6), b), 6);
    double scale_ref = 1.0;
    lhs.for_each([&](int, const MultiIndex&, const C& c) { scale_ref = std::max(scale_ref, std::abs(c)); });
    EXPECT_LT(max_abs_difference(lhs, rhs), 1e-12 * scale_ref);
    EXPECT_LT(max_abs_difference(lie_bracket(u, v, 6), scale(lie_bracket(v, u, 6), -1.0)), 1e-12 * scale_ref);
}

TEST(Bracket, JacobiIdentity)
{
    oracle::Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<C> lam{rng.complex(1.5), rng.complex(1.5)};
        const auto u = oracle::random_field(rng, lam, 7, 4, 2, 3);
        const auto v = oracle::random_field(rng, lam, 7, 4, 2, 3);
        const auto w = oracle::random_field(rng, lam, 7, 4, 2, 3);
        // Inner brackets carry zero linear part; the outer ones see the full fields.
        const auto t1 = lie_bracket(lie_bracket(u, v, 7), w, 7);
        const auto t2 = lie_bracket(lie_bracket(v, w, 7), u, 7);
        const auto t3 = lie_bracket(lie_bracket(w, u, 7), v, 7);
        const auto sum = add(add(t1, t2, 7), t3, 7);
        EXPECT_LT(max_abs_difference(sum, FormalVectorField::zero(2, 7)), 1e-10) << "trial " << trial;
    }
}

TEST(LinearOps, AddScaleTruncate)
{
    oracle::Rng rng(9);
    const auto u = oracle::random_field(rng, {{1, 0}, {2, 0}}, 5, 6, 2, 5);
    const auto z = add(u, scale(u, -1.0), 5);
    EXPECT_TRUE(z.empty());
    FormalVectorField cubic = nonlinear(2, 5);
    cubic.set(0, mi({2, 1}), 1.0);
    cubic.set(1, mi({0, 3}), {0, 2});
    EXPECT_TRUE(truncate(cubic, 2).empty());
    EXPECT_EQ(max_abs_difference(scale(scale(u, C(0, 1)), C(0, 1)), scale(u, -1.0)), 0.0);
}

TEST(LinearOps, CanonicalFormHasNoZeros)
{
    FormalVectorField u = nonlinear(2, 4);
    u.set(0, mi({2, 0}), 1.0);
    u.add_to(0, mi({2, 0}), -1.0);
    u.set(1, mi({1, 1}), 0.0);
    u.set(1, mi({0, 2}), 1e-301);
    EXPECT_TRUE(u.empty());
    oracle::Rng rng(3);
    const auto v = oracle::random_field(rng, {{1, 0}, {0, 1}}, 6, 8, 2, 6);
    const auto w = lie_bracket(v, add(v, scale(v, C(0.5, 0.5)), 6), 6);
    w.for_each([](int, const MultiIndex&, const C& c) { EXPECT_NE(c, C(0.0)); });
}

TEST(Substitute, IdentityIsBitExact)
{
    oracle::Rng rng(21);
    const auto u = oracle::random_field(rng, {{1, 0.2}, {-1, 0}}, 6, 7, 2, 6);
    const auto s = substitute(u, SeriesMap::identity(2, 6), 6);
    EXPECT_EQ(max_abs_difference(s, u), 0.0);
}

TEST(Substitute, LinearFieldExample)
{
    // u = z1 e1, phi: z1 -> z1 + z2^2  gives  z1 e1 + z2^2 e1.
    FormalVectorField u({1.0, 0.0}, 4);
    SeriesMap phi(2, 4);
    phi.set(0, mi({0, 2}), 1.0);
    const auto s = substitute(u, phi, 4);
    EXPECT_EQ(s.lambda()[0], C(1.0));
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(s.coeff(0, mi({0, 2})), C(1.0));
}

TEST(Substitute, MatchesDenseCompositionOracle)
{
    oracle::Rng rng(404);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + trial % 2;
        std::vector<C> lam;
        for (int j = 0; j < n; ++j) lam.push_back(rng.complex(1.0));
        const auto u = oracle::random_field(rng, lam, 4, 6, 2, 4);
        const auto phi = oracle::random_map(rng, n, 4, 5, 2, 4);
        const auto got = substitute(u, phi, 4);
        const auto U = oracle::from_field(u);
        const auto P = oracle::from_map(phi);
        oracle::DField want(static_cast<std::size_t>(n));
        for (int m = 0; m < n; ++m) want[static_cast<std::size_t>(m)] = oracle::compose(U[static_cast<std::size_t>(m)], P, 4);
        EXPECT_LT(oracle::distance(want, got, 4), 1e-13) << "trial " << trial;
    }
}

TEST(Compose, InverseRoundTrip)
{
    oracle::Rng rng(8);
    const auto phi = oracle::random_map(rng, 3, 6, 8, 2, 5);
    const auto psi = inverse(phi, 6);
    auto largest = [](const SeriesMap& m) {
        double w = 0.0;
        m.for_each([&](int, const MultiIndex&, const C& c) { w = std::max(w, std::abs(c)); });
        return w;
    };
    EXPECT_LT(largest(compose(phi, psi, 6)), 1e-13);
    EXPECT_LT(largest(compose(psi, phi, 6)), 1e-13);
}

TEST(Compose, MatchesDenseCompositionOracle)
{
    oracle::Rng rng(99);
    const auto phi = oracle::random_map(rng, 2, 5, 5, 2, 4);
    const auto chi = oracle::random_map(rng, 2, 5, 5, 2, 4);
    const auto P = oracle::from_map(phi);
    const auto X = oracle::from_map(chi);
    oracle::DField want(2);
    for (int m = 0; m < 2; ++m) want[static_cast<std::size_t>(m)] = oracle::compose(P[static_cast<std::size_t>(m)], X, 5);
    EXPECT_LT(oracle::distance(want, oracle::from_map(compose(phi, chi, 5)), 1, 5), 1e-14);
}

TEST(Pushforward, IdentityLeavesFieldUnchanged)
{
    oracle::Rng rng(1);
    const auto u = oracle::random_field(rng, {{1, 0}, {0, -1}}, 5, 5, 2, 5);
    EXPECT_EQ(max_abs_difference(pushforward(SeriesMap::identity(2, 5), u, 5), u), 0.0);
}

TEST(Pushforward, LinearInFieldAndInvertible)
{
    oracle::Rng rng(13);
    const std::vector<C> lam{{1, 0}, {-0.7, 0.4}};
    const auto u = oracle::random_field(rng, lam, 6, 5, 2, 5);
    const auto v = oracle::random_field(rng, lam, 6, 5, 2, 5);
    const auto phi = oracle::random_map(rng, 2, 6, 5, 2, 4);
    const C a{0.5, 1.5};
    const auto lhs = pushforward(phi, add(u, scale(v, a), 6), 6);
    const auto rhs = add(pushforward(phi, u, 6), scale(pushforward(phi, v, 6), a), 6);
    EXPECT_EQ(lhs.lambda(), rhs.lambda());
    EXPECT_LT(max_abs_difference(lhs, rhs), 1e-10);
    // Pushforward by phi then by its inverse.
    const auto back = pushforward(inverse(phi, 6), pushforward(phi, u, 6), 6);
    EXPECT_LT(max_abs_difference(back, u), 1e-10);
}

namespace {

std::vector<C> full_field(const FormalVectorField& u, const std::vector<C>& z) { return u.evaluate(z); }

std::vector<C> flow_point(const FormalVectorField& u, std::vector<C> z, double t, int steps)
{
    const double h = t / steps;
    auto ax = [](std::vector<C> a, const std::vector<C>& b, double s) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
        return a;
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = full_field(u, z);
        const auto k2 = full_field(u, ax(z, k1, h / 2));
        const auto k3 = full_field(u, ax(z, k2, h / 2));
        const auto k4 = full_field(u, ax(z, k3, h));
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += h / 6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return z;
}

/// Solves phi(z) = y by Newton iteration.
std::vector<C> preimage(const SeriesMap& phi, const std::vector<C>& y)
{
    Eigen::Vector2cd z(y[0], y[1]);
    for (int it = 0; it < 60; ++it) {
        const std::vector<C> zz{z(0), z(1)};
        const auto f = phi.apply(zz);
        const auto J = phi.jacobian(zz);
        Eigen::Matrix2cd M;
        M << J[0], J[1], J[2], J[3];
        const Eigen::Vector2cd r(f[0] - y[0], f[1] - y[1]);
        z -= M.lu().solve(r);
        if (r.norm() < 1e-17) break;
    }
    return {z(0), z(1)};
}

} // namespace

TEST(Pushforward, TrajectoryFittingOracle)
{
    // Sample w on a torus |y_j| = r: for each y, pull back through phi, integrate
    // the trajectory of u a few tiny steps either way, push it forward and
    // differentiate in time. The Taylor coefficients of w are then read off by
    // a discrete Cauchy integral over the torus.
    const int cap = 5;
    const std::vector<C> lam{{1.0, 0.0}, {-0.6, 0.8}};
    FormalVectorField u(lam, cap);
    u.set(0, mi({1, 1}), {0.4, -0.1});
    u.set(1, mi({2, 0}), {-0.3, 0.2});
    u.set(0, mi({0, 3}), {0.1, 0.05});
    SeriesMap phi(2, cap);
    phi.set(0, mi({0, 2}), {0.2, 0.1});
    phi.set(1, mi({1, 1}), {-0.15, 0.0});
    phi.set(1, mi({3, 0}), {0.05, -0.05});
    const FormalVectorField w = pushforward(phi, u, cap);

    const int N = 16;
    const double r = 0.12;
    const double h = 2e-3;
    std::map<std::pair<int, MultiIndex>, C> fitted;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const double t1 = 2 * M_PI * a / N, t2 = 2 * M_PI * b / N;
            const std::vector<C> y{std::polar(r, t1), std::polar(r, t2)};
            const auto z0 = preimage(phi, y);
            std::vector<std::vector<C>> pts;
            for (int s : {-2, -1, 1, 2}) pts.push_back(phi.apply(flow_point(u, z0, s * h, 8)));
            for (int m = 0; m < 2; ++m) {
                const std::size_t mm = static_cast<std::size_t>(m);
                const C vel = (pts[0][mm] - 8.0 * pts[1][mm] + 8.0 * pts[2][mm] - pts[3][mm]) / (12.0 * h);
                const C nl = vel - lam[mm] * y[mm];
                for (int D = 2; D <= cap; ++D)
                    for (const auto& k : indices_of_degree(2, D)) {
                        const C basis = std::polar(1.0, -(k[0] * t1 + k[1] * t2));
                        fitted[{m, k}] += nl * basis / static_cast<double>(N * N) / std::pow(r, D);
                    }
            }
        }
    double worst = 0.0;
    for (const auto& [slot, c] : fitted) worst = std::max(worst, std::abs(c - w.coeff(slot.first, slot.second)));
    EXPECT_LT(worst, 1e-5);
    // Degree-2 coefficients are pinned much tighter than the top shell.
    for (const auto& k : indices_of_degree(2, 2))
        for (int m = 0; m < 2; ++m) EXPECT_LT(std::abs(fitted[{m, k}] - w.coeff(m, k)), 1e-8);
}

TEST(SupNorm, Examples)
{
    EXPECT_EQ(sup_norm_bound(FormalVectorField::zero(2, 4), 1.0), 0.0);
    FormalVectorField u = nonlinear(2, 4);
    u.set(0, mi({2, 0}), 1.0);
    EXPECT_DOUBLE_EQ(sup_norm_bound(u, 0.5), 0.25);
    EXPECT_THROW(sup_norm_bound(u, 0.0), PreconditionError);
}

TEST(SupNorm, NonnegativeFieldEqualsCornerValue)
{
    oracle::Rng rng(31);
    FormalVectorField u = nonlinear(3, 5);
    for (int t = 0; t < 9; ++t) {
        std::vector<int> e(3, 0);
        const int D = rng.integer(2, 5);
        for (int i = 0; i < D; ++i) ++e[static_cast<std::size_t>(rng.integer(0, 2))];
        u.set(rng.integer(0, 2), MultiIndex(e), rng.uniform(0.0, 1.0));
    }
    const double rho = 0.8;
    const auto at = u.evaluate(std::vector<C>(3, rho));
    double best = 0.0;
    for (const auto& v : at) best = std::max(best, v.real());
    EXPECT_NEAR(sup_norm_bound(u, rho), best, 1e-14);
}

TEST(SeriesMapTest, JacobianMatchesFiniteDifferences)
{
    oracle::Rng rng(17);
    const auto phi = oracle::random_map(rng, 2, 5, 6, 2, 5);
    const std::vector<C> z{{0.2, -0.1}, {-0.3, 0.05}};
    const auto J = phi.jacobian(z);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
        auto zp = z, zm = z;
        zp[static_cast<std::size_t>(j)] += h;
        zm[static_cast<std::size_t>(j)] -= h;
        const auto fp = phi.apply(zp), fm = phi.apply(zm);
        for (int i = 0; i < 2; ++i)
            EXPECT_LT(std::abs((fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2 * h) -
                               J[static_cast<std::size_t>(i * 2 + j)]),
                      1e-8);
    }
}
