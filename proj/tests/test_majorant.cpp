#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace normflow;
using oracle::C;

namespace {

MultiIndex mi(std::initializer_list<int> e) { return MultiIndex(e); }

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

} // namespace

TEST(Majorizes, Examples)
{
    FormalVectorField F({1.0, 2.0}, 4);
    F.set(0, mi({2, 0}), {0.3, -0.4});
    FormalVectorField G = FormalVectorField::zero(2, 4);
    G.set(0, mi({2, 0}), 0.5);
    EXPECT_TRUE(majorizes(F, G));
    G.set(0, mi({2, 0}), 0.49);
    EXPECT_FALSE(majorizes(F, G));
    EXPECT_TRUE(majorizes(F, abs_field(F)));
    F.set(1, mi({1, 2}), 1e-3);
    EXPECT_FALSE(majorizes(F, G));
    G.set(0, mi({2, 0}), {0.5, 0.1});
    EXPECT_THROW(majorizes(F, G), PreconditionError);
}

TEST(Majorizes, CauchyBound)
{
    EXPECT_DOUBLE_EQ(cauchy_bound(2.0, 0.5, mi({2, 1})), 16.0);
    EXPECT_DOUBLE_EQ(cauchy_bound(1.0, 1.0, mi({4, 4})), 1.0);
    EXPECT_THROW(cauchy_bound(1.0, 0.0, mi({2, 0})), PreconditionError);
    // Coefficients of a polynomial bounded by c on the polydisk of radius rho obey it.
    oracle::Rng rng(9);
    const auto u = oracle::random_field(rng, {1.0, C(0, 1)}, 5, 6, 2, 5);
    const double rho = 0.7;
    const double c = sup_norm_bound(u, rho);
    u.for_each([&](int, const MultiIndex& k, const C& v) { EXPECT_LE(std::abs(v), cauchy_bound(c, rho, k)); });
}

TEST(MajorantF, Coefficients)
{
    const BurgersModel m{0.8, 0.5, 2, 0.0};
    const auto c = majorant_f_coeffs(m, 12);
    EXPECT_EQ(c[0], 0.0);
    EXPECT_EQ(c[1], 0.0);
    EXPECT_DOUBLE_EQ(c[2], m.a / m.b);
    for (int j = 3; j <= 12; ++j) EXPECT_NEAR(c[static_cast<std::size_t>(j)] / c[static_cast<std::size_t>(j - 1)], 1.0 / m.b, 1e-14);
    // Partial sums at b/2 tend to a zeta^2/(b - zeta) = a b / 2.
    const auto many = majorant_f_coeffs(m, 80);
    double s = 0.0;
    for (int j = 2; j <= 80; ++j) s += many[static_cast<std::size_t>(j)] * std::pow(m.b / 2, j);
    EXPECT_NEAR(s, m.a * m.b / 2, 1e-15);
}

TEST(Burgers, ClosedFormBasics)
{
    const auto m = BurgersModel::from(1.0, 0.6, 2, 0.3);
    EXPECT_DOUBLE_EQ(m.a, 0.6);
    EXPECT_DOUBLE_EQ(m.tau, 2.4);
    EXPECT_EQ(burgers_solution(m, 0.0), C(0.0));
    // tau -> 0 recovers f.
    const BurgersModel tiny{0.6, 1.0, 2, 1e-12};
    for (const C z : {C(0.1, 0.0), C(0.2, -0.3), C(-0.4, 0.1)})
        EXPECT_LT(std::abs(burgers_solution(tiny, z) - tiny.f(z)), 1e-8);
}

TEST(Burgers, ImplicitEquationOnRandomPoints)
{
    oracle::Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = BurgersModel::from(rng.uniform(0.3, 2.0), rng.uniform(0.0, 3.0), rng.integer(1, 4), rng.uniform(0.0, 2.0));
        const double R = branch_points(m).first;
        const C z = std::polar(rng.uniform(0.0, 0.95) * R, rng.uniform(0.0, 2 * M_PI));
        EXPECT_LT(burgers_implicit_residual(m, z), 1e-12) << "trial " << trial;
    }
}

TEST(Burgers, BranchPoints)
{
    const BurgersModel free{0.7, 1.3, 1, 0.0};
    const auto [z1, z2] = branch_points(free);
    EXPECT_DOUBLE_EQ(z1, 1.3);
    EXPECT_DOUBLE_EQ(z2, 1.3);
    const BurgersModel unit{0.5, 1.0, 1, 2.0}; // a tau = 1
    EXPECT_NEAR(branch_points(unit).first, 1.0 / (3.0 + 2.0 * std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(branch_points(unit).second, 1.0 / (3.0 - 2.0 * std::sqrt(2.0)), 1e-13);
    // The discriminant vanishes at both points.
    for (double z : {branch_points(unit).first, branch_points(unit).second}) {
        const double at = unit.a * unit.tau;
        const double B = unit.b - z - 2 * at * z;
        EXPECT_NEAR(B * B - 4 * at * (1 + at) * z * z, 0.0, 1e-12);
    }
}

TEST(Burgers, SafeDiscInsideBranchPoints)
{
    for (double a : {0.0, 0.1, 1.0, 5.0})
        for (double b : {0.5, 1.0, 3.0})
            for (double tau : {0.0, 0.01, 1.0, 40.0}) {
                const BurgersModel m{a, b, 1, tau};
                EXPECT_LT(safe_disc_radius(m), branch_points(m).first);
            }
}

TEST(Burgers, SeriesMatchesClosedForm)
{
    const auto m = BurgersModel::from(1.0, 0.8, 2, 0.25);
    const int cap = 14;
    const auto series = burgers_series(m, cap);
    // Taylor coefficients of the closed form by a Cauchy integral on a small circle.
    const double r = 0.5 * branch_points(m).first;
    const int N = 256;
    for (int j = 0; j <= cap; ++j) {
        C acc = 0.0;
        for (int i = 0; i < N; ++i) {
            const double t = 2 * M_PI * i / N;
            acc += burgers_solution(m, std::polar(r, t)) * std::polar(1.0, -j * t);
        }
        const double want = (acc / static_cast<double>(N)).real() / std::pow(r, j);
        EXPECT_NEAR(series[static_cast<std::size_t>(j)], want, 1e-9 * std::max(1.0, std::abs(want))) << "j = " << j;
    }
    // tau = 0: the series is f itself.
    const auto f0 = burgers_series(BurgersModel::from(1.0, 0.8, 2, 0.0), cap);
    const auto fc = majorant_f_coeffs(BurgersModel::from(1.0, 0.8, 2, 0.0), cap);
    for (int j = 0; j <= cap; ++j) EXPECT_DOUBLE_EQ(f0[static_cast<std::size_t>(j)], fc[static_cast<std::size_t>(j)]);
    // All coefficients are nonnegative.
    for (double v : series) EXPECT_GE(v, 0.0);
}

TEST(Radius, Examples)
{
    EXPECT_DOUBLE_EQ(radius_lower_bound(1.0, 0.0, 1, 5.0), 0.5);
    EXPECT_DOUBLE_EQ(radius_lower_bound(1.0, 3.0, 1, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(radius_lower_bound(2.0, 1.0, 2, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(radius_lower_bound(1.0, 1.0, 1, 1.0), 1.0 / 18.0);
    EXPECT_THROW(radius_lower_bound(0.0, 1.0, 1, 1.0), PreconditionError);
}

TEST(Radius, MonotoneWithInverseAsymptotics)
{
    double prev = radius_lower_bound(1.0, 0.5, 2, 0.0);
    for (double d = 0.01; d < 1e4; d *= 1.7) {
        const double r = radius_lower_bound(1.0, 0.5, 2, d);
        EXPECT_LT(r, prev);
        prev = r;
    }
    // r(delta) delta -> rho^2 / (16 N n^2)
    const double big = 1e9;
    EXPECT_NEAR(radius_lower_bound(1.0, 0.5, 2, big) * big, 1.0 / (16 * 0.5 * 4), 1e-9);
}

TEST(Radius, EqualsSafeDiscOverDimension)
{
    oracle::Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const double rho = rng.uniform(0.1, 3.0), N = rng.uniform(0.0, 5.0), delta = rng.uniform(0.0, 50.0);
        const int n = rng.integer(1, 6);
        const double d = safe_disc_radius(BurgersModel::from(rho, N, n, delta));
        EXPECT_NEAR(radius_lower_bound(rho, N, n, delta) * n, d, 4 * std::numeric_limits<double>::epsilon() * d);
    }
}

TEST(SupBound, DecaysAndSplitsIntoRadiusTerm)
{
    EXPECT_THROW(sup_bound(1.0, 1.0, 2, 0.0), PreconditionError);
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 1e-3; d < 1e3; d *= 2.0) {
        const double s = sup_bound(1.0, 0.7, 2, d);
        EXPECT_LT(s, prev);
        prev = s;
        // Second summand is the radius divided by tau = 4 n delta.
        const double tau = 8.0 * d;
        const double first = (1.0 + tau * 0.7) / (tau * (1.0 + tau * 0.7));
        EXPECT_NEAR(s - first, radius_lower_bound(1.0, 0.7, 2, d) / tau, 1e-12 * s);
    }
    // delta * sup_bound stays finite as delta -> 0.
    const double small = 1e-10;
    EXPECT_NEAR(small * sup_bound(1.0, 0.7, 2, small), 1.0 / 8 + 1.0 / 32, 1e-8);
}

TEST(MajorantChain, TrivialSeeds)
{
    const Spectrum spec({1.0, kPhi});
    const auto zero = verify_majorant_chain(FormalVectorField(spec.lambda(), 5), spec, 5, 1.0, {0.0, 1.0});
    EXPECT_TRUE(zero.holds());
    EXPECT_EQ(zero.worst_ratio, 0.0);
    EXPECT_FALSE(zero.sup_bound[0].has_value());
    ASSERT_TRUE(zero.sup_bound[1].has_value());
    FormalVectorField one(spec.lambda(), 5);
    one.set(1, mi({1, 2}), {0.3, 0.4});
    const auto cert = verify_majorant_chain(one, spec, 5, 1.0, {0.0, 0.5, 3.0});
    EXPECT_TRUE(cert.holds());
    EXPECT_DOUBLE_EQ(cert.norm_u, 0.5);
    EXPECT_GT(cert.worst_ratio, 0.0);
    EXPECT_LE(cert.worst_ratio, 1.0);
}

TEST(MajorantChain, DeclaredNormBelowBoundIsRejected)
{
    const Spectrum spec({1.0, kPhi});
    FormalVectorField one(spec.lambda(), 4);
    one.set(0, mi({2, 0}), 1.0);
    EXPECT_THROW(verify_majorant_chain(one, spec, 4, 1.0, {1.0}, 0.5), PreconditionError);
}

TEST(MajorantChain, HoldsAcrossCorpus)
{
    int checked = 0;
    for (const auto& doc : oracle::corpus()) {
        const double rho = doc.rho.value_or(1.0);
        const auto cert = verify_majorant_chain(doc.field, doc.spectrum(), doc.field.degree_cap(), rho,
                                                {0.0, 0.25, 1.0, 4.0, 20.0}, doc.norm_hint);
        EXPECT_TRUE(cert.holds()) << "seed with lambda[0] = " << doc.field.lambda()[0] << ", "
                                  << cert.violations.size() << " violations";
        EXPECT_EQ(cert.radius_bound.size(), 5u);
        ++checked;
    }
    EXPECT_EQ(checked, 20);
}
