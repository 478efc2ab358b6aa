#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normflow/error.hpp"
#include "normflow/flow.hpp"
#include "normflow/multi_index.hpp"
#include "normflow/series.hpp"

namespace normflow {

/// |F_k^m| <= G_k^m for every slot; G must have nonnegative real coefficients.
inline bool majorizes(const FormalVectorField& F, const FormalVectorField& G)
{
    require(F.dim() == G.dim(), "majorizes: dimension mismatch");
    G.for_each([](int, const MultiIndex&, const Complex& c) {
        require(c.imag() == 0.0 && c.real() >= 0.0, "majorizes: majorant must have nonnegative real coefficients");
    });
    bool ok = true;
    F.for_each([&](int m, const MultiIndex& k, const Complex& c) { ok = ok && std::abs(c) <= G.coeff(m, k).real(); });
    return ok;
}

/// Field of coefficient moduli.
inline FormalVectorField abs_field(const FormalVectorField& F)
{
    FormalVectorField out = FormalVectorField::zero(F.dim(), F.degree_cap());
    F.for_each([&](int m, const MultiIndex& k, const Complex& c) { out.set(m, k, std::abs(c)); });
    return out;
}

/// c * rho^{-|k|}
inline double cauchy_bound(double c, double rho, const MultiIndex& k)
{
    require(rho > 0.0, "cauchy_bound: rho must be positive");
    require(c >= 0.0, "cauchy_bound: c must be nonnegative");
    return c * std::pow(rho, -k.order());
}

/// Scalar model f(zeta) = a zeta^2 / (b - zeta) and its transport
/// F = f(zeta + tau F), tau = 4 n delta.
struct BurgersModel {
    double a = 0.0;
    double b = 1.0;
    int n = 1;
    double tau = 0.0;

    /// a = ||u||_rho / rho, b = rho, tau = 4 n delta.
    static BurgersModel from(double rho, double norm_u, int n, double delta)
    {
        require(rho > 0.0 && norm_u >= 0.0 && n >= 1 && delta >= 0.0, "BurgersModel: invalid parameters");
        return {norm_u / rho, rho, n, 4.0 * n * delta};
    }

    Complex f(Complex zeta) const { return a * zeta * zeta / (b - zeta); }
};

/// Taylor coefficients of a zeta^2/(b - zeta): index j holds a b^{1-j} for j >= 2.
inline std::vector<double> majorant_f_coeffs(const BurgersModel& model, int up_to_degree)
{
    require(up_to_degree >= 2, "majorant_f_coeffs: degree must be >= 2");
    std::vector<double> c(static_cast<std::size_t>(up_to_degree + 1), 0.0);
    double v = model.a / model.b;
    for (int j = 2; j <= up_to_degree; ++j) {
        c[static_cast<std::size_t>(j)] = v;
        v /= model.b;
    }
    return c;
}

/// (zeta_1, zeta_2) = b / (1 + 2 a tau +- 2 sqrt(a tau (1 + a tau))); zeta_1 is the smaller.
inline std::pair<double, double> branch_points(const BurgersModel& m)
{
    require(m.a >= 0.0 && m.b >= 0.0 && m.tau >= 0.0, "branch_points: parameters must be nonnegative");
    const double at = m.a * m.tau;
    const double root = 2.0 * std::sqrt(at * (1.0 + at));
    return {m.b / (1.0 + 2.0 * at + root), m.b / (1.0 + 2.0 * at - root)};
}

/// d(tau) = b / (2 (1 + 2 a tau)): a disc strictly inside the branch points.
inline double safe_disc_radius(const BurgersModel& m) { return m.b / (2.0 * (1.0 + 2.0 * m.a * m.tau)); }

/// Principal branch of the closed-form solution, written as
/// 2 a zeta^2 / (B + sqrt(R)) to avoid cancellation near zeta = 0.
inline Complex burgers_solution(const BurgersModel& m, Complex zeta)
{
    if (m.tau == 0.0) {
        require(std::abs(zeta) < m.b, "burgers_solution: zeta outside the disc |zeta| < b");
        return m.f(zeta);
    }
    require(std::abs(zeta) < branch_points(m).first, "burgers_solution: zeta at or beyond the branch points");
    if (zeta == Complex(0.0)) return 0.0;
    const double at = m.a * m.tau;
    const Complex B = m.b - zeta - 2.0 * at * zeta;
    const Complex R = B * B - 4.0 * at * (1.0 + at) * zeta * zeta;
    Complex sq = std::sqrt(R);
    if ((sq * std::conj(B)).real() < 0.0) sq = -sq;
    return 2.0 * m.a * zeta * zeta / (B + sq);
}

/// |F - f(zeta + tau F)| / max(1, |F|).
inline double burgers_implicit_residual(const BurgersModel& m, Complex zeta)
{
    const Complex F = burgers_solution(m, zeta);
    return std::abs(F - m.f(zeta + m.tau * F)) / std::max(1.0, std::abs(F));
}

/// Taylor coefficients of F in zeta up to degree cap, by fixed-point
/// iteration of F = f(zeta + tau F) on truncated series.
inline std::vector<double> burgers_series(const BurgersModel& m, int cap)
{
    require(cap >= 2, "burgers_series: cap must be >= 2");
    const auto N = static_cast<std::size_t>(cap + 1);
    const std::vector<double> fc = majorant_f_coeffs(m, cap);
    std::vector<double> F(N, 0.0);
    for (int it = 0; it <= cap; ++it) {
        std::vector<double> w(N, 0.0);
        w[1] = 1.0;
        for (std::size_t j = 0; j < N; ++j) w[j] += m.tau * F[j];
        std::vector<double> next(N, 0.0);
        std::vector<double> power = w;                 // w^1
        std::vector<double> sq(N, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; i + j < N; ++j) sq[i + j] += w[i] * w[j];
        power = sq;                                    // w^2
        for (int j = 2; j <= cap; ++j) {
            for (std::size_t i = 0; i < N; ++i) next[i] += fc[static_cast<std::size_t>(j)] * power[i];
            std::vector<double> p2(N, 0.0);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t l = 0; i + l < N; ++l) p2[i + l] += power[i] * w[l];
            power = std::move(p2);
        }
        F = std::move(next);
    }
    return F;
}

/// rho^2 / (2 n (rho + 8 ||u|| n delta))
inline double radius_lower_bound(double rho, double norm_u, int n, double delta)
{
    require(rho > 0.0 && norm_u >= 0.0 && n >= 1 && delta >= 0.0, "radius_lower_bound: invalid parameters");
    const double nd = static_cast<double>(n);
    return rho * rho / (2.0 * nd * (rho + 8.0 * norm_u * nd * delta));
}

/// (rho^2 + 4 n delta N) / (4 n delta (rho + 4 n delta N)) + rho^2 / (8 n^2 delta (rho + 8 n delta N)).
/// Unbounded as delta -> 0, so delta = 0 is rejected.
inline double sup_bound(double rho, double norm_u, int n, double delta)
{
    require(rho > 0.0 && norm_u >= 0.0 && n >= 1, "sup_bound: invalid parameters");
    require(delta > 0.0, "sup_bound: defined for delta > 0 only (the bound diverges as delta -> 0)");
    const double nd = static_cast<double>(n);
    const double t = 4.0 * nd * delta;
    return (rho * rho + t * norm_u) / (t * (rho + t * norm_u)) +
           rho * rho / (8.0 * nd * nd * delta * (rho + 2.0 * t * norm_u));
}

struct ChainViolation {
    int m = 0;
    MultiIndex k;
    double delta = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

struct MajorantCertificate {
    double rho = 0.0;
    double norm_u = 0.0;
    int n = 1;
    std::vector<double> deltas;
    std::vector<double> radius_bound;                 ///< rho^2 / (2 n (rho + 8 N n delta)), per delta
    std::vector<std::optional<double>> sup_bound;     ///< per delta; empty at delta = 0
    double worst_ratio = 0.0;                         ///< max |U| / bound over slots and deltas
    std::vector<ChainViolation> violations;
    bool holds() const noexcept { return violations.empty(); }
};

/// Flows u_hat exactly and checks every reduced-gauge slot against the
/// multinomial lift of the Burgers series: |U_k^m(delta)| <= multinomial(k) [zeta^|k|] F.
/// norm_u defaults to sup_norm_bound(u_hat, rho).
inline MajorantCertificate verify_majorant_chain(const FormalVectorField& u_hat, const Spectrum& spec, int cap,
                                                 double rho, const std::vector<double>& delta_grid,
                                                 std::optional<double> norm_u = std::nullopt)
{
    require(rho > 0.0, "verify_majorant_chain: rho must be positive");
    MajorantCertificate cert;
    cert.rho = rho;
    cert.norm_u = norm_u ? *norm_u : sup_norm_bound(u_hat, rho);
    require(cert.norm_u >= sup_norm_bound(u_hat, rho) * (1.0 - 1e-15),
            "verify_majorant_chain: declared norm is below the coefficient-sum bound");
    const int n = spec.dim();
    cert.n = n;
    const FlowState st = normalize_exact(u_hat, spec, cap);
    for (double delta : delta_grid) {
        require(delta >= 0.0 && std::isfinite(delta), "verify_majorant_chain: grid values must be finite and >= 0");
        cert.deltas.push_back(delta);
        cert.radius_bound.push_back(radius_lower_bound(rho, cert.norm_u, n, delta));
        cert.sup_bound.push_back(delta > 0.0 ? std::optional<double>(sup_bound(rho, cert.norm_u, n, delta)) : std::nullopt);
        const std::vector<double> series = burgers_series(BurgersModel::from(rho, cert.norm_u, n, delta), cap);
        for (const auto& [slot, s] : st.slots()) {
            const double v = std::abs(st.reduced_value(slot.first, slot.second, delta));
            const double bound = multinomial(slot.second) * series[static_cast<std::size_t>(slot.second.order())];
            if (bound > 0.0) cert.worst_ratio = std::max(cert.worst_ratio, v / bound);
            if (v > bound) cert.violations.push_back({slot.first, slot.second, delta, v, bound});
        }
    }
    return cert;
}

} // namespace normflow
