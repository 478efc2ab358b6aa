#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <unordered_map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normflow/error.hpp"
#include "normflow/multi_index.hpp"

namespace normflow {

using Complex = std::complex<double>;

/// Coefficients below this magnitude are dropped after arithmetic
/// (subnormal guard). No other rounding is applied to coefficients.
inline constexpr double kZeroThreshold = 1e-300;

/// Sparse scalar polynomial z^k -> coefficient, lexicographic in k.
using Poly = std::map<MultiIndex, Complex>;

namespace detail {

inline bool negligible(const Complex& c) noexcept { return std::abs(c) < kZeroThreshold; }

inline void accumulate(Poly& p, const MultiIndex& k, const Complex& c)
{
    auto [it, inserted] = p.try_emplace(k, c);
    if (!inserted) it->second += c;
}

inline void prune(Poly& p)
{
    std::erase_if(p, [](const auto& kv) { return negligible(kv.second); });
}

inline Poly poly_mul(const Poly& a, const Poly& b, int cap)
{
    std::unordered_map<MultiIndex, Complex> acc;
    for (const auto& [ka, ca] : a) {
        for (const auto& [kb, cb] : b) {
            if (ka.order() + kb.order() > cap) continue;
            acc[ka + kb] += ca * cb;
        }
    }
    Poly out(acc.begin(), acc.end());
    prune(out);
    return out;
}

inline Poly poly_add(const Poly& a, const Poly& b, const Complex& scale_b = 1.0)
{
    Poly out = a;
    for (const auto& [k, c] : b) accumulate(out, k, scale_b * c);
    prune(out);
    return out;
}

inline Poly poly_derivative(const Poly& p, int j)
{
    Poly out;
    for (const auto& [k, c] : p) {
        MultiIndex km;
        if (k.try_decrement(j, km)) out.emplace(km, c * static_cast<double>(k[j]));
    }
    return out;
}

inline Poly poly_truncate(const Poly& p, int cap)
{
    Poly out;
    for (const auto& [k, c] : p)
        if (k.order() <= cap) out.emplace(k, c);
    return out;
}

inline Complex poly_eval(const Poly& p, std::span<const Complex> z)
{
    Complex s = 0.0;
    for (const auto& [k, c] : p) {
        Complex term = c;
        for (int j = 0; j < k.dim(); ++j)
            for (int e = 0; e < k[j]; ++e) term *= z[static_cast<std::size_t>(j)];
        s += term;
    }
    return s;
}

/// Memoized products y^k = prod_j y_j^{k_j}, truncated at cap.
class PowerCache {
public:
    PowerCache(const std::vector<Poly>& y, int cap) : y_(y), cap_(cap) {}

    const Poly& power(const MultiIndex& k)
    {
        if (auto it = cache_.find(k); it != cache_.end()) return it->second;
        Poly result;
        int last = -1;
        for (int j = k.dim() - 1; j >= 0; --j) {
            if (k[j] > 0) {
                last = j;
                break;
            }
        }
        if (last < 0) {
            result.emplace(MultiIndex(k.dim()), Complex(1.0));
        } else {
            MultiIndex prev;
            k.try_decrement(last, prev);
            result = poly_mul(power(prev), y_[static_cast<std::size_t>(last)], cap_);
        }
        return cache_.emplace(k, std::move(result)).first->second;
    }

private:
    const std::vector<Poly>& y_;
    int cap_;
    std::unordered_map<MultiIndex, Poly> cache_;
};

/// p(y(z)) truncated at cap, for a polynomial p and a vector of polynomials y.
inline Poly poly_compose(const Poly& p, PowerCache& powers, int cap)
{
    Poly out;
    for (const auto& [k, c] : p) {
        for (const auto& [kk, cc] : powers.power(k)) {
            if (kk.order() <= cap) accumulate(out, kk, c * cc);
        }
    }
    prune(out);
    return out;
}

} // namespace detail

/// Vector field  Lambda z + sum U_k^m z^k e_m  with diagonal linear part and
/// nonlinear terms of degree 2..degree_cap. Components are 0-based here; the
/// document format and reports use 1-based component numbers.
///
/// Storage is canonical: no exactly-zero (below kZeroThreshold) coefficient
/// is ever stored, and iteration runs over (m, k) lexicographically.
class FormalVectorField {
public:
    FormalVectorField() = default;

    FormalVectorField(std::vector<Complex> lambda, int degree_cap)
        : lambda_(std::move(lambda)), cap_(degree_cap), comps_(lambda_.size())
    {
        require(!lambda_.empty() && static_cast<int>(lambda_.size()) <= MultiIndex::kMaxDim,
                "FormalVectorField: dimension must be in [1, 8]");
        require(degree_cap >= 2 && degree_cap <= MultiIndex::kMaxExponent,
                "FormalVectorField: degree cap must be in [2, 255]");
        for (const auto& l : lambda_)
            require(std::isfinite(l.real()) && std::isfinite(l.imag()),
                    "FormalVectorField: non-finite eigenvalue");
    }

    static FormalVectorField zero(int dim, int degree_cap)
    {
        return FormalVectorField(std::vector<Complex>(static_cast<std::size_t>(dim)), degree_cap);
    }

    int dim() const noexcept { return static_cast<int>(lambda_.size()); }
    int degree_cap() const noexcept { return cap_; }
    const std::vector<Complex>& lambda() const noexcept { return lambda_; }
    const Poly& component(int m) const { return comps_.at(static_cast<std::size_t>(m)); }

    Complex coeff(int m, const MultiIndex& k) const
    {
        const auto& c = component(m);
        auto it = c.find(k);
        return it == c.end() ? Complex(0.0) : it->second;
    }

    /// Stores c at slot (m, k), replacing any previous value. Terms above the
    /// cap are silently dropped (eager truncation).
    void set(int m, const MultiIndex& k, const Complex& c)
    {
        check_slot(m, k);
        require(std::isfinite(c.real()) && std::isfinite(c.imag()),
                "FormalVectorField: non-finite coefficient");
        if (k.order() > cap_) return;
        auto& comp = comps_[static_cast<std::size_t>(m)];
        if (detail::negligible(c))
            comp.erase(k);
        else
            comp[k] = c;
    }

    void add_to(int m, const MultiIndex& k, const Complex& c) { set(m, k, coeff(m, k) + c); }

    std::size_t size() const noexcept
    {
        std::size_t s = 0;
        for (const auto& c : comps_) s += c.size();
        return s;
    }

    bool empty() const noexcept { return size() == 0; }

    int max_degree() const noexcept
    {
        int d = 0;
        for (const auto& c : comps_)
            for (const auto& kv : c) d = std::max(d, kv.first.order());
        return d;
    }

    /// Visits every stored term as f(m, k, c) in lexicographic (m, k) order.
    template <class F>
    void for_each(F&& f) const
    {
        for (int m = 0; m < dim(); ++m)
            for (const auto& [k, c] : comps_[static_cast<std::size_t>(m)]) f(m, k, c);
    }

    /// Full field (including the linear part) evaluated at a point.
    std::vector<Complex> evaluate(std::span<const Complex> z) const
    {
        std::vector<Complex> out(static_cast<std::size_t>(dim()));
        for (int m = 0; m < dim(); ++m)
            out[static_cast<std::size_t>(m)] =
                lambda_[static_cast<std::size_t>(m)] * z[static_cast<std::size_t>(m)] +
                detail::poly_eval(component(m), z);
        return out;
    }

    friend bool operator==(const FormalVectorField& a, const FormalVectorField& b)
    {
        return a.lambda_ == b.lambda_ && a.cap_ == b.cap_ && a.comps_ == b.comps_;
    }

private:
    void check_slot(int m, const MultiIndex& k) const
    {
        require(m >= 0 && m < dim(), "FormalVectorField: component out of range");
        require(k.dim() == dim(), "FormalVectorField: multi-index dimension mismatch");
        require(k.order() >= 2, "FormalVectorField: nonlinear terms need |k| >= 2");
    }

    std::vector<Complex> lambda_;
    int cap_ = 2;
    std::vector<Poly> comps_;
};

/// Near-identity polynomial map  z -> z + sum Phi_k^m z^k,  |k| >= 2.
class SeriesMap {
public:
    SeriesMap() = default;

    SeriesMap(int dim, int degree_cap) : cap_(degree_cap), comps_(static_cast<std::size_t>(dim))
    {
        require(dim >= 1 && dim <= MultiIndex::kMaxDim, "SeriesMap: dimension must be in [1, 8]");
        require(degree_cap >= 2, "SeriesMap: degree cap must be >= 2");
    }

    static SeriesMap identity(int dim, int degree_cap) { return SeriesMap(dim, degree_cap); }

    int dim() const noexcept { return static_cast<int>(comps_.size()); }
    int degree_cap() const noexcept { return cap_; }
    const Poly& component(int m) const { return comps_.at(static_cast<std::size_t>(m)); }
    bool is_identity() const noexcept
    {
        return std::all_of(comps_.begin(), comps_.end(), [](const Poly& p) { return p.empty(); });
    }

    Complex coeff(int m, const MultiIndex& k) const
    {
        const auto& c = component(m);
        auto it = c.find(k);
        return it == c.end() ? Complex(0.0) : it->second;
    }

    void set(int m, const MultiIndex& k, const Complex& c)
    {
        require(m >= 0 && m < dim(), "SeriesMap: component out of range");
        require(k.dim() == dim() && k.order() >= 2, "SeriesMap: terms need matching dimension and |k| >= 2");
        if (k.order() > cap_) return;
        auto& comp = comps_[static_cast<std::size_t>(m)];
        if (detail::negligible(c))
            comp.erase(k);
        else
            comp[k] = c;
    }

    template <class F>
    void for_each(F&& f) const
    {
        for (int m = 0; m < dim(); ++m)
            for (const auto& [k, c] : comps_[static_cast<std::size_t>(m)]) f(m, k, c);
    }

    std::vector<Complex> apply(std::span<const Complex> z) const
    {
        std::vector<Complex> out(z.begin(), z.end());
        for (int m = 0; m < dim(); ++m) out[static_cast<std::size_t>(m)] += detail::poly_eval(component(m), z);
        return out;
    }

    /// Jacobian matrix (row-major, dim x dim) at z.
    std::vector<Complex> jacobian(std::span<const Complex> z) const
    {
        const auto n = static_cast<std::size_t>(dim());
        std::vector<Complex> jac(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            jac[i * n + i] = 1.0;
            for (int j = 0; j < dim(); ++j)
                jac[i * n + static_cast<std::size_t>(j)] +=
                    detail::poly_eval(detail::poly_derivative(comps_[i], j), z);
        }
        return jac;
    }

    /// Components z_m + Phi_m as general polynomials (degree 1 included).
    std::vector<Poly> as_polys() const
    {
        std::vector<Poly> y = comps_;
        for (int m = 0; m < dim(); ++m) y[static_cast<std::size_t>(m)][MultiIndex::unit(dim(), m)] += 1.0;
        return y;
    }

    friend bool operator==(const SeriesMap& a, const SeriesMap& b)
    {
        return a.cap_ == b.cap_ && a.comps_ == b.comps_;
    }

private:
    int cap_ = 2;
    std::vector<Poly> comps_;
};

// ---------------------------------------------------------------------------
// Linear operations

inline void require_same_dim(int a, int b, const char* op)
{
    require(a == b, std::string(op) + ": dimension mismatch");
}

inline FormalVectorField truncate(const FormalVectorField& u, int cap)
{
    FormalVectorField out(u.lambda(), cap);
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (k.order() <= cap) out.set(m, k, c);
    });
    return out;
}

inline FormalVectorField scale(const FormalVectorField& u, const Complex& s)
{
    std::vector<Complex> lam = u.lambda();
    for (auto& l : lam) l *= s;
    FormalVectorField out(std::move(lam), u.degree_cap());
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) { out.set(m, k, s * c); });
    return out;
}

inline FormalVectorField add(const FormalVectorField& u, const FormalVectorField& v, int cap)
{
    require_same_dim(u.dim(), v.dim(), "add");
    std::vector<Complex> lam(static_cast<std::size_t>(u.dim()));
    for (std::size_t j = 0; j < lam.size(); ++j) lam[j] = u.lambda()[j] + v.lambda()[j];
    FormalVectorField out(std::move(lam), cap);
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (k.order() <= cap) out.add_to(m, k, c);
    });
    v.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (k.order() <= cap) out.add_to(m, k, c);
    });
    return out;
}

/// Largest coefficient difference over all slots and the linear part.
inline double max_abs_difference(const FormalVectorField& u, const FormalVectorField& v)
{
    require_same_dim(u.dim(), v.dim(), "max_abs_difference");
    double worst = 0.0;
    for (int j = 0; j < u.dim(); ++j)
        worst = std::max(worst, std::abs(u.lambda()[static_cast<std::size_t>(j)] - v.lambda()[static_cast<std::size_t>(j)]));
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) { worst = std::max(worst, std::abs(c - v.coeff(m, k))); });
    v.for_each([&](int m, const MultiIndex& k, const Complex& c) { worst = std::max(worst, std::abs(c - u.coeff(m, k))); });
    return worst;
}

// ---------------------------------------------------------------------------
// Lie bracket

/// [u, v]_i = sum_j (u_j dv_i/dz_j - v_j du_i/dz_j) of the full fields
/// (linear parts included), truncated at cap. Two diagonal linear parts
/// commute, so the result has zero linear part.
inline FormalVectorField lie_bracket(const FormalVectorField& u, const FormalVectorField& v, int cap)
{
    require_same_dim(u.dim(), v.dim(), "lie_bracket");
    const int n = u.dim();
    std::vector<std::unordered_map<MultiIndex, Complex>> acc(static_cast<std::size_t>(n));

    auto inner = [n](const std::vector<Complex>& lam, const MultiIndex& k) {
        Complex s = 0.0;
        for (int j = 0; j < n; ++j) s += lam[static_cast<std::size_t>(j)] * static_cast<double>(k[j]);
        return s;
    };

    // Linear part of one field against nonlinear terms of the other.
    v.for_each([&](int i, const MultiIndex& b, const Complex& c) {
        if (b.order() > cap) return;
        acc[static_cast<std::size_t>(i)][b] += (inner(u.lambda(), b) - u.lambda()[static_cast<std::size_t>(i)]) * c;
    });
    u.for_each([&](int i, const MultiIndex& a, const Complex& c) {
        if (a.order() > cap) return;
        acc[static_cast<std::size_t>(i)][a] -= (inner(v.lambda(), a) - v.lambda()[static_cast<std::size_t>(i)]) * c;
    });

    // Nonlinear against nonlinear: u term c1 z^a e_j, v term c2 z^b e_i.
    u.for_each([&](int j, const MultiIndex& a, const Complex& c1) {
        v.for_each([&](int i, const MultiIndex& b, const Complex& c2) {
            if (a.order() + b.order() - 1 > cap) return;
            MultiIndex t;
            // u_j d_j v_i
            if (b.try_decrement(j, t))
                acc[static_cast<std::size_t>(i)][t + a] += c1 * c2 * static_cast<double>(b[j]);
            // - v_i d_i u_j
            if (a.try_decrement(i, t))
                acc[static_cast<std::size_t>(j)][t + b] -= c1 * c2 * static_cast<double>(a[i]);
        });
    });

    FormalVectorField out = FormalVectorField::zero(n, cap);
    for (int m = 0; m < n; ++m) {
        Poly sorted(acc[static_cast<std::size_t>(m)].begin(), acc[static_cast<std::size_t>(m)].end());
        for (const auto& [k, c] : sorted) out.set(m, k, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Composition, pushforward, inversion

namespace detail {

inline std::vector<Poly> field_as_polys(const FormalVectorField& u)
{
    std::vector<Poly> out(static_cast<std::size_t>(u.dim()));
    for (int m = 0; m < u.dim(); ++m) {
        out[static_cast<std::size_t>(m)] = u.component(m);
        const Complex l = u.lambda()[static_cast<std::size_t>(m)];
        if (l != Complex(0.0)) out[static_cast<std::size_t>(m)][MultiIndex::unit(u.dim(), m)] += l;
    }
    return out;
}

/// Keeps the degree >= 2 part of polynomial components as a field with the
/// given linear part. Degree-0/1 parts are the caller's responsibility.
inline FormalVectorField field_from_polys(const std::vector<Poly>& p, const std::vector<Complex>& lambda, int cap)
{
    FormalVectorField out(lambda, cap);
    for (int m = 0; m < out.dim(); ++m)
        for (const auto& [k, c] : p[static_cast<std::size_t>(m)])
            if (k.order() >= 2 && k.order() <= cap) out.set(m, k, c);
    return out;
}

inline std::vector<Poly> compose_all(const std::vector<Poly>& f, const SeriesMap& phi, int cap)
{
    const std::vector<Poly> y = phi.as_polys();
    PowerCache powers(y, cap);
    std::vector<Poly> out(f.size());
    for (std::size_t m = 0; m < f.size(); ++m) out[m] = poly_compose(f[m], powers, cap);
    return out;
}

} // namespace detail

/// u o phi, truncated at cap. The linear part of u is carried through, so the
/// result is Lambda z + (Lambda Phi + u_nl(z + Phi)).
inline FormalVectorField substitute(const FormalVectorField& u, const SeriesMap& phi, int cap)
{
    require_same_dim(u.dim(), phi.dim(), "substitute");
    if (phi.is_identity()) return truncate(u, cap);
    auto composed = detail::compose_all(detail::field_as_polys(u), phi, cap);
    return detail::field_from_polys(composed, u.lambda(), cap);
}

/// phi o chi (apply chi first), truncated at cap.
inline SeriesMap compose(const SeriesMap& phi, const SeriesMap& chi, int cap)
{
    require_same_dim(phi.dim(), chi.dim(), "compose");
    std::vector<Poly> phi_nl(static_cast<std::size_t>(phi.dim()));
    for (int m = 0; m < phi.dim(); ++m) phi_nl[static_cast<std::size_t>(m)] = phi.component(m);
    auto composed = detail::compose_all(phi_nl, chi, cap);
    SeriesMap out(phi.dim(), cap);
    for (int m = 0; m < phi.dim(); ++m) {
        Poly total = detail::poly_add(composed[static_cast<std::size_t>(m)], chi.component(m));
        for (const auto& [k, c] : total)
            if (k.order() >= 2 && k.order() <= cap) out.set(m, k, c);
    }
    return out;
}

/// Formal inverse psi with phi(psi(z)) = z to degree cap, by the fixed point
/// Psi = -Phi(z + Psi); each sweep settles one more degree.
inline SeriesMap inverse(const SeriesMap& phi, int cap)
{
    std::vector<Poly> phi_nl(static_cast<std::size_t>(phi.dim()));
    for (int m = 0; m < phi.dim(); ++m) phi_nl[static_cast<std::size_t>(m)] = phi.component(m);
    SeriesMap psi(phi.dim(), cap);
    for (int sweep = 2; sweep <= cap; ++sweep) {
        auto composed = detail::compose_all(phi_nl, psi, cap);
        SeriesMap next(phi.dim(), cap);
        for (int m = 0; m < phi.dim(); ++m)
            for (const auto& [k, c] : composed[static_cast<std::size_t>(m)])
                if (k.order() >= 2) next.set(m, k, -c);
        psi = std::move(next);
    }
    return psi;
}

/// The field w with w(phi(z)) = Dphi(z) u(z), to degree cap.
inline FormalVectorField pushforward(const SeriesMap& phi, const FormalVectorField& u, int cap)
{
    require_same_dim(u.dim(), phi.dim(), "pushforward");
    if (phi.is_identity()) return truncate(u, cap);
    const int n = u.dim();
    const auto uf = detail::field_as_polys(u);
    // Dphi . u = u + DPhi . u
    std::vector<Poly> pushed = uf;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Poly d = detail::poly_derivative(phi.component(i), j);
            if (d.empty()) continue;
            Poly prod = detail::poly_mul(d, uf[static_cast<std::size_t>(j)], cap);
            pushed[static_cast<std::size_t>(i)] = detail::poly_add(pushed[static_cast<std::size_t>(i)], prod);
        }
    }
    const SeriesMap inv = inverse(phi, cap);
    auto composed = detail::compose_all(pushed, inv, cap);
    return detail::field_from_polys(composed, u.lambda(), cap);
}

// ---------------------------------------------------------------------------
// Norm estimate

/// max_m sum_k |U_k^m| rho^|k|: an upper estimate of the sup norm of the
/// nonlinear part on the polydisk of radius rho.
inline double sup_norm_bound(const FormalVectorField& u, double rho)
{
    require(rho > 0.0, "sup_norm_bound: rho must be positive");
    double best = 0.0;
    for (int m = 0; m < u.dim(); ++m) {
        double s = 0.0;
        for (const auto& [k, c] : u.component(m)) s += std::abs(c) * std::pow(rho, k.order());
        best = std::max(best, s);
    }
    return best;
}

} // namespace normflow
