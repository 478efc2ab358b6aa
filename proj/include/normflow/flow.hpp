#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normflow/error.hpp"
#include "normflow/exp_polynomial.hpp"
#include "normflow/multi_index.hpp"
#include "normflow/parallel.hpp"
#include "normflow/resonance.hpp"
#include "normflow/series.hpp"

namespace normflow {

/// Slot (m, k) of a vector field, m 0-based. Ordered by m, then k.
using Slot = std::pair<int, MultiIndex>;

/// e^{-i arg d} for d != 0.
inline Complex unit_phase(const Complex& d) { return std::conj(d) / std::abs(d); }

/// |a + b| - |a| - |b| (never positive).
inline double t_shift(const Complex& a, const Complex& b) { return std::abs(a + b) - std::abs(a) - std::abs(b); }

/// (xi u)^m = -sum over nonresonant slots of e^{-i arg divisor} U_k^m z^k.
/// The diagonal linear part is resonant, so the result has zero linear part.
inline FormalVectorField xi_op(const FormalVectorField& u, const Spectrum& spec)
{
    require(u.dim() == spec.dim(), "xi_op: dimension mismatch");
    FormalVectorField out = FormalVectorField::zero(u.dim(), u.degree_cap());
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        const Complex d = spec.small_divisor(k, m);
        if (std::abs(d) > spec.tolerance()) out.set(m, k, -unit_phase(d) * c);
    });
    return out;
}

/// Solution of one slot in the reduced gauge: U(delta) = reduced(delta) * exp(-rate * delta).
struct SlotSolution {
    ExpPolynomial reduced;
    double rate = 0.0;       ///< |divisor| when averaged, else 0
    Complex phase = 1.0;     ///< e^{-i arg divisor} when averaged
    bool averaged = false;
    Complex initial = 0.0;   ///< coefficient at delta = 0
};

enum class Gauge { reduced, original };

/// Exact exp-polynomial solution of the averaging flow
///   d/d delta u = -[xi_S u, Lambda z + u]
/// where xi_S rotates and negates the slots of an averaged set S and kills the
/// rest. S is every nonresonant slot for the full flow, or a degree band for a
/// partial step. Coefficients are stored in the reduced gauge.
class FlowState {
public:
    using Predicate = std::function<bool(int, const MultiIndex&)>;

    FlowState(FormalVectorField seed, Spectrum spec, int cap, Predicate averaged)
        : seed_(truncate(seed, cap)), spec_(std::move(spec)), cap_(cap), averaged_(std::move(averaged))
    {
        require(seed_.dim() == spec_.dim(), "FlowState: dimension mismatch between field and spectrum");
        for (int j = 0; j < spec_.dim(); ++j)
            require(seed_.lambda()[static_cast<std::size_t>(j)] == spec_.lambda()[static_cast<std::size_t>(j)],
                    "FlowState: field linear part differs from the spectrum");
    }

    const Spectrum& spectrum() const noexcept { return spec_; }
    const FormalVectorField& seed() const noexcept { return seed_; }
    int degree_cap() const noexcept { return cap_; }
    int solved_through() const noexcept { return solved_; }
    Gauge gauge() const noexcept { return Gauge::reduced; }
    const std::map<Slot, SlotSolution>& slots() const noexcept { return slots_; }

    bool is_averaged(int m, const MultiIndex& k) const { return averaged_(m, k); }

    const SlotSolution* find(int m, const MultiIndex& k) const
    {
        auto it = slots_.find(Slot{m, k});
        return it == slots_.end() ? nullptr : &it->second;
    }

    /// Rate and phase a slot carries under this flow.
    std::pair<double, Complex> slot_gauge(int m, const MultiIndex& k) const
    {
        if (!averaged_(m, k)) return {0.0, 1.0};
        const Complex d = spec_.small_divisor(k, m);
        ensure(std::abs(d) > spec_.tolerance(), "FlowState: averaged slot is resonant");
        return {std::abs(d), unit_phase(d)};
    }

    /// Right-hand side of the reduced equation for slot (m, d); needs every
    /// degree below |d| solved.
    ExpPolynomial reduced_rhs(const MultiIndex& d, int m) const
    {
        require(m >= 0 && m < spec_.dim() && d.dim() == spec_.dim() && d.order() >= 2,
                "reduced_rhs: slot out of range");
        require(solved_ >= d.order() - 1, "reduced_rhs: lower degrees not solved yet");
        return ExpPolynomial::from_terms(rhs_terms(d, m));
    }

    /// Solves degrees solved_through()+1 .. cap.
    void solve()
    {
        const int n = spec_.dim();
        for (int D = std::max(2, solved_ + 1); D <= cap_; ++D) {
            std::vector<Slot> targets;
            for (int m = 0; m < n; ++m)
                for (const auto& d : indices_of_degree(n, D)) targets.emplace_back(m, d);
            std::vector<std::optional<SlotSolution>> solved(targets.size());
            parallel_for(targets.size(), [&](std::size_t i) {
                const auto& [m, d] = targets[i];
                const Complex init = seed_.coeff(m, d);
                ExpPolynomial u;
                try {
                    if (D >= 3) u = ExpPolynomial::from_terms(rhs_terms(d, m)).integral();
                    if (init != Complex(0.0)) u += ExpPolynomial::constant(init);
                } catch (const InvariantError& e) {
                    throw InvariantError("FlowState: slot " + std::to_string(m + 1) + ":" + d.dashed() + ": " + e.what());
                }
                if (u.is_zero()) return;
                const auto [rate, phase] = slot_gauge(m, d);
                if (rate == 0.0)
                    ensure(u.polynomial_order() <= 0,
                           "FlowState: slot " + std::to_string(m + 1) + ":" + d.dashed() +
                               " has a polynomially growing term with zero rate");
                solved[i] = SlotSolution{std::move(u), rate, phase, rate > 0.0, init};
            });
            for (std::size_t i = 0; i < targets.size(); ++i)
                if (solved[i]) slots_.emplace(targets[i], std::move(*solved[i]));
            solved_ = D;
            index_by_component();
        }
    }

    /// Reduced-gauge coefficient at delta.
    Complex reduced_value(int m, const MultiIndex& k, double delta) const
    {
        const SlotSolution* s = find(m, k);
        if (!s) return 0.0;
        if (delta == 0.0) return s->initial;
        return s->reduced.eval(delta);
    }

    /// Original-gauge coefficient at delta (delta = +inf allowed).
    Complex value(int m, const MultiIndex& k, double delta) const
    {
        const SlotSolution* s = find(m, k);
        if (!s) return 0.0;
        return slot_value(*s, delta);
    }

    static Complex slot_value(const SlotSolution& s, double delta)
    {
        if (delta == 0.0) return s.initial;
        if (std::isinf(delta)) return s.rate > 0.0 ? Complex(0.0) : s.reduced.eval_infinity();
        return s.reduced.eval(delta) * std::exp(-s.rate * delta);
    }

    /// The flowed field Lambda z + u_delta in original gauge.
    FormalVectorField at(double delta) const
    {
        require(delta >= 0.0, "FlowState: delta must be >= 0");
        require(solved_ >= cap_, "FlowState: not solved to the cap");
        if (delta == 0.0) return seed_;
        FormalVectorField out(spec_.lambda(), cap_);
        for (const auto& [slot, s] : slots_) out.set(slot.first, slot.second, slot_value(s, delta));
        return out;
    }

    /// Reduced-gauge field (linear part kept).
    FormalVectorField reduced_at(double delta) const
    {
        FormalVectorField out(spec_.lambda(), cap_);
        for (const auto& [slot, s] : slots_) out.set(slot.first, slot.second, reduced_value(slot.first, slot.second, delta));
        return out;
    }

    /// Nonlinear part of the transport equation for the inverse map h = z + H:
    /// dH/d delta = -F - DH.F with F = xi_S u. Returns the exact H per slot.
    std::map<Slot, ExpPolynomial> inverse_map_solution() const
    {
        require(solved_ >= cap_, "FlowState: not solved to the cap");
        const int n = spec_.dim();
        std::map<Slot, ExpPolynomial> H;
        std::vector<std::vector<std::pair<MultiIndex, const ExpPolynomial*>>> h_by_comp(static_cast<std::size_t>(n));
        for (int D = 2; D <= cap_; ++D) {
            std::vector<Slot> targets;
            for (int m = 0; m < n; ++m)
                for (const auto& d : indices_of_degree(n, D)) targets.emplace_back(m, d);
            std::vector<ExpPolynomial> solved(targets.size());
            parallel_for(targets.size(), [&](std::size_t i) {
                const auto& [m, d] = targets[i];
                std::vector<ExpTerm> terms;
                if (const SlotSolution* f = find(m, d); f && f->averaged)
                    for (const auto& t : f->reduced.terms()) terms.push_back({t.nu + f->rate, t.s, f->phase * t.c});
                // -H_k^m d_p (.) F_s^p with F_s^p = -phase_s U_s^p, landing on d = k - e_p + s.
                for (int p = 0; p < n; ++p) {
                    const MultiIndex dp = d.incremented(p);
                    for (const auto& [s, fs] : averaged_by_comp_[static_cast<std::size_t>(p)]) {
                        if (s.order() > D - 1) break;
                        MultiIndex k;
                        if (!dp.try_subtract(s, k) || k.order() < 2 || k[p] == 0) continue;
                        auto hk = H.find(Slot{m, k});
                        if (hk == H.end()) continue;
                        const Complex coef = static_cast<double>(k[p]) * fs->phase;
                        for (const auto& x : hk->second.terms())
                            for (const auto& y : fs->reduced.terms())
                                terms.push_back({x.nu + y.nu + fs->rate, x.s + y.s, coef * x.c * y.c});
                    }
                }
                solved[i] = ExpPolynomial::from_terms(std::move(terms)).integral();
            });
            for (std::size_t i = 0; i < targets.size(); ++i)
                if (!solved[i].is_zero()) H.emplace(targets[i], std::move(solved[i]));
        }
        return H;
    }

private:
    std::vector<ExpTerm> rhs_terms(const MultiIndex& d, int m) const
    {
        const int n = spec_.dim();
        const int D = d.order();
        const double rate_d = slot_gauge(m, d).first;
        std::vector<ExpTerm> terms;
        // Pairs (m, k), (p, s) with k + s - e_p = d contribute
        // k_p U_k^m U_s^p (phase_s [s in S] - phase_k [k in S]).
        for (int p = 0; p < n; ++p) {
            const MultiIndex dp = d.incremented(p);
            for (const auto& [s, xs] : by_comp_[static_cast<std::size_t>(p)]) {
                if (s.order() > D - 1) break;
                MultiIndex k;
                if (!dp.try_subtract(s, k) || k.order() < 2 || k[p] == 0) continue;
                const SlotSolution* xk = find(m, k);
                if (!xk) continue;
                const Complex w = (xs->averaged ? xs->phase : Complex(0.0)) - (xk->averaged ? xk->phase : Complex(0.0));
                if (w == Complex(0.0)) continue;
                const Complex coef = static_cast<double>(k[p]) * w;
                double shift = xk->rate + xs->rate - rate_d;
                ensure(shift > -1e-9 * (1.0 + rate_d), "FlowState: negative rate shift");
                shift = std::max(shift, 0.0);
                for (const auto& x : xk->reduced.terms())
                    for (const auto& y : xs->reduced.terms())
                        terms.push_back({x.nu + y.nu + shift, x.s + y.s, coef * x.c * y.c});
            }
        }
        return terms;
    }

    void index_by_component()
    {
        const auto n = static_cast<std::size_t>(spec_.dim());
        by_comp_.assign(n, {});
        averaged_by_comp_.assign(n, {});
        for (const auto& [slot, s] : slots_) {
            by_comp_[static_cast<std::size_t>(slot.first)].emplace_back(slot.second, &s);
            if (s.averaged) averaged_by_comp_[static_cast<std::size_t>(slot.first)].emplace_back(slot.second, &s);
        }
        auto by_degree = [](const auto& a, const auto& b) {
            return a.first.order() < b.first.order() || (a.first.order() == b.first.order() && a.first < b.first);
        };
        for (auto& v : by_comp_) std::sort(v.begin(), v.end(), by_degree);
        for (auto& v : averaged_by_comp_) std::sort(v.begin(), v.end(), by_degree);
    }

    FormalVectorField seed_;
    Spectrum spec_;
    int cap_ = 2;
    Predicate averaged_;
    std::map<Slot, SlotSolution> slots_;
    std::vector<std::vector<std::pair<MultiIndex, const SlotSolution*>>> by_comp_;
    std::vector<std::vector<std::pair<MultiIndex, const SlotSolution*>>> averaged_by_comp_;
    int solved_ = 1;
};

/// Full continuous-averaging flow: every nonresonant slot is averaged.
inline FlowState normalize_exact(const FormalVectorField& u_hat, const Spectrum& spec, int cap)
{
    require(cap >= 2, "normalize_exact: cap must be >= 2");
    FlowState state(u_hat, spec, cap, [spec](int m, const MultiIndex& k) { return !spec.is_resonant(k, m); });
    state.solve();
    return state;
}

/// The delta -> inf limit; its support lies in the resonant slots.
inline FormalVectorField normal_form_limit(const FlowState& state)
{
    FormalVectorField out = state.at(std::numeric_limits<double>::infinity());
    out.for_each([&](int m, const MultiIndex& k, const Complex&) {
        ensure(state.spectrum().is_resonant(k, m),
               "normal_form_limit: nonresonant slot " + std::to_string(m + 1) + ":" + k.dashed() + " survived");
    });
    return out;
}

/// Inverse map h with h(z_delta) = z_0, evaluated at delta (or +inf).
inline SeriesMap inverse_change_of_variables(const FlowState& state, double delta)
{
    SeriesMap h(state.spectrum().dim(), state.degree_cap());
    if (delta == 0.0) return h;
    for (const auto& [slot, poly] : state.inverse_map_solution())
        h.set(slot.first, slot.second, std::isinf(delta) ? poly.eval_infinity() : poly.eval(delta));
    return h;
}

/// Near-identity map g with pushforward(g, Lambda z + u_hat) = Lambda z + u_delta.
inline SeriesMap change_of_variables(const FlowState& state, double delta, int cap)
{
    require(cap <= state.degree_cap(), "change_of_variables: cap exceeds the solved cap");
    const SeriesMap h = inverse_change_of_variables(state, delta);
    return inverse(h, cap);
}

// ---------------------------------------------------------------------------
// Fixed-step fourth-order integration of the reduced equation. The right-hand
// side is built from the generic bracket, so it shares no code with the
// exact solver's convolution.

struct NumericTrajectory {
    std::vector<Slot> slots;
    std::vector<double> delta;
    std::vector<std::vector<Complex>> reduced; ///< reduced[step][slot]
    std::vector<double> rate;

    Complex reduced_value(std::size_t step, int m, const MultiIndex& k) const
    {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].first == m && slots[i].second == k) return reduced[step][i];
        return 0.0;
    }
};

inline NumericTrajectory normalize_numeric(const FormalVectorField& u_hat, const Spectrum& spec, int cap,
                                           double delta_max, double step)
{
    require(step > 0.0 && delta_max > 0.0, "normalize_numeric: step and delta_max must be positive");
    const int n = spec.dim();
    NumericTrajectory tr;
    std::vector<Complex> phase;
    for (int m = 0; m < n; ++m)
        for (int D = 2; D <= cap; ++D)
            for (const auto& k : indices_of_degree(n, D)) {
                tr.slots.emplace_back(m, k);
                const Complex d = spec.small_divisor(k, m);
                const bool avg = std::abs(d) > spec.tolerance();
                tr.rate.push_back(avg ? std::abs(d) : 0.0);
                phase.push_back(avg ? unit_phase(d) : Complex(0.0));
            }
    const std::size_t N = tr.slots.size();

    auto rhs = [&](double t, const std::vector<Complex>& y) {
        FormalVectorField u(spec.lambda(), cap);
        FormalVectorField xu = FormalVectorField::zero(n, cap);
        for (std::size_t i = 0; i < N; ++i) {
            const Complex U = y[i] * std::exp(-tr.rate[i] * t);
            u.set(tr.slots[i].first, tr.slots[i].second, U);
            xu.set(tr.slots[i].first, tr.slots[i].second, -phase[i] * U);
        }
        const FormalVectorField br = lie_bracket(xu, u, cap);
        std::vector<Complex> dy(N);
        for (std::size_t i = 0; i < N; ++i) {
            const Complex U = y[i] * std::exp(-tr.rate[i] * t);
            const Complex dU = -br.coeff(tr.slots[i].first, tr.slots[i].second);
            dy[i] = (dU + tr.rate[i] * U) * std::exp(tr.rate[i] * t);
        }
        return dy;
    };

    std::vector<Complex> y(N);
    for (std::size_t i = 0; i < N; ++i) y[i] = u_hat.coeff(tr.slots[i].first, tr.slots[i].second);
    const auto steps = static_cast<std::size_t>(std::llround(delta_max / step));
    tr.delta.push_back(0.0);
    tr.reduced.push_back(y);
    auto axpy = [&](const std::vector<Complex>& a, const std::vector<Complex>& b, double s) {
        std::vector<Complex> r(N);
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * step;
        const auto k1 = rhs(t, y);
        const auto k2 = rhs(t + step / 2, axpy(y, k1, step / 2));
        const auto k3 = rhs(t + step / 2, axpy(y, k2, step / 2));
        const auto k4 = rhs(t + step, axpy(y, k3, step));
        for (std::size_t j = 0; j < N; ++j) y[j] += step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        tr.delta.push_back(static_cast<double>(i + 1) * step);
        tr.reduced.push_back(y);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Structural invariance checks

/// Seed without terms of degree <= M keeps every slot of degree <= M at zero.
inline bool check_degree_invariance(const FormalVectorField& u_hat, const Spectrum& spec, int M, int cap)
{
    bool seed_ok = true;
    u_hat.for_each([&](int, const MultiIndex& k, const Complex&) { seed_ok = seed_ok && k.order() > M; });
    require(seed_ok, "check_degree_invariance: seed has terms of degree <= M");
    const FlowState st = normalize_exact(u_hat, spec, cap);
    for (const auto& [slot, s] : st.slots())
        if (slot.second.order() <= M && !s.reduced.is_zero()) return false;
    return true;
}

/// Seed supported on Re<lambda,k> > M keeps every slot with Re<lambda,k> <= M at zero.
inline bool check_spectral_invariance(const FormalVectorField& u_hat, const Spectrum& spec, double M, int cap)
{
    bool seed_ok = true;
    u_hat.for_each([&](int, const MultiIndex& k, const Complex&) { seed_ok = seed_ok && spec.inner(k).real() > M; });
    require(seed_ok, "check_spectral_invariance: seed has terms with Re<lambda,k> <= M");
    const FlowState st = normalize_exact(u_hat, spec, cap);
    for (const auto& [slot, s] : st.slots())
        if (spec.inner(slot.second).real() <= M && !s.reduced.is_zero()) return false;
    return true;
}

/// Image of exponent vector k under the coordinate permutation sigma: (sigma k)_{sigma(j)} = k_j.
inline MultiIndex permute_index(const MultiIndex& k, const std::vector<int>& sigma)
{
    MultiIndex out(k.dim());
    for (int j = 0; j < k.dim(); ++j) out.set(sigma[static_cast<std::size_t>(j)], k[j]);
    return out;
}

namespace detail {
inline bool exp_poly_close(const ExpPolynomial& a, const ExpPolynomial& b, double rel)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.terms()[i];
        const auto& y = b.terms()[i];
        if (x.s != y.s || std::abs(x.nu - y.nu) > rel * (1.0 + std::abs(x.nu)) ||
            std::abs(x.c - y.c) > rel * (1.0 + std::abs(x.c)))
            return false;
    }
    return true;
}
} // namespace detail

/// Flowed field commutes with the coordinate permutation sigma.
/// Throws PreconditionError when the seed or spectrum is not sigma-invariant.
inline bool check_sigma_invariance(const FormalVectorField& u_hat, const Spectrum& spec,
                                   const std::vector<int>& sigma, int cap)
{
    const int n = spec.dim();
    require(static_cast<int>(sigma.size()) == n, "check_sigma_invariance: permutation size mismatch");
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (int s : sigma) {
        require(s >= 0 && s < n && !seen[static_cast<std::size_t>(s)], "check_sigma_invariance: not a permutation");
        seen[static_cast<std::size_t>(s)] = 1;
    }
    for (int m = 0; m < n; ++m)
        require(spec.lambda()[static_cast<std::size_t>(sigma[static_cast<std::size_t>(m)])] ==
                    spec.lambda()[static_cast<std::size_t>(m)],
                "check_sigma_invariance: lambda is not constant on sigma-orbits");
    u_hat.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        const Complex image = u_hat.coeff(sigma[static_cast<std::size_t>(m)], permute_index(k, sigma));
        require(std::abs(image - c) <= 1e-14 * (1.0 + std::abs(c)), "check_sigma_invariance: seed is not sigma-invariant");
    });
    const FlowState st = normalize_exact(u_hat, spec, cap);
    for (const auto& [slot, s] : st.slots()) {
        const SlotSolution* img = st.find(sigma[static_cast<std::size_t>(slot.first)], permute_index(slot.second, sigma));
        if (!img || !detail::exp_poly_close(s.reduced, img->reduced, 1e-12)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Hamiltonian fields in 2n variables (x_1..x_n, y_1..y_n), J = [[0, I], [-I, 0]].

/// J grad H plus the linear part diag(mu) taken from the spectrum. H holds the
/// terms of degree >= 3 (the quadratic part sum mu_j x_j y_j is implied).
inline FormalVectorField hamiltonian_field(const Poly& H, const Spectrum& spec, int cap)
{
    const int dim = spec.dim();
    require(dim % 2 == 0, "hamiltonian_field: dimension must be even");
    const int n = dim / 2;
    for (int j = 0; j < n; ++j)
        require(std::abs(spec.lambda()[static_cast<std::size_t>(n + j)] + spec.lambda()[static_cast<std::size_t>(j)]) <=
                    spec.tolerance(),
                "hamiltonian_field: linear part must be diag(lambda, -lambda)");
    FormalVectorField u(spec.lambda(), cap);
    for (int j = 0; j < n; ++j) {
        for (const auto& [k, c] : detail::poly_derivative(H, n + j))
            if (k.order() >= 2) u.add_to(j, k, c);
        for (const auto& [k, c] : detail::poly_derivative(H, j))
            if (k.order() >= 2) u.add_to(n + j, k, -c);
    }
    return u;
}

/// theta H = -sum over nonresonant k of e^{-i arg<mu,k>} h_k x^k.
inline Poly theta_op(const Poly& H, const Spectrum& spec)
{
    Poly out;
    for (const auto& [k, c] : H) {
        const Complex d = spec.inner(k);
        if (std::abs(d) > spec.tolerance()) out.emplace(k, -unit_phase(d) * c);
    }
    detail::prune(out);
    return out;
}

/// Largest |d_j w_i - d_i w_j| coefficient of w = J^{-1} u (zero iff u is Hamiltonian).
inline double hamiltonian_residual(const FormalVectorField& u)
{
    const int dim = u.dim();
    require(dim % 2 == 0, "hamiltonian_residual: dimension must be even");
    const int n = dim / 2;
    auto polys = detail::field_as_polys(u);
    std::vector<Poly> w(static_cast<std::size_t>(dim));
    for (int j = 0; j < n; ++j) {
        w[static_cast<std::size_t>(j)] = detail::poly_add(Poly{}, polys[static_cast<std::size_t>(n + j)], -1.0);
        w[static_cast<std::size_t>(n + j)] = polys[static_cast<std::size_t>(j)];
    }
    double worst = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const Poly diff = detail::poly_add(detail::poly_derivative(w[static_cast<std::size_t>(i)], j),
                                               detail::poly_derivative(w[static_cast<std::size_t>(j)], i), -1.0);
            for (const auto& [k, c] : diff) worst = std::max(worst, std::abs(c));
        }
    return worst;
}

struct HamiltonianCheck {
    double identity_error = 0.0;          ///< xi(J grad H) vs J grad(theta H), slot-wise
    std::vector<double> deltas;
    std::vector<double> residuals;        ///< closedness residual at each delta
    bool passed(double tol = 1e-10) const
    {
        for (double r : residuals)
            if (!(r < tol)) return false;
        return identity_error <= 1e-13;
    }
};

inline HamiltonianCheck check_hamiltonian_invariance(const Poly& H_hat, const Spectrum& spec, int cap,
                                                     const std::vector<double>& deltas)
{
    const FormalVectorField u = hamiltonian_field(H_hat, spec, cap);
    HamiltonianCheck out;
    const FormalVectorField lhs = xi_op(u, spec);
    const FormalVectorField rhs = hamiltonian_field(theta_op(H_hat, spec), spec, cap);
    FormalVectorField rhs_nl = FormalVectorField::zero(spec.dim(), cap);
    rhs.for_each([&](int m, const MultiIndex& k, const Complex& c) { rhs_nl.set(m, k, c); });
    lhs.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        out.identity_error = std::max(out.identity_error, std::abs(c - rhs_nl.coeff(m, k)) / (1.0 + std::abs(c)));
    });
    rhs_nl.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        out.identity_error = std::max(out.identity_error, std::abs(c - lhs.coeff(m, k)) / (1.0 + std::abs(c)));
    });
    const FlowState st = normalize_exact(u, spec, cap);
    for (double d : deltas) {
        out.deltas.push_back(d);
        out.residuals.push_back(hamiltonian_residual(st.at(d)));
    }
    return out;
}

} // namespace normflow
