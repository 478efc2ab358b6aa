#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "normflow/error.hpp"
#include "normflow/flow.hpp"
#include "normflow/multi_index.hpp"
#include "normflow/resonance.hpp"
#include "normflow/series.hpp"

namespace normflow {

/// Band Z_r = {k : r <= |k| <= 2r - 2}.
inline bool in_band(const MultiIndex& k, int r) { return k.order() >= r && k.order() <= 2 * r - 2; }

/// Throws PreconditionError naming the first resonant band slot up to cap.
inline void require_nonresonant_band(const Spectrum& spec, int r, int cap)
{
    for (int D = r; D <= std::min(2 * r - 2, cap); ++D)
        for (const auto& k : indices_of_degree(spec.dim(), D))
            for (int m = 0; m < spec.dim(); ++m)
                require(!spec.is_resonant(k, m),
                        "resonant band slot " + std::to_string(m + 1) + ":" + k.dashed() + " for r = " + std::to_string(r));
}

/// (xi_r u)^m = -sum over k in Z_r of e^{-i arg divisor} U_k^m z^k; zero outside the band.
inline FormalVectorField xi_r_op(const FormalVectorField& u, const Spectrum& spec, int r)
{
    require(r >= 2, "xi_r_op: r must be >= 2");
    require(u.dim() == spec.dim(), "xi_r_op: dimension mismatch");
    FormalVectorField out = FormalVectorField::zero(u.dim(), u.degree_cap());
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (!in_band(k, r)) return;
        const Complex d = spec.small_divisor(k, m);
        require(std::abs(d) > spec.tolerance(),
                "xi_r_op: resonant band slot " + std::to_string(m + 1) + ":" + k.dashed());
        out.set(m, k, -unit_phase(d) * c);
    });
    return out;
}

struct StepParams {
    int r = 2;
    double c = 0.0;
    double alpha = 0.0;
    double rho = 1.0;
    BSequence b;
    double omega_2r_minus_2 = 0.0; ///< 0 means "compute from the spectrum"
};

struct StepCertificate {
    double epsilon = 0.0;
    double epsilon_prime = 0.0;
    double delta_big = 0.0;        ///< Delta
    double delta_prime = 0.0;      ///< Delta'
    double omega = 0.0;            ///< Omega_{2r-2}
    double rho_next = 0.0;         ///< rho' = rho - eps (rho e^alpha)^r / (e^alpha n)
    double det_lo = 1.0;
    double det_hi = 1.0;
    double dnu_minus_i = 0.0;      ///< bound on ||Dnu - I||
    double dnu_norm = 1.0;         ///< bound on ||Dnu||

    // Empirical side, from integrating the variational system.
    int samples = 0;
    double det_abs_min = 1.0;
    double det_abs_max = 1.0;
    double max_dev = 0.0;          ///< max ||X - I||_inf
    double max_norm = 1.0;         ///< max ||X||_inf
    bool empirical_ok = true;
};

struct StepResult {
    int r = 2;
    FormalVectorField g;           ///< transformed field Lambda z + g
    SeriesMap nu;                  ///< forward shift: pushforward(nu, Lambda z + u) = Lambda z + g
    StepCertificate cert;
    bool band_annihilated = true;
    int min_support_degree = 0;    ///< lowest degree present in g (0 when g = 0)
    double first_shell_max = 0.0;  ///< max |G| on the degree 2r-1 shell
    bool hypothesis_bound_ok = true;   ///< |U_k| <= c e^{b_|k| + alpha |k|}
    bool coefficient_bound_ok = true;  ///< |G_k| <= c e^{b_|k| + (alpha + eps) |k|}
};

namespace detail {

struct BandTerm {
    int m;
    MultiIndex k;
    Complex coef; ///< -phase * U_hat
    double rate;
};

inline std::vector<BandTerm> band_terms(const FormalVectorField& u, const Spectrum& spec, int r)
{
    std::vector<BandTerm> out;
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (!in_band(k, r)) return;
        const Complex d = spec.small_divisor(k, m);
        out.push_back({m, k, -unit_phase(d) * c, std::abs(d)});
    });
    return out;
}

inline Complex det_small(std::vector<Complex> a, int n)
{
    Complex det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(a[static_cast<std::size_t>(i * n + c)]) > std::abs(a[static_cast<std::size_t>(piv * n + c)])) piv = i;
        if (a[static_cast<std::size_t>(piv * n + c)] == Complex(0.0)) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[static_cast<std::size_t>(c * n + j)], a[static_cast<std::size_t>(piv * n + j)]);
            det = -det;
        }
        const Complex p = a[static_cast<std::size_t>(c * n + c)];
        det *= p;
        for (int i = c + 1; i < n; ++i) {
            const Complex f = a[static_cast<std::size_t>(i * n + c)] / p;
            for (int j = c; j < n; ++j) a[static_cast<std::size_t>(i * n + j)] -= f * a[static_cast<std::size_t>(c * n + j)];
        }
    }
    return det;
}

inline double inf_norm(const std::vector<Complex>& a, int n, bool minus_identity)
{
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            row += std::abs(a[static_cast<std::size_t>(i * n + j)] - (minus_identity && i == j ? Complex(1.0) : Complex(0.0)));
        best = std::max(best, row);
    }
    return best;
}

} // namespace detail

/// Integrates Z' = xi_r u(Z, delta) and X' = D(xi_r u) X from sampled points
/// of the polydisk of radius rho_prime until every band mode has decayed by
/// e^{-37}, and compares |det X|, ||X - I||, ||X|| with the certificate.
inline void jacobian_certificate(const FormalVectorField& u_hat, const Spectrum& spec, int r, double rho_prime,
                                 StepCertificate& cert, int samples = 10, unsigned seed = 20240601u)
{
    const int n = spec.dim();
    const auto N = static_cast<std::size_t>(n);
    const auto terms = detail::band_terms(u_hat, spec, r);
    cert.samples = 0;
    cert.det_abs_min = cert.det_abs_max = 1.0;
    cert.max_dev = 0.0;
    cert.max_norm = 1.0;
    if (terms.empty() || !(rho_prime > 0.0)) {
        cert.samples = terms.empty() ? samples : 0;
        cert.empirical_ok = terms.empty();
        return;
    }
    std::vector<double> rates;
    for (const auto& t : terms) rates.push_back(t.rate);
    std::sort(rates.begin(), rates.end());
    const double end = 37.0 / rates.front();

    // State: Z (n) followed by X (n x n, row-major).
    auto rhs = [&](double delta, const std::vector<Complex>& y) {
        std::vector<Complex> dy(N + N * N, 0.0);
        std::vector<Complex> jac(N * N, 0.0);
        for (const auto& t : terms) {
            const Complex w = t.coef * std::exp(-t.rate * delta);
            Complex mono = w;
            for (int j = 0; j < n; ++j) mono *= std::pow(y[static_cast<std::size_t>(j)], t.k[j]);
            dy[static_cast<std::size_t>(t.m)] += mono;
            for (int j = 0; j < n; ++j) {
                if (t.k[j] == 0) continue;
                Complex dm = w * static_cast<double>(t.k[j]);
                for (int l = 0; l < n; ++l)
                    dm *= std::pow(y[static_cast<std::size_t>(l)], l == j ? t.k[l] - 1 : t.k[l]);
                jac[static_cast<std::size_t>(t.m * n + j)] += dm;
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Complex s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += jac[static_cast<std::size_t>(i * n + l)] * y[N + static_cast<std::size_t>(l * n + j)];
                dy[N + static_cast<std::size_t>(i * n + j)] = s;
            }
        return dy;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> radius(0.5, 1.0);
    bool ok = true;
    for (int p = 0; p < samples; ++p) {
        std::vector<Complex> y(N + N * N, 0.0);
        for (int j = 0; j < n; ++j) {
            // Half of the samples sit on the distinguished boundary (scaled by 1 - 1e-9).
            const double rad = (p % 2 == 0 ? 1.0 - 1e-9 : radius(rng)) * rho_prime;
            y[static_cast<std::size_t>(j)] = std::polar(rad, angle(rng));
            y[N + static_cast<std::size_t>(j * n + j)] = 1.0;
        }
        double delta = 0.0;
        while (delta < end) {
            // Resolve the fastest band mode that is still alive.
            double live = rates.front();
            for (double g : rates)
                if (g * delta < 40.0) live = std::max(live, g);
            const double h = std::min(0.05 / live, end - delta);
            const auto k1 = rhs(delta, y);
            auto tmp = y;
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            const auto k2 = rhs(delta + 0.5 * h, tmp);
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            const auto k3 = rhs(delta + 0.5 * h, tmp);
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
            const auto k4 = rhs(delta + h, tmp);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            delta += h;
        }
        const std::vector<Complex> X(y.begin() + static_cast<std::ptrdiff_t>(N), y.end());
        const double det = std::abs(detail::det_small(X, n));
        cert.det_abs_min = std::min(cert.det_abs_min, det);
        cert.det_abs_max = std::max(cert.det_abs_max, det);
        cert.max_dev = std::max(cert.max_dev, detail::inf_norm(X, n, true));
        cert.max_norm = std::max(cert.max_norm, detail::inf_norm(X, n, false));
        ++cert.samples;
    }
    ok = cert.det_abs_min >= cert.det_lo && cert.det_abs_max <= cert.det_hi && cert.max_dev <= cert.dnu_minus_i &&
         cert.max_norm <= cert.dnu_norm;
    cert.empirical_ok = ok;
}

/// Analytic part of the certificate: eps, eps', Delta, Delta', rho', bounds (i)-(iii).
inline StepCertificate step_bounds(const StepParams& p, const Spectrum& spec)
{
    const int n = spec.dim();
    StepCertificate cert;
    cert.omega = p.omega_2r_minus_2 > 0.0 ? p.omega_2r_minus_2 : omega_s(spec, 2 * p.r - 2);
    const double gap = std::exp(2.0 * p.b.at(p.r) - p.b.at(2 * p.r - 1));
    const double ea = std::exp(p.alpha);
    cert.delta_big = std::pow(2.0 * p.r, n) * ea * n * gap;
    cert.delta_prime = std::pow(2.0 * p.r, n + 1) * ea * n * gap;
    cert.epsilon = p.c * cert.delta_big * cert.omega;
    cert.epsilon_prime = p.c * cert.delta_prime * cert.omega;
    const double re = p.rho * ea;
    cert.rho_next = p.rho - cert.epsilon * std::pow(re, p.r) / (ea * n);
    const double e1 = cert.epsilon_prime * std::pow(re, p.r - 1);
    cert.det_lo = std::exp(-e1);
    cert.det_hi = std::exp(e1);
    cert.dnu_minus_i = e1 * std::exp(e1);
    cert.dnu_norm = std::exp(e1);
    return cert;
}

/// One partial normalization: averages the band Z_r away exactly, evolves the
/// higher degrees to delta = +inf, and builds the shift map and its certificate.
inline StepResult partial_step(const FormalVectorField& u_hat, const Spectrum& spec, const StepParams& params, int cap,
                               int samples = 10)
{
    const int r = params.r;
    require(r >= 2, "partial_step: r must be >= 2");
    require(params.c > 0.0 && params.alpha >= 0.0 && params.rho > 0.0, "partial_step: invalid c, alpha or rho");
    require(params.rho * std::exp(params.alpha) <= 1.0 + 1e-12, "partial_step: need rho e^alpha <= 1");
    u_hat.for_each([&](int m, const MultiIndex& k, const Complex&) {
        require(k.order() >= r, "partial_step: seed term " + std::to_string(m + 1) + ":" + k.dashed() + " below degree r");
    });
    require_nonresonant_band(spec, r, cap);

    StepResult out;
    out.r = r;
    u_hat.for_each([&](int, const MultiIndex& k, const Complex& c) {
        if (std::abs(c) > params.c * std::exp(params.b.at(k.order()) + params.alpha * k.order()))
            out.hypothesis_bound_ok = false;
    });

    FlowState st(u_hat, spec, cap, [r](int, const MultiIndex& k) { return in_band(k, r); });
    st.solve();
    out.g = st.at(std::numeric_limits<double>::infinity());
    out.g.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        if (in_band(k, r)) out.band_annihilated = false;
        if (out.min_support_degree == 0 || k.order() < out.min_support_degree) out.min_support_degree = k.order();
        if (k.order() == 2 * r - 1) out.first_shell_max = std::max(out.first_shell_max, std::abs(c));
        (void)m;
    });
    ensure(out.band_annihilated, "partial_step: band slot survived the step");
    ensure(out.min_support_degree == 0 || out.min_support_degree >= 2 * r - 1,
           "partial_step: transformed field has support below degree 2r - 1");
    out.nu = change_of_variables(st, std::numeric_limits<double>::infinity(), cap);

    out.cert = step_bounds(params, spec);
    out.g.for_each([&](int, const MultiIndex& k, const Complex& c) {
        if (std::abs(c) > params.c * std::exp(params.b.at(k.order()) + (params.alpha + out.cert.epsilon) * k.order()))
            out.coefficient_bound_ok = false;
    });
    jacobian_certificate(u_hat, spec, r, out.cert.rho_next, out.cert, samples);
    return out;
}

/// steps[0] o steps[1] o ... o steps[N-1] (the last map is applied first).
inline SeriesMap compose_steps(const std::vector<SeriesMap>& steps, int cap)
{
    require(!steps.empty(), "compose_steps: empty list");
    SeriesMap acc = steps.back();
    for (std::size_t i = steps.size() - 1; i-- > 0;) {
        require(steps[i].dim() == acc.dim(), "compose_steps: dimension mismatch");
        acc = compose(steps[i], acc, cap);
    }
    return compose(SeriesMap::identity(acc.dim(), cap), acc, cap);
}

struct Schedule {
    int N = 0;
    int n = 1;
    double c = 0.0;
    double alpha0 = 0.0;
    std::vector<long long> r;             ///< r_m, m = 1..N (index m-1)
    std::vector<double> omega;            ///< Omega_{r_m}
    std::vector<double> alpha;            ///< alpha_0..alpha_N
    std::vector<double> ln_rho;           ///< ln rho_m = -alpha_m, m = 0..N
    std::vector<double> epsilon;          ///< eps_m = c Delta_m Omega_{r_m}
    std::vector<double> epsilon_closed;   ///< c e^{alpha_{m-1}} / (2^{m+1} r_m)
    std::vector<double> epsilon_prime;    ///< c Delta'_m Omega_{r_m}

    double rho(int m) const { return std::exp(ln_rho[static_cast<std::size_t>(m)]); }
    /// rho_m e^{alpha_m}, evaluated in log form.
    double rho_alpha_product(int m) const
    {
        return std::exp(ln_rho[static_cast<std::size_t>(m)] + alpha[static_cast<std::size_t>(m)]);
    }
    double sum_epsilon() const { double s = 0; for (double e : epsilon) s += e; return s; }
    double sum_epsilon_prime() const { double s = 0; for (double e : epsilon_prime) s += e; return s; }

    // Checks.
    bool first_step_below_sixteenth() const { return !epsilon.empty() && epsilon[0] < 1.0 / 16.0; }
    int first_epsilon_bound_violation() const  ///< first m with eps_m > 2^{-m-2}, or 0
    {
        for (std::size_t i = 0; i < epsilon.size(); ++i)
            if (epsilon[i] > std::ldexp(1.0, -static_cast<int>(i) - 3)) return static_cast<int>(i) + 1;
        return 0;
    }
    int first_epsilon_prime_excess() const  ///< first m with eps'_m > eps_m, or 0
    {
        for (std::size_t i = 0; i < epsilon.size(); ++i)
            if (epsilon_prime[i] > epsilon[i]) return static_cast<int>(i) + 1;
        return 0;
    }
    bool det_bracket_ok() const
    {
        const double s = sum_epsilon_prime();
        return std::exp(-s) > std::exp(-0.25) && std::exp(s) < std::exp(0.25);
    }
};

/// Schedule for N steps with r_m = 2^{m-1} + 1 and
/// eps_m = c Delta_m Omega_{r_m}, Delta_m = (2 r_m)^n e^{alpha_{m-1}} n exp(2 b_{r_m} - b_{r_{m+1}}).
inline Schedule build_schedule(double c, double alpha0, int n, const Spectrum& spec, int N, const BSequence& b)
{
    require(n == spec.dim(), "build_schedule: dimension mismatch");
    require(N >= 1 && N <= 30, "build_schedule: N must be in [1, 30]");
    require(c > 0.0 && alpha0 >= 0.0, "build_schedule: need c > 0 and alpha0 >= 0");
    require(c * std::exp(alpha0) <= 0.125 * (1.0 + 1e-15), "build_schedule: need c e^{alpha0} <= 1/8");
    require(n * std::exp(alpha0) >= 2.0 * (1.0 - 1e-15), "build_schedule: need n e^{alpha0} >= 2");
    require(static_cast<int>(b.anchors.size()) >= N + 1, "build_schedule: b-sequence too short");
    Schedule s;
    s.N = N;
    s.n = n;
    s.c = c;
    s.alpha0 = alpha0;
    s.alpha.push_back(alpha0);
    s.ln_rho.push_back(-alpha0);
    for (int m = 1; m <= N; ++m) {
        const long long rm = anchor_index(m);
        const double om = omega_s(spec, static_cast<int>(rm));
        const double a_prev = s.alpha.back();
        const double gap = std::exp(2.0 * b.anchors[static_cast<std::size_t>(m - 1)] - b.anchors[static_cast<std::size_t>(m)]);
        const double Dm = std::pow(2.0 * static_cast<double>(rm), n) * std::exp(a_prev) * n * gap;
        const double Dpm = std::pow(2.0 * static_cast<double>(rm), n + 1) * std::exp(a_prev) * n * gap;
        s.r.push_back(rm);
        s.omega.push_back(om);
        s.epsilon.push_back(c * Dm * om);
        s.epsilon_prime.push_back(c * Dpm * om);
        s.epsilon_closed.push_back(c * std::exp(a_prev) / (std::ldexp(1.0, m + 1) * static_cast<double>(rm)));
        s.alpha.push_back(a_prev + s.epsilon.back());
        s.ln_rho.push_back(-s.alpha.back());
    }
    return s;
}

struct Calibration {
    double c_hat = 0.0;
    double alpha_hat = 0.0;
    double c = 0.0;
    double alpha0 = 0.0;
};

/// c_hat = max |U_k| e^{-b_|k| - alpha_hat |k|} with alpha_hat = max(0, -ln rho);
/// alpha0 is the smallest value on a 1e-3 grid (>= alpha_hat) with
/// c e^{alpha0} <= 1/8 and n e^{alpha0} >= 2, where c = c_hat e^{2 (alpha_hat - alpha0)}.
inline Calibration calibrate(const FormalVectorField& u_hat, const BSequence& b, double rho)
{
    require(rho > 0.0, "calibrate: rho must be positive");
    Calibration cal;
    cal.alpha_hat = std::max(0.0, -std::log(rho));
    u_hat.for_each([&](int, const MultiIndex& k, const Complex& c) {
        cal.c_hat = std::max(cal.c_hat, std::abs(c) * std::exp(-b.at(k.order()) - cal.alpha_hat * k.order()));
    });
    if (cal.c_hat == 0.0) cal.c_hat = std::numeric_limits<double>::min();
    const int n = u_hat.dim();
    for (long long i = static_cast<long long>(std::ceil(cal.alpha_hat * 1000.0));; ++i) {
        const double a0 = static_cast<double>(i) * 1e-3;
        const double c = cal.c_hat * std::exp(2.0 * (cal.alpha_hat - a0));
        if (c * std::exp(a0) <= 0.125 && n * std::exp(a0) >= 2.0) {
            cal.alpha0 = a0;
            cal.c = c;
            break;
        }
        require(i < 10'000'000, "calibrate: no admissible alpha0 found");
    }
    return cal;
}

struct SiegelResult {
    SeriesMap F;                      ///< forward normalizer: pushforward(F, Lambda z + u_hat) = Lambda z + residual
    FormalVectorField residual;
    Schedule schedule;
    std::vector<StepResult> steps;
    BSequence b;
    double conjugacy_error = 0.0;
    std::vector<double> eps_exp_partial;   ///< partial sums of eps_j e^{eps_j}
    std::vector<double> nu_origin;         ///< ||nu_j(0)||_inf, computed
    std::vector<double> nu_origin_bound;   ///< partial sums of rho_j eps_j / n
    double det_F_min = 1.0;                ///< |det DF| over sampled points
    double det_F_max = 1.0;
    bool det_F_in_bracket = true;
    double residual_max = 0.0;
};

/// Steps r_m = 2^{m-1} + 1 until the band reaches the cap (2 r_N - 2 >= cap).
inline int siegel_step_count(int cap)
{
    int N = 1;
    while ((1 << N) < cap) ++N;
    return N;
}

inline SiegelResult siegel_pipeline(const FormalVectorField& u_hat, const Spectrum& spec, double c, double alpha0, int cap,
                                    const BSequence* b_in = nullptr, int samples = 10)
{
    require(u_hat.dim() == spec.dim(), "siegel_pipeline: dimension mismatch");
    require(cap >= 2, "siegel_pipeline: cap must be >= 2");
    for (const auto& slot : resonant_set(spec, cap))
        require(false, "siegel_pipeline: resonant slot " + std::to_string(slot.m + 1) + ":" + slot.k.dashed());
    const int n = spec.dim();
    const int N = siegel_step_count(cap);
    SiegelResult out;
    out.b = b_in ? *b_in : build_b_sequence(spec, N + 2);
    out.schedule = build_schedule(c, alpha0, n, spec, N, out.b);

    FormalVectorField current = truncate(u_hat, cap);
    std::vector<SeriesMap> forward;
    double eps_exp = 0.0;
    double bound = 0.0;
    for (int m = 1; m <= N; ++m) {
        StepParams p;
        p.r = static_cast<int>(anchor_index(m));
        p.c = c;
        p.alpha = out.schedule.alpha[static_cast<std::size_t>(m - 1)];
        p.rho = out.schedule.rho(m - 1);
        p.b = out.b;
        StepResult step = partial_step(current, spec, p, cap, samples);
        current = step.g;
        forward.push_back(step.nu);
        const double e = out.schedule.epsilon[static_cast<std::size_t>(m - 1)];
        eps_exp += e * std::exp(e);
        out.eps_exp_partial.push_back(eps_exp);
        const std::vector<Complex> zero(static_cast<std::size_t>(n), 0.0);
        double at0 = 0.0;
        for (const auto& v : step.nu.apply(zero)) at0 = std::max(at0, std::abs(v));
        out.nu_origin.push_back(at0);
        bound += out.schedule.rho(m) * e / n;
        out.nu_origin_bound.push_back(bound);
        out.steps.push_back(std::move(step));
    }
    std::reverse(forward.begin(), forward.end());
    out.F = compose_steps(forward, cap);
    out.residual = current;
    out.residual.for_each([&](int, const MultiIndex&, const Complex& v) { out.residual_max = std::max(out.residual_max, std::abs(v)); });
    out.conjugacy_error = max_abs_difference(pushforward(out.F, truncate(u_hat, cap), cap), current);

    // |det DF| at sampled points of the final polydisk.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const double rad = out.schedule.rho(N) * std::exp(-0.5);
    out.det_F_min = out.det_F_max = 1.0;
    for (int s = 0; s < samples; ++s) {
        std::vector<Complex> z(static_cast<std::size_t>(n));
        for (auto& zj : z) zj = std::polar(rad, angle(rng));
        const double d = std::abs(detail::det_small(out.F.jacobian(z), n));
        out.det_F_min = std::min(out.det_F_min, d);
        out.det_F_max = std::max(out.det_F_max, d);
    }
    out.det_F_in_bracket = out.det_F_min > std::exp(-0.25) && out.det_F_max < std::exp(0.25);
    return out;
}

} // namespace normflow
