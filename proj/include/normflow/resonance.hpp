#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "normflow/error.hpp"
#include "normflow/multi_index.hpp"

namespace normflow {

/// Eigenvalues of the diagonal linear part with a declared resonance threshold.
class Spectrum {
public:
    using Complex = std::complex<double>;

    Spectrum() = default;

    /// tolerance < 0 selects the default 1e-12 * (1 + |lambda|_inf).
    explicit Spectrum(std::vector<Complex> lambda, double tolerance = -1.0) : lambda_(std::move(lambda))
    {
        require(!lambda_.empty() && static_cast<int>(lambda_.size()) <= MultiIndex::kMaxDim,
                "Spectrum: dimension must be in [1, 8]");
        for (const auto& l : lambda_)
            require(std::isfinite(l.real()) && std::isfinite(l.imag()), "Spectrum: non-finite eigenvalue");
        tol_ = tolerance < 0.0 ? 1e-12 * (1.0 + sup_abs()) : tolerance;
    }

    int dim() const noexcept { return static_cast<int>(lambda_.size()); }
    const std::vector<Complex>& lambda() const noexcept { return lambda_; }
    double tolerance() const noexcept { return tol_; }

    double sup_abs() const noexcept
    {
        double m = 0.0;
        for (const auto& l : lambda_) m = std::max(m, std::abs(l));
        return m;
    }

    /// Values of |<lambda,k>| in (tolerance, near_threshold) are too close to
    /// resonance to classify reliably in double precision.
    double near_threshold() const noexcept { return std::max(tol_, 1e-9 * (1.0 + sup_abs())); }

    /// <lambda, k> for a nonnegative exponent vector.
    Complex inner(const MultiIndex& k) const
    {
        require(k.dim() == dim(), "Spectrum: multi-index dimension mismatch");
        Complex s = 0.0;
        for (int j = 0; j < dim(); ++j) s += lambda_[static_cast<std::size_t>(j)] * static_cast<double>(k[j]);
        return s;
    }

    /// <lambda, k> - lambda_m, with m a 0-based component.
    Complex small_divisor(const MultiIndex& k, int m) const
    {
        require(m >= 0 && m < dim(), "small_divisor: component out of range");
        return inner(k) - lambda_[static_cast<std::size_t>(m)];
    }

    bool is_resonant(const MultiIndex& k, int m) const { return std::abs(small_divisor(k, m)) <= tol_; }

private:
    std::vector<Complex> lambda_;
    double tol_ = 0.0;
};

inline Spectrum::Complex small_divisor(const Spectrum& spec, const MultiIndex& k, int m)
{
    return spec.small_divisor(k, m);
}

/// One resonant monomial z^k e_m (m 0-based).
struct ResonantSlot {
    MultiIndex k;
    int m = 0;
    friend bool operator==(const ResonantSlot&, const ResonantSlot&) = default;
};

/// All resonant (k, m) with 2 <= |k| <= max_degree, ordered by degree, then k, then m.
inline std::vector<ResonantSlot> resonant_set(const Spectrum& spec, int max_degree)
{
    require(max_degree >= 2, "resonant_set: max_degree must be >= 2");
    std::vector<ResonantSlot> out;
    for (int d = 2; d <= max_degree; ++d)
        for (const auto& k : indices_of_degree(spec.dim(), d))
            for (int m = 0; m < spec.dim(); ++m)
                if (spec.is_resonant(k, m)) out.push_back({k, m});
    return out;
}

namespace detail {

/// Smallest nonresonant |<lambda,k>| over integer k != 0 with |k|_1 <= s.
/// The coordinate with largest |lambda_q| is eliminated analytically: along
/// k_q = t the modulus is a convex function of t, so only the integers next
/// to its real minimizer (and the clamped ends) can be the two smallest values.
inline double min_nonresonant_value(const Spectrum& spec, int s)
{
    const int n = spec.dim();
    const auto& lam = spec.lambda();
    int q = 0;
    for (int j = 1; j < n; ++j)
        if (std::abs(lam[static_cast<std::size_t>(j)]) > std::abs(lam[static_cast<std::size_t>(q)])) q = j;
    const std::complex<double> lq = lam[static_cast<std::size_t>(q)];
    const double lq2 = std::norm(lq);
    const double tol = spec.tolerance();
    const double near = spec.near_threshold();

    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double value) {
        if (value <= tol) return;
        require(value >= near,
               "omega_s: near-resonance |<lambda,k>| below the double-precision threshold");
        best = std::min(best, value);
    };

    std::vector<int> others;
    for (int j = 0; j < n; ++j)
        if (j != q) others.push_back(j);

    auto line = [&](std::complex<double> v, int budget, bool origin) {
        if (lq2 == 0.0) {
            if (!origin) consider(std::abs(v));
            return;
        }
        const double tstar = -(v.real() * lq.real() + v.imag() * lq.imag()) / lq2;
        const long long f = static_cast<long long>(std::floor(tstar));
        const long long cand[] = {f - 1, f, f + 1, f + 2, -budget, budget};
        long long seen[6];
        int nseen = 0;
        for (long long t : cand) {
            t = std::clamp<long long>(t, -budget, budget);
            if (std::find(seen, seen + nseen, t) != seen + nseen) continue;
            seen[nseen++] = t;
            if (origin && t == 0) continue;
            consider(std::abs(v + lq * static_cast<double>(t)));
        }
    };

    // Enumerate the non-pivot coordinates with total |.| <= s.
    auto rec = [&](auto&& self, std::size_t idx, int used, std::complex<double> v, bool origin) -> void {
        if (idx == others.size()) {
            line(v, s - used, origin);
            return;
        }
        const auto lj = lam[static_cast<std::size_t>(others[idx])];
        for (int kj = -(s - used); kj <= s - used; ++kj)
            self(self, idx + 1, used + std::abs(kj), v + lj * static_cast<double>(kj), origin && kj == 0);
    };
    rec(rec, 0, 0, {0.0, 0.0}, true);
    return best;
}

} // namespace detail

/// max of 1/|<lambda,k>| over nonresonant integer k with 0 < |k|_1 <= s
/// (entries of either sign); 1 when that set is empty.
inline double omega_s(const Spectrum& spec, int s)
{
    require(s >= 1, "omega_s: s must be >= 1");
    const double v = detail::min_nonresonant_value(spec, s);
    return std::isinf(v) ? 1.0 : 1.0 / v;
}

struct BrjunoSums {
    std::vector<double> a;        ///< a_j = max(1, Omega_{2^j+1}), j = 1..J
    std::vector<double> partial;  ///< sum_{i<=j} 2^{-i} ln a_i
    bool a_nondecreasing = true;
};

inline BrjunoSums brjuno_partial_sums(const Spectrum& spec, int J)
{
    require(J >= 1 && J <= 40, "brjuno_partial_sums: J must be in [1, 40]");
    BrjunoSums out;
    double sum = 0.0;
    for (int j = 1; j <= J; ++j) {
        const int s = (1 << j) + 1;
        const double a = std::max(1.0, omega_s(spec, s));
        if (!out.a.empty() && a < out.a.back()) out.a_nondecreasing = false;
        out.a.push_back(a);
        sum += std::ldexp(std::log(a), -j);
        out.partial.push_back(sum);
    }
    return out;
}

/// Dyadic anchor index r_j = 2^{j-1} + 1.
inline long long anchor_index(int j) { return (1LL << (j - 1)) + 1; }

/// Nonpositive convex sequence given at anchors r_j (j = 1..J) and linearly
/// interpolated at integers in between. Indices start at 2 = r_1.
struct BSequence {
    int n = 1;
    double A = 1.0;                ///< constant scale (or the frozen last Omega when wired)
    std::vector<double> anchors;   ///< anchors[j-1] = b_{r_j}
    std::vector<double> a;         ///< a_s, s = 1..J, from the defining relation
    int omega_frozen_after = 0;    ///< wired: Omega_{r_s} is held constant for s beyond this

    long long max_index() const { return anchor_index(static_cast<int>(anchors.size())); }

    double at(long long index) const
    {
        require(index >= 2 && index <= max_index(), "BSequence: index outside the computed range");
        int j = 1;
        while (anchor_index(j + 1) < index) ++j;
        const long long lo = anchor_index(j);
        if (index == lo) return anchors[static_cast<std::size_t>(j - 1)];
        const long long hi = anchor_index(j + 1);
        const double t = static_cast<double>(index - lo) / static_cast<double>(hi - lo);
        return anchors[static_cast<std::size_t>(j - 1)] * (1.0 - t) + anchors[static_cast<std::size_t>(j)] * t;
    }

    /// Values at integer indices 2..max_index().
    std::vector<double> dense() const
    {
        std::vector<double> v;
        for (long long i = 2; i <= max_index(); ++i) v.push_back(at(i));
        return v;
    }
};

namespace detail {

/// b_{r_{j+1}} = -2^j sum_{s>j} 2^{-s} ln a_s for j = 0..J-1, given a_s.
inline BSequence b_from_a(int n, int J, const std::function<double(int)>& a_of)
{
    std::vector<double> terms; // 2^{-s} ln a_s, s = 1..S
    double running = 0.0;
    for (int s = 1; s <= 1000; ++s) {
        const double a = a_of(s);
        require(a >= 1.0, "build_b_sequence: a_s must be >= 1");
        const double t = std::ldexp(std::log(a), -s);
        terms.push_back(t);
        running += t;
        if (s > J + 1 && t < 1e-16 * running) break;
    }
    // Tail sums T_j = sum_{s>j} terms[s-1], accumulated from the small end.
    std::vector<double> tail(terms.size() + 1, 0.0);
    for (std::size_t s = terms.size(); s-- > 0;) tail[s] = tail[s + 1] + terms[s];
    BSequence b;
    b.n = n;
    for (int j = 0; j < J; ++j) b.anchors.push_back(-std::ldexp(tail[static_cast<std::size_t>(j)], j));
    for (int s = 1; s <= J; ++s) b.a.push_back(a_of(s));
    return b;
}

} // namespace detail

/// Anchors from a_s = n 2^s (2 r_s)^{n+1} A with a constant scale A >= 1.
inline BSequence build_b_sequence(double A, int n, int J)
{
    require(A >= 1.0, "build_b_sequence: A must be >= 1");
    require(n >= 1 && J >= 3 && J <= 40, "build_b_sequence: need n >= 1 and J in [3, 40]");
    auto a_of = [&](int s) {
        return n * std::ldexp(1.0, s) * std::pow(2.0 * static_cast<double>(anchor_index(s)), n + 1) * A;
    };
    BSequence b = detail::b_from_a(n, J, a_of);
    b.A = A;
    return b;
}

/// Anchors with the scale wired to the spectrum: a_s = n 2^s (2 r_s)^{n+1} Omega_{r_s},
/// so that exp(b_{r_{m+1}} - 2 b_{r_m}) = a_m. Omega is computed up to a
/// size-dependent s and held constant beyond it.
inline BSequence build_b_sequence(const Spectrum& spec, int J, int max_omega_step = 0)
{
    const int n = spec.dim();
    require(J >= 3 && J <= 40, "build_b_sequence: J must be in [3, 40]");
    int freeze = max_omega_step;
    if (freeze <= 0) {
        freeze = 1;
        while (freeze < 24 &&
               std::pow(2.0 * static_cast<double>(anchor_index(freeze + 1)) + 1.0, n - 1) <= 4e6)
            ++freeze;
    }
    freeze = std::max(freeze, 1);
    std::vector<double> omega;
    for (int s = 1; s <= freeze; ++s) {
        double w = omega_s(spec, static_cast<int>(anchor_index(s)));
        if (!omega.empty()) w = std::max(w, omega.back());
        omega.push_back(w);
    }
    auto a_of = [&](int s) {
        const double w = omega[static_cast<std::size_t>(std::min(s, freeze) - 1)];
        return n * std::ldexp(1.0, s) * std::pow(2.0 * static_cast<double>(anchor_index(s)), n + 1) * w;
    };
    BSequence b = detail::b_from_a(n, J, a_of);
    b.A = omega.back();
    b.omega_frozen_after = freeze;
    return b;
}

struct BPropertyReport {
    bool nonpositive = true;
    bool nonincreasing = true;
    bool convex = true;
    bool sublinear = true;
    long long first_nonpositive_violation = -1;
    long long first_nonincreasing_violation = -1;
    long long first_convex_violation = -1;
    long long first_sublinear_violation = -1;

    bool all() const noexcept { return nonpositive && nonincreasing && convex && sublinear; }
};

/// values[i] is b at index first_index + i. Sublinearity is judged on the
/// dyadic indices 2^j + 1: |b_i| / i must be nonincreasing there and the last
/// ratio at most half the largest (or every ratio zero).
inline BPropertyReport check_b_properties(const std::vector<double>& values, long long first_index = 2)
{
    require(values.size() >= 3, "check_b_properties: need at least 3 values");
    BPropertyReport r;
    auto idx = [&](std::size_t i) { return first_index + static_cast<long long>(i); };
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0.0 && r.nonpositive) {
            r.nonpositive = false;
            r.first_nonpositive_violation = idx(i);
        }
        if (i > 0 && values[i] > values[i - 1] && r.nonincreasing) {
            r.nonincreasing = false;
            r.first_nonincreasing_violation = idx(i);
        }
        if (i > 0 && i + 1 < values.size() && values[i - 1] - 2.0 * values[i] + values[i + 1] < -1e-12 && r.convex) {
            r.convex = false;
            r.first_convex_violation = idx(i);
        }
    }
    std::vector<std::pair<long long, double>> ratios;
    for (int j = 0; j < 62; ++j) {
        const long long i = (1LL << j) + 1;
        if (i < first_index) continue;
        if (i >= idx(values.size())) break;
        ratios.emplace_back(i, std::abs(values[static_cast<std::size_t>(i - first_index)]) / static_cast<double>(i));
    }
    double biggest = 0.0;
    for (const auto& [i, q] : ratios) biggest = std::max(biggest, q);
    for (std::size_t t = 1; t < ratios.size(); ++t) {
        if (ratios[t].second > ratios[t - 1].second + 1e-12 * (1.0 + biggest)) {
            r.sublinear = false;
            r.first_sublinear_violation = ratios[t].first;
            break;
        }
    }
    if (r.sublinear && biggest > 0.0 && !ratios.empty() && ratios.back().second > 0.5 * biggest) {
        r.sublinear = false;
        r.first_sublinear_violation = ratios.back().first;
    }
    return r;
}

inline BPropertyReport check_b_properties(const BSequence& b) { return check_b_properties(b.dense(), 2); }

/// Resonances, Omega table and Brjuno sums for one spectrum.
struct ResonanceReport {
    std::vector<ResonantSlot> resonant;
    std::map<int, double> omega;
    BrjunoSums brjuno;
};

inline ResonanceReport resonance_report(const Spectrum& spec, int max_degree, int brjuno_depth)
{
    ResonanceReport r;
    r.resonant = resonant_set(spec, max_degree);
    for (int s = 1; s <= max_degree; ++s) r.omega[s] = omega_s(spec, s);
    r.brjuno = brjuno_partial_sums(spec, brjuno_depth);
    return r;
}

} // namespace normflow
