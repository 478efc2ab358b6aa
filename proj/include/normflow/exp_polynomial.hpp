#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "normflow/error.hpp"

namespace normflow {

/// One term c * delta^s * exp(-nu * delta).
struct ExpTerm {
    double nu = 0.0;
    int s = 0;
    std::complex<double> c;

    friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// Finite sum of ExpTerm, kept canonical: sorted by (nu, s), equal keys
/// merged, no negligible coefficient, every rate nonnegative.
class ExpPolynomial {
public:
    using Complex = std::complex<double>;

    /// Rates closer than this (relative) are the same key.
    static constexpr double kRateTolerance = 1e-12;
    static constexpr double kDropBelow = 1e-300;
    static inline std::size_t max_terms = 100000;

    ExpPolynomial() = default;

    static ExpPolynomial constant(Complex c) { return monomial(c, 0, 0.0); }

    static ExpPolynomial monomial(Complex c, int s, double nu)
    {
        ExpPolynomial p;
        p.terms_.push_back({nu, s, c});
        p.canonicalize();
        return p;
    }

    /// Builds from arbitrary terms and canonicalizes.
    static ExpPolynomial from_terms(std::vector<ExpTerm> terms)
    {
        ExpPolynomial p;
        p.terms_ = std::move(terms);
        p.canonicalize();
        return p;
    }

    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    /// True when the value is the same for every delta.
    bool is_constant() const noexcept
    {
        return terms_.empty() || (terms_.size() == 1 && terms_[0].nu == 0.0 && terms_[0].s == 0);
    }

    /// Largest s among terms with nu = 0 (or -1 if none): the polynomial growth order.
    int polynomial_order() const noexcept
    {
        int s = -1;
        for (const auto& t : terms_)
            if (t.nu == 0.0) s = std::max(s, t.s);
        return s;
    }

    Complex eval(double delta) const
    {
        if (std::isinf(delta)) {
            require(delta > 0, "ExpPolynomial: evaluation at -inf");
            return eval_infinity();
        }
        Complex sum = 0.0;
        for (const auto& t : terms_) sum += t.c * std::pow(delta, t.s) * std::exp(-t.nu * delta);
        return sum;
    }

    /// Limit delta -> +inf. A term with nu = 0 and s > 0 diverges.
    Complex eval_infinity() const
    {
        Complex sum = 0.0;
        for (const auto& t : terms_) {
            if (t.nu != 0.0) continue;
            ensure(t.s == 0, "ExpPolynomial: divergent term delta^" + std::to_string(t.s) + " at delta = inf");
            sum += t.c;
        }
        return sum;
    }

    /// Indefinite-from-zero integral: the exp-polynomial P with P(0) = 0 and P' = *this.
    ExpPolynomial integral() const
    {
        std::vector<ExpTerm> out;
        out.reserve(2 * terms_.size());
        for (const auto& t : terms_) {
            if (t.nu == 0.0) {
                out.push_back({0.0, t.s + 1, t.c / static_cast<double>(t.s + 1)});
                continue;
            }
            // s!/nu^{s+1} * (1 - e^{-nu d} sum_{j<=s} (nu d)^j / j!)
            double fact_s = 1.0;
            for (int i = 2; i <= t.s; ++i) fact_s *= i;
            const Complex head = t.c * fact_s / std::pow(t.nu, t.s + 1);
            out.push_back({0.0, 0, head});
            double scale = 1.0;
            for (int j = 0; j <= t.s; ++j) {
                if (j > 0) scale *= t.nu / j;
                out.push_back({t.nu, j, -head * scale});
            }
        }
        return from_terms(std::move(out));
    }

    /// Multiplies by exp(-mu * delta).
    ExpPolynomial shifted(double mu) const
    {
        std::vector<ExpTerm> out = terms_;
        for (auto& t : out) t.nu += mu;
        return from_terms(std::move(out));
    }

    ExpPolynomial scaled(Complex a) const
    {
        std::vector<ExpTerm> out = terms_;
        for (auto& t : out) t.c *= a;
        return from_terms(std::move(out));
    }

    ExpPolynomial& operator+=(const ExpPolynomial& other)
    {
        if (other.terms_.empty()) return *this;
        terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
        canonicalize();
        return *this;
    }

    friend ExpPolynomial operator+(ExpPolynomial a, const ExpPolynomial& b) { return a += b; }

    friend ExpPolynomial operator-(const ExpPolynomial& a, const ExpPolynomial& b) { return a + b.scaled(-1.0); }

    friend ExpPolynomial operator*(const ExpPolynomial& a, const ExpPolynomial& b)
    {
        std::vector<ExpTerm> out;
        out.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& x : a.terms_)
            for (const auto& y : b.terms_) out.push_back({x.nu + y.nu, x.s + y.s, x.c * y.c});
        return from_terms(std::move(out));
    }

    friend bool operator==(const ExpPolynomial&, const ExpPolynomial&) = default;

private:
    static bool same_rate(double a, double b) noexcept
    {
        return std::abs(a - b) <= kRateTolerance * (1.0 + std::abs(a));
    }

    void canonicalize()
    {
        for (auto& t : terms_) {
            require(std::isfinite(t.nu) && std::isfinite(t.c.real()) && std::isfinite(t.c.imag()),
                    "ExpPolynomial: non-finite term");
            ensure(t.nu >= -kRateTolerance, "ExpPolynomial: negative rate");
            if (t.nu < kRateTolerance) t.nu = 0.0;
        }
        std::sort(terms_.begin(), terms_.end(), [](const ExpTerm& x, const ExpTerm& y) {
            return x.nu < y.nu || (x.nu == y.nu && x.s < y.s);
        });
        // Snap each rate to the first rate of its cluster, then merge equal (nu, s).
        std::size_t start = 0;
        while (start < terms_.size()) {
            const double rep = terms_[start].nu;
            std::size_t end = start + 1;
            while (end < terms_.size() && same_rate(rep, terms_[end].nu)) terms_[end++].nu = rep;
            std::sort(terms_.begin() + static_cast<std::ptrdiff_t>(start),
                      terms_.begin() + static_cast<std::ptrdiff_t>(end),
                      [](const ExpTerm& x, const ExpTerm& y) { return x.s < y.s; });
            start = end;
        }
        std::vector<ExpTerm> merged;
        merged.reserve(terms_.size());
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().nu == t.nu && merged.back().s == t.s)
                merged.back().c += t.c;
            else
                merged.push_back(t);
        }
        std::erase_if(merged, [](const ExpTerm& t) { return std::abs(t.c) < kDropBelow; });
        ensure(merged.size() <= max_terms,
               "ExpPolynomial: term count " + std::to_string(merged.size()) + " exceeds the guard");
        terms_ = std::move(merged);
    }

    std::vector<ExpTerm> terms_;
};

} // namespace normflow
