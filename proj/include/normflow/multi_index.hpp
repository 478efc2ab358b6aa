#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "normflow/error.hpp"

namespace normflow {

/// Exponent vector k in Z_+^n, packed into one 64-bit word.
///
/// Exponent j occupies byte (7 - j), so comparing the packed words compares
/// the exponent vectors lexicographically. Dimension is at most 8 and each
/// exponent at most 255, which covers every degree cap the library accepts.
class MultiIndex {
public:
    static constexpr int kMaxDim = 8;
    static constexpr int kMaxExponent = 255;

    MultiIndex() = default;

    explicit MultiIndex(int dim) : dim_(static_cast<std::uint8_t>(dim))
    {
        require(dim >= 1 && dim <= kMaxDim, "MultiIndex: dimension must be in [1, 8]");
    }

    MultiIndex(std::initializer_list<int> exps) : MultiIndex(std::vector<int>(exps)) {}

    explicit MultiIndex(std::span<const int> exps) : MultiIndex(static_cast<int>(exps.size()))
    {
        for (int j = 0; j < dim(); ++j) set(j, exps[static_cast<std::size_t>(j)]);
    }

    explicit MultiIndex(const std::vector<int>& exps) : MultiIndex(std::span<const int>(exps)) {}

    static MultiIndex unit(int dim, int j)
    {
        MultiIndex e(dim);
        e.set(j, 1);
        return e;
    }

    int dim() const noexcept { return dim_; }
    int order() const noexcept { return order_; }
    std::uint64_t packed() const noexcept { return bits_; }

    int operator[](int j) const noexcept
    {
        return static_cast<int>((bits_ >> shift(j)) & 0xFFu);
    }

    void set(int j, int value)
    {
        require(j >= 0 && j < dim(), "MultiIndex: coordinate out of range");
        require(value >= 0 && value <= kMaxExponent, "MultiIndex: exponent out of range [0, 255]");
        order_ += value - (*this)[j];
        bits_ &= ~(std::uint64_t{0xFF} << shift(j));
        bits_ |= static_cast<std::uint64_t>(value) << shift(j);
    }

    /// k + other; dimensions must agree.
    MultiIndex operator+(const MultiIndex& other) const
    {
        require(dim_ == other.dim_, "MultiIndex: dimension mismatch");
        MultiIndex r(*this);
        for (int j = 0; j < dim(); ++j) r.set(j, (*this)[j] + other[j]);
        return r;
    }

    /// Componentwise difference, or false when some entry would go negative.
    bool try_subtract(const MultiIndex& other, MultiIndex& out) const
    {
        if (dim_ != other.dim_) return false;
        out = MultiIndex(dim());
        for (int j = 0; j < dim(); ++j) {
            const int v = (*this)[j] - other[j];
            if (v < 0) return false;
            out.set(j, v);
        }
        return true;
    }

    bool try_decrement(int j, MultiIndex& out) const
    {
        if ((*this)[j] == 0) return false;
        out = *this;
        out.set(j, (*this)[j] - 1);
        return true;
    }

    MultiIndex incremented(int j) const
    {
        MultiIndex r(*this);
        r.set(j, (*this)[j] + 1);
        return r;
    }

    std::vector<int> to_vector() const
    {
        std::vector<int> v(static_cast<std::size_t>(dim()));
        for (int j = 0; j < dim(); ++j) v[static_cast<std::size_t>(j)] = (*this)[j];
        return v;
    }

    /// Exponents joined by '-', e.g. "2-0-1" (trace CSV column format).
    std::string dashed() const
    {
        std::string s;
        for (int j = 0; j < dim(); ++j) {
            if (j) s += '-';
            s += std::to_string((*this)[j]);
        }
        return s;
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept
    {
        return a.dim_ == b.dim_ && a.bits_ == b.bits_;
    }

    friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) noexcept
    {
        if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
        return a.bits_ <=> b.bits_;
    }

private:
    static constexpr int shift(int j) noexcept { return 8 * (kMaxDim - 1 - j); }

    std::uint64_t bits_ = 0;
    std::uint8_t dim_ = 0;
    int order_ = 0;
};

/// All exponent vectors of dimension `dim` and order exactly `degree`, in
/// lexicographic order.
inline std::vector<MultiIndex> indices_of_degree(int dim, int degree)
{
    std::vector<MultiIndex> out;
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    // Recursive composition enumeration, emitted in increasing packed order.
    std::function<void(int, int)> rec = [&](int j, int left) {
        if (j == dim - 1) {
            e[static_cast<std::size_t>(j)] = left;
            out.emplace_back(e);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            e[static_cast<std::size_t>(j)] = v;
            rec(j + 1, left - v);
        }
    };
    rec(0, degree);
    return out;
}

/// |k|! / (k_1! ... k_n!)
inline double multinomial(const MultiIndex& k)
{
    double r = 1.0;
    int acc = 0;
    for (int j = 0; j < k.dim(); ++j) {
        for (int i = 1; i <= k[j]; ++i) {
            ++acc;
            r = r * acc / i;
        }
    }
    return r;
}

} // namespace normflow

template <>
struct std::hash<normflow::MultiIndex> {
    std::size_t operator()(const normflow::MultiIndex& k) const noexcept
    {
        return std::hash<std::uint64_t>{}(k.packed() * 31u + static_cast<std::uint64_t>(k.dim()));
    }
};
