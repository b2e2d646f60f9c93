#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace finsler::jets {

/// Shared combinatorial tables for truncated multivariate Taylor arithmetic
/// in a fixed number of variables up to a fixed total degree.
///
/// Multi-indices are ranked in graded lexicographic order (by total degree,
/// then lexicographically with the first variable dominant). Ranks are
/// prefix-stable: the multi-indices of total degree <= k occupy the first
/// count(k) ranks for every k <= order, so one table serves jets of any
/// lower truncation order.
class Tables {
public:
    /// Fetch (or build and cache) the tables for num_vars variables
    /// truncated at total degree `order`.
    static std::shared_ptr<const Tables> get(int num_vars, int order);

    int num_vars() const { return num_vars_; }
    int order() const { return order_; }

    /// Number of multi-indices with total degree <= ord.
    std::size_t count(int ord) const { return deg_start_[static_cast<std::size_t>(ord) + 1]; }

    /// Exponent tuple of a rank.
    std::span<const std::uint8_t> exponents(std::size_t rank) const {
        return {midx_.data() + rank * static_cast<std::size_t>(num_vars_),
                static_cast<std::size_t>(num_vars_)};
    }

    int degree(std::size_t rank) const { return deg_[rank]; }

    /// Rank of a multi-index; throws std::out_of_range when |alpha| > order.
    std::size_t rank_of(std::span<const int> alpha) const;

    /// Rank of alpha - e_var for rank `r`, or -1 when the exponent is zero.
    std::int64_t lower(int var, std::size_t rank) const {
        return dtab_[static_cast<std::size_t>(var) * total_ + rank];
    }

    // Multiplication pairs grouped by target rank: for target t the ordered
    // pairs (a, b) with midx[a] + midx[b] == midx[t] live in
    // [bucket_[t], bucket_[t + 1]).
    const std::uint32_t* pair_a() const { return pa_.data(); }
    const std::uint32_t* pair_b() const { return pb_.data(); }
    const std::uint64_t* bucket() const { return bucket_.data(); }

private:
    Tables(int num_vars, int order);

    int num_vars_;
    int order_;
    std::size_t total_;
    std::vector<std::size_t> deg_start_;   // per-degree cumulative offsets
    std::vector<std::uint8_t> midx_;       // total_ x num_vars exponents
    std::vector<std::uint8_t> deg_;
    std::vector<std::int64_t> dtab_;       // num_vars x total_
    std::vector<std::uint64_t> bucket_;
    std::vector<std::uint32_t> pa_, pb_;
    std::vector<std::uint64_t> binom_;     // pascal triangle, row-major
    std::size_t binom_dim_;

    std::uint64_t choose(int n, int k) const;
};

/// A truncated multivariate Taylor expansion (jet) of a scalar function.
///
/// Coefficients are Taylor-normalized: c_alpha = d^alpha f / alpha!, so
/// products are plain coefficient convolutions. Raw partial derivatives are
/// reconstructed on extraction. Values are immutable; every operation
/// returns a fresh jet.
class Jet {
public:
    Jet() = default;

    static Jet constant(std::shared_ptr<const Tables> tab, int order, double v);

    /// Jet of the coordinate function v_index expanded at `point`.
    static Jet variable(std::shared_ptr<const Tables> tab, int order,
                        std::span<const double> point, int index);

    bool valid() const { return tab_ != nullptr; }
    int order() const { return order_; }
    int num_vars() const { return tab_ ? tab_->num_vars() : 0; }
    const std::shared_ptr<const Tables>& tables() const { return tab_; }

    double value() const { return c_[0]; }
    double coeff(std::size_t rank) const { return c_[rank]; }
    std::span<const double> coeffs() const { return c_; }

    /// Raw mixed partial d^alpha f, i.e. alpha! * c_alpha.
    double partial(std::span<const int> alpha) const;

    /// Same jet truncated to a lower total degree.
    Jet truncated(int new_order) const;

    /// Partial derivative with respect to variable `var`; drops one order.
    Jet derivative(int var) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& rhs);
    Jet& operator-=(const Jet& rhs);
    Jet& operator+=(double rhs) { c_[0] += rhs; return *this; }
    Jet& operator-=(double rhs) { c_[0] -= rhs; return *this; }
    Jet& operator*=(double rhs);

    friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
    friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
    friend Jet operator+(Jet a, double b) { a += b; return a; }
    friend Jet operator+(double a, Jet b) { b += a; return b; }
    friend Jet operator-(Jet a, double b) { a -= b; return a; }
    friend Jet operator-(double a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator*(Jet a, double b) { a *= b; return a; }
    friend Jet operator*(double a, Jet b) { b *= a; return b; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(Jet a, double b) { a *= 1.0 / b; return a; }
    friend Jet operator/(double a, const Jet& b);

    friend Jet sqrt(const Jet& a);
    friend Jet exp(const Jet& a);
    friend Jet log(const Jet& a);
    friend Jet sin(const Jet& a);
    friend Jet cos(const Jet& a);
    friend Jet pow_int(const Jet& a, long long e);
    friend Jet pow(const Jet& a, double p);

private:
    Jet(std::shared_ptr<const Tables> tab, int order);

    static void check_binary(const Jet& a, const Jet& b);
    void check_valid() const;

    /// Compose the analytic series sum_k coef[k] (a - a0)^k.
    static Jet compose(const Jet& a, std::span<const double> coef);

    std::shared_ptr<const Tables> tab_;
    int order_ = -1;
    std::vector<double> c_;
};

/// Named elementary operation, mirroring the engine's public op table.
enum class Op { Add, Sub, Mul, Div, PowInt, Sqrt, Exp, Log, Sin, Cos };

/// Apply a named operation; binary ops require `b`, unary ops ignore it.
/// PowInt reads the exponent from b's constant term (must be integral).
Jet apply(Op op, const Jet& a, const Jet* b = nullptr);

}  // namespace finsler::jets
