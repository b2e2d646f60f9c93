#include "finsler/jets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace finsler::jets {

namespace {

std::mutex cache_mutex;
std::map<std::pair<int, int>, std::shared_ptr<const Tables>>& cache() {
    static std::map<std::pair<int, int>, std::shared_ptr<const Tables>> c;
    return c;
}

void enumerate_degree(int num_vars, int deg, std::vector<std::uint8_t>& cur, int pos, int rem,
                      std::vector<std::uint8_t>& out) {
    if (pos == num_vars - 1) {
        cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(rem);
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int e = rem; e >= 0; --e) {
        cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(e);
        enumerate_degree(num_vars, deg, cur, pos + 1, rem - e, out);
    }
}

}  // namespace

std::shared_ptr<const Tables> Tables::get(int num_vars, int order) {
    if (num_vars < 1) throw std::invalid_argument("jets: num_vars must be positive");
    if (order < 0) throw std::invalid_argument("jets: order must be nonnegative");
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(num_vars, order);
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
    std::shared_ptr<const Tables> t(new Tables(num_vars, order));
    cache().emplace(key, t);
    return t;
}

std::uint64_t Tables::choose(int n, int k) const {
    if (k < 0 || n < 0 || k > n) return 0;
    return binom_[static_cast<std::size_t>(n) * binom_dim_ + static_cast<std::size_t>(k)];
}

Tables::Tables(int num_vars, int order) : num_vars_(num_vars), order_(order) {
    // Pascal triangle large enough for rank arithmetic.
    binom_dim_ = static_cast<std::size_t>(num_vars + order + 2);
    binom_.assign(binom_dim_ * binom_dim_, 0);
    for (std::size_t n = 0; n < binom_dim_; ++n) {
        binom_[n * binom_dim_] = 1;
        for (std::size_t k = 1; k <= n; ++k) {
            binom_[n * binom_dim_ + k] =
                binom_[(n - 1) * binom_dim_ + k - 1] +
                (k <= n - 1 ? binom_[(n - 1) * binom_dim_ + k] : 0);
        }
    }

    deg_start_.assign(static_cast<std::size_t>(order) + 2, 0);
    std::vector<std::uint8_t> cur(static_cast<std::size_t>(num_vars));
    for (int d = 0; d <= order; ++d) {
        deg_start_[static_cast<std::size_t>(d)] = midx_.size() / static_cast<std::size_t>(num_vars);
        enumerate_degree(num_vars, d, cur, 0, d, midx_);
    }
    total_ = midx_.size() / static_cast<std::size_t>(num_vars);
    deg_start_[static_cast<std::size_t>(order) + 1] = total_;

    deg_.resize(total_);
    for (std::size_t r = 0; r < total_; ++r) {
        int s = 0;
        for (int v = 0; v < num_vars; ++v) s += midx_[r * static_cast<std::size_t>(num_vars) + static_cast<std::size_t>(v)];
        deg_[r] = static_cast<std::uint8_t>(s);
    }

    // Derivative index table.
    dtab_.assign(static_cast<std::size_t>(num_vars) * total_, -1);
    std::vector<int> tmp(static_cast<std::size_t>(num_vars));
    for (std::size_t r = 0; r < total_; ++r) {
        auto e = exponents(r);
        for (int v = 0; v < num_vars; ++v) {
            if (e[static_cast<std::size_t>(v)] == 0) continue;
            for (int w = 0; w < num_vars; ++w) tmp[static_cast<std::size_t>(w)] = e[static_cast<std::size_t>(w)];
            tmp[static_cast<std::size_t>(v)] -= 1;
            dtab_[static_cast<std::size_t>(v) * total_ + r] =
                static_cast<std::int64_t>(rank_of(tmp));
        }
    }

    // Multiplication pairs bucketed by target rank, two-pass CSR fill.
    bucket_.assign(total_ + 1, 0);
    std::vector<std::size_t> targets;
    std::size_t pair_count = 0;
    for (std::size_t ra = 0; ra < total_; ++ra) {
        int da = deg_[ra];
        std::size_t rb_end = count(order - da);
        for (std::size_t rb = 0; rb < rb_end; ++rb) ++pair_count;
    }
    targets.reserve(pair_count);
    for (std::size_t ra = 0; ra < total_; ++ra) {
        int da = deg_[ra];
        auto ea = exponents(ra);
        std::size_t rb_end = count(order - da);
        for (std::size_t rb = 0; rb < rb_end; ++rb) {
            auto eb = exponents(rb);
            for (int v = 0; v < num_vars; ++v)
                tmp[static_cast<std::size_t>(v)] = ea[static_cast<std::size_t>(v)] + eb[static_cast<std::size_t>(v)];
            std::size_t t = rank_of(tmp);
            targets.push_back(t);
            bucket_[t + 1] += 1;
        }
    }
    for (std::size_t t = 0; t < total_; ++t) bucket_[t + 1] += bucket_[t];
    pa_.resize(pair_count);
    pb_.resize(pair_count);
    std::vector<std::uint64_t> fill(bucket_.begin(), bucket_.end() - 1);
    std::size_t idx = 0;
    for (std::size_t ra = 0; ra < total_; ++ra) {
        int da = deg_[ra];
        std::size_t rb_end = count(order - da);
        for (std::size_t rb = 0; rb < rb_end; ++rb, ++idx) {
            std::size_t t = targets[idx];
            pa_[fill[t]] = static_cast<std::uint32_t>(ra);
            pb_[fill[t]] = static_cast<std::uint32_t>(rb);
            ++fill[t];
        }
    }
}

std::size_t Tables::rank_of(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != num_vars_)
        throw std::invalid_argument("jets: multi-index has wrong number of variables");
    int d = 0;
    for (int a : alpha) {
        if (a < 0) throw std::invalid_argument("jets: negative exponent in multi-index");
        d += a;
    }
    if (d > order_) throw std::out_of_range("jets: multi-index degree exceeds truncation order");
    std::size_t r = deg_start_[static_cast<std::size_t>(d)];
    int rem = d;
    for (int pos = 0; pos < num_vars_ - 1; ++pos) {
        int vars_left = num_vars_ - pos - 1;
        for (int e = rem; e > alpha[static_cast<std::size_t>(pos)]; --e) {
            // compositions of rem - e into vars_left parts
            r += choose(rem - e + vars_left - 1, vars_left - 1);
        }
        rem -= alpha[static_cast<std::size_t>(pos)];
    }
    return r;
}

Jet::Jet(std::shared_ptr<const Tables> tab, int order)
    : tab_(std::move(tab)), order_(order), c_(tab_->count(order), 0.0) {}

Jet Jet::constant(std::shared_ptr<const Tables> tab, int order, double v) {
    if (order < 0 || order > tab->order())
        throw std::invalid_argument("jets: order outside table range");
    Jet j(std::move(tab), order);
    j.c_[0] = v;
    return j;
}

Jet Jet::variable(std::shared_ptr<const Tables> tab, int order,
                  std::span<const double> point, int index) {
    if (order < 0 || order > tab->order())
        throw std::invalid_argument("jets: order outside table range");
    if (static_cast<int>(point.size()) != tab->num_vars())
        throw std::invalid_argument("jets: point size does not match num_vars");
    if (index < 0 || index >= tab->num_vars())
        throw std::out_of_range("jets: variable index out of range");
    Jet j(std::move(tab), order);
    j.c_[0] = point[static_cast<std::size_t>(index)];
    if (order >= 1) j.c_[1 + static_cast<std::size_t>(index)] = 1.0;
    return j;
}

void Jet::check_valid() const {
    if (!tab_) throw std::invalid_argument("jets: operation on empty jet");
}

void Jet::check_binary(const Jet& a, const Jet& b) {
    a.check_valid();
    b.check_valid();
    if (a.num_vars() != b.num_vars() || a.order_ != b.order_)
        throw std::invalid_argument("jets: config mismatch between operands");
}

double Jet::partial(std::span<const int> alpha) const {
    check_valid();
    int d = 0;
    for (int a : alpha) d += a;
    if (d > order_) throw std::out_of_range("jets: requested partial exceeds truncation order");
    std::size_t r = tab_->rank_of(alpha);
    double fact = 1.0;
    for (int a : alpha)
        for (int k = 2; k <= a; ++k) fact *= k;
    return c_[r] * fact;
}

Jet Jet::truncated(int new_order) const {
    check_valid();
    if (new_order > order_ || new_order < 0)
        throw std::invalid_argument("jets: truncation order out of range");
    if (new_order == order_) return *this;
    Jet out(tab_, new_order);
    std::copy(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(out.c_.size()), out.c_.begin());
    return out;
}

Jet Jet::derivative(int var) const {
    check_valid();
    if (var < 0 || var >= num_vars()) throw std::out_of_range("jets: derivative index out of range");
    if (order_ < 1) throw std::invalid_argument("jets: cannot differentiate an order-0 jet");
    Jet out(tab_, order_ - 1);
    std::size_t n = c_.size();
    for (std::size_t r = 0; r < n; ++r) {
        auto lo = tab_->lower(var, r);
        if (lo < 0) continue;
        int e = tab_->exponents(r)[static_cast<std::size_t>(var)];
        out.c_[static_cast<std::size_t>(lo)] = c_[r] * e;
    }
    return out;
}

Jet Jet::operator-() const {
    check_valid();
    Jet out = *this;
    for (double& v : out.c_) v = -v;
    return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
    check_binary(*this, rhs);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += rhs.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
    check_binary(*this, rhs);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= rhs.c_[i];
    return *this;
}

Jet& Jet::operator*=(double rhs) {
    check_valid();
    for (double& v : c_) v *= rhs;
    return *this;
}

Jet operator-(double a, const Jet& b) {
    Jet out = -b;
    out.c_[0] += a;
    return out;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet::check_binary(a, b);
    Jet out(a.tab_, a.order_);
    const auto* pa = a.tab_->pair_a();
    const auto* pb = a.tab_->pair_b();
    const auto* bk = a.tab_->bucket();
    const double* ca = a.c_.data();
    const double* cb = b.c_.data();
    const std::size_t nt = out.c_.size();
    for (std::size_t t = 0; t < nt; ++t) {
        double s = 0.0;
        for (std::uint64_t p = bk[t]; p < bk[t + 1]; ++p) s += ca[pa[p]] * cb[pb[p]];
        out.c_[t] = s;
    }
    return out;
}

Jet operator/(const Jet& a, const Jet& b) {
    Jet::check_binary(a, b);
    if (b.c_[0] == 0.0) throw std::domain_error("jets: division by jet with zero constant term");
    Jet out(a.tab_, a.order_);
    const auto* pa = a.tab_->pair_a();
    const auto* pb = a.tab_->pair_b();
    const auto* bk = a.tab_->bucket();
    const double inv = 1.0 / b.c_[0];
    const std::size_t nt = out.c_.size();
    for (std::size_t t = 0; t < nt; ++t) {
        double s = a.c_[t];
        // b * out convolution, excluding the (const, t) pair handled by inv
        for (std::uint64_t p = bk[t]; p < bk[t + 1]; ++p) {
            std::uint32_t rb = pa[p];  // factor from b
            std::uint32_t rc = pb[p];  // factor from out, already computed (lower degree)
            if (rb == 0) continue;
            s -= b.c_[rb] * out.c_[rc];
        }
        out.c_[t] = s * inv;
    }
    return out;
}

Jet operator/(double a, const Jet& b) {
    b.check_valid();
    return Jet::constant(b.tab_, b.order_, a) / b;
}

Jet sqrt(const Jet& a) {
    a.check_valid();
    if (a.c_[0] <= 0.0) throw std::domain_error("jets: sqrt of non-positive constant term");
    Jet out(a.tab_, a.order_);
    const auto* pa = a.tab_->pair_a();
    const auto* pb = a.tab_->pair_b();
    const auto* bk = a.tab_->bucket();
    out.c_[0] = std::sqrt(a.c_[0]);
    const double inv2s0 = 0.5 / out.c_[0];
    const std::size_t nt = out.c_.size();
    for (std::size_t t = 1; t < nt; ++t) {
        double s = a.c_[t];
        for (std::uint64_t p = bk[t]; p < bk[t + 1]; ++p) {
            std::uint32_t ra = pa[p];
            std::uint32_t rb = pb[p];
            if (ra == 0 || rb == 0) continue;  // the 2 s0 s_t part
            s -= out.c_[ra] * out.c_[rb];
        }
        out.c_[t] = s * inv2s0;
    }
    return out;
}

Jet Jet::compose(const Jet& a, std::span<const double> coef) {
    Jet ubar = a;
    ubar.c_[0] = 0.0;
    Jet acc = Jet::constant(a.tab_, a.order_, coef[0]);
    Jet po = Jet::constant(a.tab_, a.order_, 1.0);
    for (int k = 1; k <= a.order_; ++k) {
        po = po * ubar;
        Jet term = po;
        term *= coef[static_cast<std::size_t>(k)];
        acc += term;
    }
    return acc;
}

Jet exp(const Jet& a) {
    a.check_valid();
    std::vector<double> coef(static_cast<std::size_t>(a.order_) + 1);
    double e0 = std::exp(a.c_[0]);
    double fact = 1.0;
    for (int k = 0; k <= a.order_; ++k) {
        if (k > 0) fact *= k;
        coef[static_cast<std::size_t>(k)] = e0 / fact;
    }
    return Jet::compose(a, coef);
}

Jet log(const Jet& a) {
    a.check_valid();
    if (a.c_[0] <= 0.0) throw std::domain_error("jets: log of non-positive constant term");
    std::vector<double> coef(static_cast<std::size_t>(a.order_) + 1);
    coef[0] = std::log(a.c_[0]);
    double powu = 1.0;
    for (int k = 1; k <= a.order_; ++k) {
        powu *= a.c_[0];
        coef[static_cast<std::size_t>(k)] = ((k % 2 == 1) ? 1.0 : -1.0) / (k * powu);
    }
    return Jet::compose(a, coef);
}

Jet sin(const Jet& a) {
    a.check_valid();
    std::vector<double> coef(static_cast<std::size_t>(a.order_) + 1);
    const double s = std::sin(a.c_[0]);
    const double c = std::cos(a.c_[0]);
    const double cycle[4] = {s, c, -s, -c};
    double fact = 1.0;
    for (int k = 0; k <= a.order_; ++k) {
        if (k > 0) fact *= k;
        coef[static_cast<std::size_t>(k)] = cycle[k % 4] / fact;
    }
    return Jet::compose(a, coef);
}

Jet cos(const Jet& a) {
    a.check_valid();
    std::vector<double> coef(static_cast<std::size_t>(a.order_) + 1);
    const double s = std::sin(a.c_[0]);
    const double c = std::cos(a.c_[0]);
    const double cycle[4] = {c, -s, -c, s};
    double fact = 1.0;
    for (int k = 0; k <= a.order_; ++k) {
        if (k > 0) fact *= k;
        coef[static_cast<std::size_t>(k)] = cycle[k % 4] / fact;
    }
    return Jet::compose(a, coef);
}

Jet pow_int(const Jet& a, long long e) {
    a.check_valid();
    if (e < 0) return 1.0 / pow_int(a, -e);
    Jet acc = Jet::constant(a.tab_, a.order_, 1.0);
    Jet base = a;
    unsigned long long k = static_cast<unsigned long long>(e);
    while (k > 0) {
        if (k & 1ull) acc = acc * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return acc;
}

Jet pow(const Jet& a, double p) {
    double ip = 0.0;
    if (std::modf(p, &ip) == 0.0 && std::abs(ip) < 64)
        return pow_int(a, static_cast<long long>(ip));
    a.check_valid();
    if (a.c_[0] <= 0.0)
        throw std::domain_error("jets: non-integer power of non-positive constant term");
    return exp(p * log(a));
}

Jet apply(Op op, const Jet& a, const Jet* b) {
    auto need_b = [&]() -> const Jet& {
        if (!b) throw std::invalid_argument("jets: binary operation requires a second operand");
        return *b;
    };
    switch (op) {
        case Op::Add: return a + need_b();
        case Op::Sub: return a - need_b();
        case Op::Mul: return a * need_b();
        case Op::Div: return a / need_b();
        case Op::PowInt: {
            const Jet& e = need_b();
            double v = e.value();
            double ip = 0.0;
            if (std::modf(v, &ip) != 0.0)
                throw std::invalid_argument("jets: pow_int exponent must be integral");
            return pow_int(a, static_cast<long long>(ip));
        }
        case Op::Sqrt: return sqrt(a);
        case Op::Exp: return exp(a);
        case Op::Log: return log(a);
        case Op::Sin: return sin(a);
        case Op::Cos: return cos(a);
    }
    throw std::invalid_argument("jets: unknown operation");
}

}  // namespace finsler::jets
