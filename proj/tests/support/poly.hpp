#pragma once

// Dense-map multivariate polynomial with hand-coded differentiation rules.
// Test-only oracle, kept independent of the jet convolution machinery.

#include <cmath>
#include <map>
#include <span>
#include <vector>

namespace testsupport {

struct Poly {
    int nv = 0;
    std::map<std::vector<int>, double> terms;

    static Poly constant(int nv, double v) {
        Poly p;
        p.nv = nv;
        if (v != 0.0) p.terms[std::vector<int>(static_cast<std::size_t>(nv), 0)] = v;
        return p;
    }

    static Poly var(int nv, int i) {
        Poly p;
        p.nv = nv;
        std::vector<int> m(static_cast<std::size_t>(nv), 0);
        m[static_cast<std::size_t>(i)] = 1;
        p.terms[m] = 1.0;
        return p;
    }

    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (const auto& [m, c] : o.terms) r.terms[m] += c;
        return r;
    }

    Poly operator-(const Poly& o) const {
        Poly r = *this;
        for (const auto& [m, c] : o.terms) r.terms[m] -= c;
        return r;
    }

    Poly operator*(const Poly& o) const {
        Poly r;
        r.nv = nv;
        for (const auto& [ma, ca] : terms)
            for (const auto& [mb, cb] : o.terms) {
                std::vector<int> m(static_cast<std::size_t>(nv));
                for (int v = 0; v < nv; ++v)
                    m[static_cast<std::size_t>(v)] =
                        ma[static_cast<std::size_t>(v)] + mb[static_cast<std::size_t>(v)];
                r.terms[m] += ca * cb;
            }
        return r;
    }

    Poly scaled(double s) const {
        Poly r = *this;
        for (auto& [m, c] : r.terms) c *= s;
        return r;
    }

    Poly diff(int v) const {
        Poly r;
        r.nv = nv;
        for (const auto& [m, c] : terms) {
            int e = m[static_cast<std::size_t>(v)];
            if (e == 0) continue;
            std::vector<int> mm = m;
            mm[static_cast<std::size_t>(v)] -= 1;
            r.terms[mm] += c * e;
        }
        return r;
    }

    double eval(std::span<const double> x) const {
        double acc = 0.0;
        for (const auto& [m, c] : terms) {
            double t = c;
            for (int v = 0; v < nv; ++v)
                for (int k = 0; k < m[static_cast<std::size_t>(v)]; ++k)
                    t *= x[static_cast<std::size_t>(v)];
            acc += t;
        }
        return acc;
    }

    /// Raw mixed partial at a point via repeated symbolic differentiation.
    double partial(std::span<const int> alpha, std::span<const double> x) const {
        Poly p = *this;
        for (int v = 0; v < nv; ++v)
            for (int k = 0; k < alpha[static_cast<std::size_t>(v)]; ++k) p = p.diff(v);
        return p.eval(x);
    }

    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms) {
            (void)c;
            int s = 0;
            for (int e : m) s += e;
            if (s > d) d = s;
        }
        return d;
    }
};

}  // namespace testsupport
