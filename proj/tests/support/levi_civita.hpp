#pragma once

// Classical Levi-Civita oracle for Riemannian metrics a_ij(x), coded from
// the direct Christoffel and Riemann formulas with finite-difference
// x-derivatives of a. Independent of the jet pipeline; shares only the sign
// and slot conventions of the engine:
//   R^i_jkl = d_l gamma^i_jk - d_k gamma^i_jl
//             + gamma^m_jk gamma^i_ml - gamma^m_jl gamma^i_mk
//   Ric_jk  = sum_i R^i_jki,  r = a^{jk} Ric_jk.

#include <functional>
#include <span>
#include <vector>

#include "finsler/fd.hpp"

namespace testsupport {

struct LeviCivitaOracle {
    int n;
    std::function<std::vector<double>(std::span<const double>)> a_fn;  // row-major n x n

    std::vector<double> metric(std::span<const double> x) const { return a_fn(x); }

    std::vector<double> inverse(std::span<const double> x) const {
        return invert(a_fn(x));
    }

    // [m][i][j] = d_m a_ij
    std::vector<double> d_metric(std::span<const double> x) const {
        std::vector<double> out(static_cast<std::size_t>(n * n * n));
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto f = [&](std::span<const double> q) {
                        return a_fn(q)[static_cast<std::size_t>(i * n + j)];
                    };
                    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
                    alpha[static_cast<std::size_t>(m)] = 1;
                    out[idx3(m, i, j)] = finsler::fd::partial(f, x, alpha, 1e-4);
                }
        return out;
    }

    // [m1][m2][i][j] = d_m1 d_m2 a_ij
    std::vector<double> dd_metric(std::span<const double> x) const {
        std::vector<double> out(static_cast<std::size_t>(n * n * n * n));
        for (int m1 = 0; m1 < n; ++m1)
            for (int m2 = 0; m2 < n; ++m2)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        auto f = [&](std::span<const double> q) {
                            return a_fn(q)[static_cast<std::size_t>(i * n + j)];
                        };
                        std::vector<int> alpha(static_cast<std::size_t>(n), 0);
                        alpha[static_cast<std::size_t>(m1)] += 1;
                        alpha[static_cast<std::size_t>(m2)] += 1;
                        out[idx4(m1, m2, i, j)] = finsler::fd::partial(f, x, alpha, 1e-3);
                    }
        return out;
    }

    std::vector<double> christoffel(std::span<const double> x) const {
        auto ai = inverse(x);
        auto da = d_metric(x);
        std::vector<double> out(static_cast<std::size_t>(n * n * n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double acc = 0.0;
                    for (int l = 0; l < n; ++l)
                        acc += ai[idx2(i, l)] *
                               (da[idx3(j, l, k)] + da[idx3(k, j, l)] - da[idx3(l, j, k)]);
                    out[idx3(i, j, k)] = 0.5 * acc;
                }
        return out;
    }

    // [m][i][j][k] = d_m gamma^i_jk, assembled analytically from a-derivatives.
    std::vector<double> d_christoffel(std::span<const double> x) const {
        auto ai = inverse(x);
        auto da = d_metric(x);
        auto dda = dd_metric(x);
        std::vector<double> out(static_cast<std::size_t>(n * n * n * n));
        for (int m = 0; m < n; ++m) {
            // d_m a^{il} = -a^{ip} (d_m a_pq) a^{ql}
            std::vector<double> dai(static_cast<std::size_t>(n * n), 0.0);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) {
                    double acc = 0.0;
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            acc -= ai[idx2(i, p)] * da[idx3(m, p, q)] * ai[idx2(q, l)];
                    dai[idx2(i, l)] = acc;
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        double acc = 0.0;
                        for (int l = 0; l < n; ++l) {
                            double s = da[idx3(j, l, k)] + da[idx3(k, j, l)] - da[idx3(l, j, k)];
                            double ds = dda[idx4(m, j, l, k)] + dda[idx4(m, k, j, l)] -
                                        dda[idx4(m, l, j, k)];
                            acc += dai[idx2(i, l)] * s + ai[idx2(i, l)] * ds;
                        }
                        out[idx4(m, i, j, k)] = 0.5 * acc;
                    }
        }
        return out;
    }

    std::vector<double> riemann(std::span<const double> x) const {
        auto gam = christoffel(x);
        auto dgam = d_christoffel(x);
        std::vector<double> out(static_cast<std::size_t>(n * n * n * n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double acc = dgam[idx4(l, i, j, k)] - dgam[idx4(k, i, j, l)];
                        for (int m = 0; m < n; ++m)
                            acc += gam[idx3(m, j, k)] * gam[idx3(i, m, l)] -
                                   gam[idx3(m, j, l)] * gam[idx3(i, m, k)];
                        out[idx4(i, j, k, l)] = acc;
                    }
        return out;
    }

    std::vector<double> ricci(std::span<const double> x) const {
        auto rm = riemann(x);
        std::vector<double> out(static_cast<std::size_t>(n * n));
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += rm[idx4(i, j, k, i)];
                out[idx2(j, k)] = acc;
            }
        return out;
    }

    double scalar(std::span<const double> x) const {
        auto ric = ricci(x);
        auto ai = inverse(x);
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) acc += ai[idx2(j, k)] * ric[idx2(j, k)];
        return acc;
    }

private:
    std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i * n + j); }
    std::size_t idx3(int i, int j, int k) const {
        return static_cast<std::size_t>((i * n + j) * n + k);
    }
    std::size_t idx4(int i, int j, int k, int l) const {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    }

    std::vector<double> invert(std::vector<double> a) const {
        std::vector<double> inv(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i) inv[idx2(i, i)] = 1.0;
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int i = col + 1; i < n; ++i)
                if (std::abs(a[idx2(i, col)]) > std::abs(a[idx2(piv, col)])) piv = i;
            for (int j = 0; j < n; ++j) {
                std::swap(a[idx2(piv, j)], a[idx2(col, j)]);
                std::swap(inv[idx2(piv, j)], inv[idx2(col, j)]);
            }
            double p = a[idx2(col, col)];
            for (int j = 0; j < n; ++j) {
                a[idx2(col, j)] /= p;
                inv[idx2(col, j)] /= p;
            }
            for (int i = 0; i < n; ++i) {
                if (i == col) continue;
                double f = a[idx2(i, col)];
                for (int j = 0; j < n; ++j) {
                    a[idx2(i, j)] -= f * a[idx2(col, j)];
                    inv[idx2(i, j)] -= f * inv[idx2(col, j)];
                }
            }
        }
        return inv;
    }
};

}  // namespace testsupport
