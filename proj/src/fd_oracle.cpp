#include "finsler/fd_oracle.hpp"

#include <cmath>
#include <map>

#include "finsler/fd.hpp"

namespace finsler::oracle {

namespace {

/// Cached raw mixed partials of the energy at a fixed point, keyed by the
/// multi-index over the 2n chart variables.
class RawTable {
public:
    RawTable(const zoo::FinslerMetric& m, const geom::TMPoint& p) : m_(m), n_(m.n) {
        pt_.assign(p.x.begin(), p.x.end());
        pt_.insert(pt_.end(), p.y.begin(), p.y.end());
    }

    /// alpha addressed as (x_1..x_n, y_1..y_n)
    double raw(const std::vector<int>& alpha) {
        auto it = cache_.find(alpha);
        if (it != cache_.end()) return it->second;
        auto f = [this](std::span<const double> q) {
            return m_.energy_value(q.subspan(0, static_cast<std::size_t>(n_)),
                                   q.subspan(static_cast<std::size_t>(n_)));
        };
        int total = 0;
        for (int a : alpha) total += a;
        double v = total == 0 ? f(pt_) : fd::partial(f, pt_, alpha, fd::step_for_order(total));
        cache_.emplace(alpha, v);
        return v;
    }

    // convenience builders: xs are base indices, ys fiber indices
    double dxy(std::initializer_list<int> xs, std::initializer_list<int> ys) {
        std::vector<int> alpha(static_cast<std::size_t>(2 * n_), 0);
        for (int m : xs) alpha[static_cast<std::size_t>(m)] += 1;
        for (int i : ys) alpha[static_cast<std::size_t>(n_ + i)] += 1;
        return raw(alpha);
    }

private:
    const zoo::FinslerMetric& m_;
    int n_;
    std::vector<double> pt_;
    std::map<std::vector<int>, double> cache_;
};

std::vector<double> invert_matrix(const std::vector<double>& g, int n) {
    std::vector<double> a = g;
    std::vector<double> inv(static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(a[static_cast<std::size_t>(i * n + c)]) >
                std::abs(a[static_cast<std::size_t>(piv * n + c)]))
                piv = i;
        for (int j = 0; j < n; ++j) {
            std::swap(a[static_cast<std::size_t>(piv * n + j)], a[static_cast<std::size_t>(c * n + j)]);
            std::swap(inv[static_cast<std::size_t>(piv * n + j)], inv[static_cast<std::size_t>(c * n + j)]);
        }
        double pv = a[static_cast<std::size_t>(c * n + c)];
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(c * n + j)] /= pv;
            inv[static_cast<std::size_t>(c * n + j)] /= pv;
        }
        for (int i = 0; i < n; ++i) {
            if (i == c) continue;
            double f = a[static_cast<std::size_t>(i * n + c)];
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(i * n + j)] -= f * a[static_cast<std::size_t>(c * n + j)];
                inv[static_cast<std::size_t>(i * n + j)] -= f * inv[static_cast<std::size_t>(c * n + j)];
            }
        }
    }
    return inv;
}

double frob(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

FdTensors fd_tensors(const zoo::FinslerMetric& m, const geom::TMPoint& p) {
    const int n = m.n;
    RawTable raw(m, p);
    const auto& y = p.y;

    auto i2 = [&](int i, int j) { return static_cast<std::size_t>(i * n + j); };
    auto i3 = [&](int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); };
    auto i4 = [&](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };

    FdTensors out;

    // fundamental tensor and fiber derivatives of it
    out.g.assign(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> dyg(static_cast<std::size_t>(n * n * n));      // [k][i][j]
    std::vector<double> ddyg(static_cast<std::size_t>(n * n * n * n)); // [u][k][i][j]
    std::vector<double> dxg(static_cast<std::size_t>(n * n * n));      // [m][i][j]
    std::vector<double> dxdyg(static_cast<std::size_t>(n * n * n * n));// [t][m][i][j]
    std::vector<double> dx2g(static_cast<std::size_t>(n * n * n * n)); // [m1][m2][i][j]
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.g[i2(i, j)] = 0.5 * raw.dxy({}, {i, j});
            for (int k = 0; k < n; ++k) {
                dyg[i3(k, i, j)] = 0.5 * raw.dxy({}, {i, j, k});
                dxg[i3(k, i, j)] = 0.5 * raw.dxy({k}, {i, j});
                for (int u = 0; u < n; ++u) {
                    ddyg[i4(u, k, i, j)] = 0.5 * raw.dxy({}, {i, j, k, u});
                    dxdyg[i4(u, k, i, j)] = 0.5 * raw.dxy({k}, {i, j, u});
                    dx2g[i4(u, k, i, j)] = 0.5 * raw.dxy({u, k}, {i, j});
                }
            }
        }
    out.g_inv = invert_matrix(out.g, n);

    // derivatives of the inverse metric
    auto sandwich = [&](const std::vector<double>& dM, int slot) {
        // -g^{-1} (d g)[slot] g^{-1}
        std::vector<double> outm(static_cast<std::size_t>(n * n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                double acc = 0.0;
                for (int pq = 0; pq < n; ++pq)
                    for (int q = 0; q < n; ++q)
                        acc -= out.g_inv[i2(i, pq)] * dM[i3(slot, pq, q)] * out.g_inv[i2(q, l)];
                outm[i2(i, l)] = acc;
            }
        return outm;
    };
    std::vector<std::vector<double>> dyginv(static_cast<std::size_t>(n)),
        dxginv(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        dyginv[static_cast<std::size_t>(k)] = sandwich(dyg, k);
        dxginv[static_cast<std::size_t>(k)] = sandwich(dxg, k);
    }

    // spray data: V_l = y^m W_lm - U_l with W = mixed fiber/base second
    // derivatives of the energy
    std::vector<double> V(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dyV(static_cast<std::size_t>(n * n));   // [j][l]
    std::vector<double> dxV(static_cast<std::size_t>(n * n));   // [p][l]
    std::vector<double> ddyV(static_cast<std::size_t>(n * n * n));  // [u][j][l]
    std::vector<double> dxdyV(static_cast<std::size_t>(n * n * n)); // [p][j][l]
    for (int l = 0; l < n; ++l) {
        double acc = -raw.dxy({l}, {});
        for (int mm = 0; mm < n; ++mm) acc += y[static_cast<std::size_t>(mm)] * raw.dxy({mm}, {l});
        V[static_cast<std::size_t>(l)] = acc;
        for (int j = 0; j < n; ++j) {
            double a = raw.dxy({j}, {l}) - raw.dxy({l}, {j});
            for (int mm = 0; mm < n; ++mm) a += y[static_cast<std::size_t>(mm)] * raw.dxy({mm}, {j, l});
            dyV[i2(j, l)] = a;
            double b = -raw.dxy({l, j}, {});
            for (int mm = 0; mm < n; ++mm) b += y[static_cast<std::size_t>(mm)] * raw.dxy({mm, j}, {l});
            dxV[i2(j, l)] = b;
            for (int u = 0; u < n; ++u) {
                double c = raw.dxy({j}, {l, u}) - raw.dxy({l}, {j, u}) + raw.dxy({u}, {j, l});
                for (int mm = 0; mm < n; ++mm)
                    c += y[static_cast<std::size_t>(mm)] * raw.dxy({mm}, {j, l, u});
                ddyV[i3(u, j, l)] = c;
                double d = raw.dxy({j, u}, {l}) - raw.dxy({l, u}, {j});
                for (int mm = 0; mm < n; ++mm)
                    d += y[static_cast<std::size_t>(mm)] * raw.dxy({mm, u}, {j, l});
                dxdyV[i3(u, j, l)] = d;
            }
        }
    }

    out.spray.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += out.g_inv[i2(i, l)] * V[static_cast<std::size_t>(l)];
        out.spray[static_cast<std::size_t>(i)] = 0.25 * acc;
    }

    // nonlinear connection N^i_j and its derivatives
    out.N.assign(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> dyN(static_cast<std::size_t>(n * n * n));  // [u][i][j]
    std::vector<double> dxN(static_cast<std::size_t>(n * n * n));  // [p][i][j]
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l)
                acc += dyginv[static_cast<std::size_t>(j)][i2(i, l)] * V[static_cast<std::size_t>(l)] +
                       out.g_inv[i2(i, l)] * dyV[i2(j, l)];
            out.N[i2(i, j)] = 0.25 * acc;
        }
    for (int u = 0; u < n; ++u) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                // d_u (dyginv[j]) = -dyginv[u] dyg[j] ginv - ginv ddyg[u][j] ginv - ginv dyg[j] dyginv[u]
                double accY = 0.0, accX = 0.0;
                for (int l = 0; l < n; ++l) {
                    double t1 = 0.0, t2 = 0.0;
                    for (int pq = 0; pq < n; ++pq)
                        for (int q = 0; q < n; ++q) {
                            t1 += -dyginv[static_cast<std::size_t>(u)][i2(i, pq)] * dyg[i3(j, pq, q)] *
                                      out.g_inv[i2(q, l)] -
                                  out.g_inv[i2(i, pq)] * ddyg[i4(u, j, pq, q)] * out.g_inv[i2(q, l)] -
                                  out.g_inv[i2(i, pq)] * dyg[i3(j, pq, q)] *
                                      dyginv[static_cast<std::size_t>(u)][i2(q, l)];
                            t2 += -dxginv[static_cast<std::size_t>(u)][i2(i, pq)] * dyg[i3(j, pq, q)] *
                                      out.g_inv[i2(q, l)] -
                                  out.g_inv[i2(i, pq)] * dxdyg[i4(j, u, pq, q)] * out.g_inv[i2(q, l)] -
                                  out.g_inv[i2(i, pq)] * dyg[i3(j, pq, q)] *
                                      dxginv[static_cast<std::size_t>(u)][i2(q, l)];
                        }
                    accY += t1 * V[static_cast<std::size_t>(l)] +
                            dyginv[static_cast<std::size_t>(j)][i2(i, l)] * dyV[i2(u, l)] +
                            dyginv[static_cast<std::size_t>(u)][i2(i, l)] * dyV[i2(j, l)] +
                            out.g_inv[i2(i, l)] * ddyV[i3(u, j, l)];
                    accX += t2 * V[static_cast<std::size_t>(l)] +
                            dyginv[static_cast<std::size_t>(j)][i2(i, l)] * dxV[i2(u, l)] +
                            dxginv[static_cast<std::size_t>(u)][i2(i, l)] * dyV[i2(j, l)] +
                            out.g_inv[i2(i, l)] * dxdyV[i3(u, j, l)];
                }
                dyN[i3(u, i, j)] = 0.25 * accY;
                dxN[i3(u, i, j)] = 0.25 * accX;
            }
    }

    // horizontal derivative of the metric and the connection coefficients
    auto dgd = [&](int a, int i, int j) {
        double acc = dxg[i3(a, i, j)];
        for (int rr = 0; rr < n; ++rr) acc -= out.N[i2(rr, a)] * dyg[i3(rr, i, j)];
        return acc;
    };
    out.Gamma.assign(static_cast<std::size_t>(n * n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int rr = 0; rr < n; ++rr)
                    acc += out.g_inv[i2(i, rr)] *
                           (dgd(j, rr, k) + dgd(k, j, rr) - dgd(rr, j, k));
                out.Gamma[i3(i, j, k)] = 0.5 * acc;
            }

    // base and fiber derivatives of dgd, then of Gamma
    auto dx_dgd = [&](int p, int a, int i, int j) {
        double acc = dx2g[i4(p, a, i, j)];
        for (int rr = 0; rr < n; ++rr)
            acc -= dxN[i3(p, rr, a)] * dyg[i3(rr, i, j)] + out.N[i2(rr, a)] * dxdyg[i4(rr, p, i, j)];
        return acc;
    };
    auto dy_dgd = [&](int t, int a, int i, int j) {
        double acc = dxdyg[i4(t, a, i, j)];
        for (int rr = 0; rr < n; ++rr)
            acc -= dyN[i3(t, rr, a)] * dyg[i3(rr, i, j)] + out.N[i2(rr, a)] * ddyg[i4(t, rr, i, j)];
        return acc;
    };
    auto dx_gamma = [&](int p, int i, int j, int k) {
        double acc = 0.0;
        for (int rr = 0; rr < n; ++rr) {
            double S = dgd(j, rr, k) + dgd(k, j, rr) - dgd(rr, j, k);
            double dS = dx_dgd(p, j, rr, k) + dx_dgd(p, k, j, rr) - dx_dgd(p, rr, j, k);
            acc += dxginv[static_cast<std::size_t>(p)][i2(i, rr)] * S + out.g_inv[i2(i, rr)] * dS;
        }
        return 0.5 * acc;
    };
    auto dy_gamma = [&](int t, int i, int j, int k) {
        double acc = 0.0;
        for (int rr = 0; rr < n; ++rr) {
            double S = dgd(j, rr, k) + dgd(k, j, rr) - dgd(rr, j, k);
            double dS = dy_dgd(t, j, rr, k) + dy_dgd(t, k, j, rr) - dy_dgd(t, rr, j, k);
            acc += dyginv[static_cast<std::size_t>(t)][i2(i, rr)] * S + out.g_inv[i2(i, rr)] * dS;
        }
        return 0.5 * acc;
    };
    auto delta_gamma = [&](int mm, int i, int j, int k) {
        double acc = dx_gamma(mm, i, j, k);
        for (int t = 0; t < n; ++t) acc -= out.N[i2(t, mm)] * dy_gamma(t, i, j, k);
        return acc;
    };
    auto delta_N = [&](int mm, int i, int j) {
        double acc = dxN[i3(mm, i, j)];
        for (int t = 0; t < n; ++t) acc -= out.N[i2(t, mm)] * dyN[i3(t, i, j)];
        return acc;
    };

    // curvature with the correction through the raised Cartan tensor
    std::vector<double> cup(static_cast<std::size_t>(n * n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int rr = 0; rr < n; ++rr)
                    acc += out.g_inv[i2(i, rr)] * 0.25 * raw.dxy({}, {rr, j, k});
                cup[i3(i, j, k)] = acc;
            }
    out.R.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double acc = delta_gamma(l, i, j, k) - delta_gamma(k, i, j, l);
                    for (int mm = 0; mm < n; ++mm) {
                        acc += out.Gamma[i3(mm, j, k)] * out.Gamma[i3(i, mm, l)] -
                               out.Gamma[i3(mm, j, l)] * out.Gamma[i3(i, mm, k)];
                        double rhat = delta_N(l, mm, k) - delta_N(k, mm, l);
                        acc += cup[i3(i, j, mm)] * rhat;
                    }
                    out.R[i4(i, j, k, l)] = acc;
                }
    return out;
}

CompareResult compare(const zoo::FinslerMetric& m, const geom::TMPoint& p, int order) {
    geom::PointFrame f(m, p, geom::Depth::Base, order);
    auto jet = f.values();
    auto fd = fd_tensors(m, p);

    CompareResult out;
    auto push = [&](const char* name, const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
        Deviation d;
        d.tensor = name;
        d.rel = frob(diff) / std::max(frob(b), 1.0);
        out.per_tensor.push_back(d);
        out.max_rel = std::max(out.max_rel, d.rel);
    };
    push("g", fd.g, jet.g);
    push("spray", fd.spray, jet.spray);
    push("N", fd.N, jet.N);
    push("Gamma", fd.Gamma, jet.Gamma);
    push("R", fd.R, jet.R);
    return out;
}

}  // namespace finsler::oracle
