#include "finsler/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace finsler::geom {

namespace {

using jets::Jet;
using jets::Tables;

Jet mul_at(const Jet& a, const Jet& b, int ord) {
    return a.truncated(ord) * b.truncated(ord);
}

int min_order_for(Depth depth) {
    switch (depth) {
        case Depth::Base: return 4;
        case Depth::First: return 5;
        case Depth::Second: return 8;  // second h-derivative pipeline contract
    }
    return 8;
}

/// Gauss-Jordan inverse of a jet matrix with value-magnitude pivoting.
std::vector<Jet> invert(const std::vector<Jet>& a_in, int n) {
    std::vector<Jet> a = a_in;
    const int ord = a[0].order();
    auto tab = a[0].tables();
    std::vector<Jet> inv;
    inv.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv.push_back(Jet::constant(tab, ord, i == j ? 1.0 : 0.0));

    auto A = [&](int i, int j) -> Jet& { return a[static_cast<std::size_t>(i * n + j)]; };
    auto B = [&](int i, int j) -> Jet& { return inv[static_cast<std::size_t>(i * n + j)]; };

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(A(i, col).value()) > std::abs(A(piv, col).value())) piv = i;
        if (std::abs(A(piv, col).value()) < 1e-300)
            throw DegeneratePoint("fundamental tensor is singular at this point");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(A(piv, j), A(col, j));
                std::swap(B(piv, j), B(col, j));
            }
        Jet p = A(col, col);
        for (int j = 0; j < n; ++j) {
            A(col, j) = A(col, j) / p;
            B(col, j) = B(col, j) / p;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            Jet f = A(i, col);
            if (f.value() == 0.0) {
                bool all_zero = true;
                for (double c : f.coeffs())
                    if (c != 0.0) all_zero = false;
                if (all_zero) continue;
            }
            for (int j = 0; j < n; ++j) {
                A(i, j) -= f * A(col, j);
                B(i, j) -= f * B(col, j);
            }
        }
    }
    return inv;
}

}  // namespace

PointFrame::PointFrame(const zoo::FinslerMetric& m, const TMPoint& p, Depth dep, int ord)
    : n(m.n), depth(dep), order(ord), point(p) {
    if (static_cast<int>(p.x.size()) != n || static_cast<int>(p.y.size()) != n)
        throw std::invalid_argument("point dimension does not match the metric");
    if (order < min_order_for(depth))
        throw std::invalid_argument("jet order insufficient for the requested depth");
    if (!m.domain(p.x, p.y)) throw DegeneratePoint("point rejected by the metric domain");

    const int nv = 2 * n;
    auto tab = Tables::get(nv, order);
    std::vector<double> pt(p.x.begin(), p.x.end());
    pt.insert(pt.end(), p.y.begin(), p.y.end());
    for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(tab, order, pt, i));
    for (int i = 0; i < n; ++i) yj.push_back(Jet::variable(tab, order, pt, n + i));

    F2 = m.energy(xj, yj);

    auto idx2 = [&](int i, int j) { return static_cast<std::size_t>(i * n + j); };
    auto idx3 = [&](int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); };
    auto idx4 = [&](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };

    // Fundamental tensor from second fiber derivatives.
    g.resize(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        Jet di = F2.derivative(n + i);
        for (int j = i; j < n; ++j) {
            Jet gij = 0.5 * di.derivative(n + j);
            g[idx2(i, j)] = gij;
            if (j != i) g[idx2(j, i)] = gij;
        }
    }

    // Degeneracy gate: Cholesky positivity plus a determinant floor.
    {
        std::vector<double> gv(static_cast<std::size_t>(n * n));
        for (std::size_t k = 0; k < gv.size(); ++k) gv[k] = g[k].value();
        double scale = 0.0;
        for (int i = 0; i < n; ++i) scale += std::abs(gv[idx2(i, i)]);
        scale /= n;
        if (!zoo::positive_definite(gv, n))
            throw DegeneratePoint("fundamental tensor is not positive definite at this point");
        // det via Cholesky pivots
        std::vector<double> a = gv;
        double det = 1.0;
        for (int k = 0; k < n; ++k) {
            double d = a[idx2(k, k)];
            for (int s = 0; s < k; ++s) d -= a[idx2(k, s)] * a[idx2(k, s)];
            det *= d;
            d = std::sqrt(d);
            a[idx2(k, k)] = d;
            for (int i = k + 1; i < n; ++i) {
                double v = a[idx2(i, k)];
                for (int s = 0; s < k; ++s) v -= a[idx2(i, s)] * a[idx2(k, s)];
                a[idx2(i, k)] = v / d;
            }
        }
        if (det < 1e-12 * std::pow(scale, n))
            throw DegeneratePoint("fundamental tensor is numerically degenerate at this point");
    }

    g_inv = invert(g, n);

    // Cartan tensor C_ijk = half fiber derivative of g.
    cartan.resize(static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                cartan[idx3(i, j, k)] = 0.5 * g[idx2(i, j)].derivative(n + k);

    // Geodesic spray G^i = 1/4 g^{il} (y^m d^2F2/dy^l dx^m - dF2/dx^l).
    const int so = order - 2;
    spray.resize(static_cast<std::size_t>(n));
    {
        std::vector<Jet> rhs(static_cast<std::size_t>(n));
        for (int l = 0; l < n; ++l) {
            Jet dyl = F2.derivative(n + l);
            Jet acc = mul_at(yj[0], dyl.derivative(0), so);
            for (int mm = 1; mm < n; ++mm) acc += mul_at(yj[static_cast<std::size_t>(mm)], dyl.derivative(mm), so);
            rhs[static_cast<std::size_t>(l)] = acc - F2.derivative(l).truncated(so);
        }
        for (int i = 0; i < n; ++i) {
            Jet acc = mul_at(g_inv[idx2(i, 0)], rhs[0], so);
            for (int l = 1; l < n; ++l) acc += mul_at(g_inv[idx2(i, l)], rhs[static_cast<std::size_t>(l)], so);
            spray[static_cast<std::size_t>(i)] = 0.25 * acc;
        }
    }

    // Nonlinear connection N^i_j = dG^i/dy^j.
    N.resize(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            N[idx2(i, j)] = spray[static_cast<std::size_t>(i)].derivative(n + j);

    // Horizontal connection coefficients
    // Gamma^i_jk = 1/2 g^{ir} (delta_j g_rk + delta_k g_jr - delta_r g_jk).
    const int go = order - 3;
    std::vector<Jet> dg(static_cast<std::size_t>(n * n * n));  // [m][i][j]
    for (int mm = 0; mm < n; ++mm)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet v = delta(g[idx2(i, j)], mm);
                dg[idx3(mm, i, j)] = v;
                if (j != i) dg[idx3(mm, j, i)] = v;
            }
    Gamma.resize(static_cast<std::size_t>(n * n * n));
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            std::vector<Jet> s(static_cast<std::size_t>(n));
            for (int rr = 0; rr < n; ++rr)
                s[static_cast<std::size_t>(rr)] =
                    dg[idx3(j, rr, k)] + dg[idx3(k, j, rr)] - dg[idx3(rr, j, k)];
            for (int i = 0; i < n; ++i) {
                Jet acc = mul_at(g_inv[idx2(i, 0)], s[0], go);
                for (int rr = 1; rr < n; ++rr)
                    acc += mul_at(g_inv[idx2(i, rr)], s[static_cast<std::size_t>(rr)], go);
                Jet v = 0.5 * acc;
                Gamma[idx3(i, j, k)] = v;
                if (k != j) Gamma[idx3(i, k, j)] = v;
            }
        }

    // Curvature of the nonlinear connection, Rhat^i_kl = delta_l N^i_k - delta_k N^i_l.
    Rhat.resize(static_cast<std::size_t>(n * n * n));
    {
        std::vector<Jet> dN(static_cast<std::size_t>(n * n * n));  // [m][i][j] = delta_m N^i_j
        for (int mm = 0; mm < n; ++mm)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) dN[idx3(mm, i, j)] = delta(N[idx2(i, j)], mm);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    Rhat[idx3(i, k, l)] = dN[idx3(l, i, k)] - dN[idx3(k, i, l)];
    }

    // Raised Cartan tensor C^i_jk.
    cartan_up.resize(static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Jet acc = mul_at(g_inv[idx2(i, 0)], cartan[idx3(0, j, k)], go);
                for (int rr = 1; rr < n; ++rr)
                    acc += mul_at(g_inv[idx2(i, rr)], cartan[idx3(rr, j, k)], go);
                cartan_up[idx3(i, j, k)] = acc;
            }

    // h-curvature
    // R^i_jkl = delta_l Gamma^i_jk - delta_k Gamma^i_jl
    //           + Gamma^m_jk Gamma^i_ml - Gamma^m_jl Gamma^i_mk
    //           + C^i_jm Rhat^m_kl.
    const int ro = order - 4;
    R.resize(static_cast<std::size_t>(n * n * n * n));
    {
        std::vector<Jet> dGam(static_cast<std::size_t>(n * n * n * n));  // [m][i][j][k]
        for (int mm = 0; mm < n; ++mm)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = j; k < n; ++k) {
                        Jet v = delta(Gamma[idx3(i, j, k)], mm);
                        dGam[idx4(mm, i, j, k)] = v;
                        if (k != j) dGam[idx4(mm, i, k, j)] = v;
                    }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        Jet acc = dGam[idx4(l, i, j, k)] - dGam[idx4(k, i, j, l)];
                        for (int mm = 0; mm < n; ++mm) {
                            acc += mul_at(Gamma[idx3(mm, j, k)], Gamma[idx3(i, mm, l)], ro);
                            acc -= mul_at(Gamma[idx3(mm, j, l)], Gamma[idx3(i, mm, k)], ro);
                            acc += mul_at(cartan_up[idx3(i, j, mm)], Rhat[idx3(mm, k, l)], ro);
                        }
                        R[idx4(i, j, k, l)] = acc;
                    }
    }

    // Horizontal Ricci tensor and scalar curvature: trace pairing the value
    // slot with the second plane slot, pinned by the Riemannian reduction.
    Ric.resize(static_cast<std::size_t>(n * n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Jet acc = R[idx4(0, j, k, 0)];
            for (int i = 1; i < n; ++i) acc += R[idx4(i, j, k, i)];
            Ric[idx2(j, k)] = acc;
        }
    {
        Jet acc = mul_at(g_inv[idx2(0, 0)], Ric[idx2(0, 0)], ro);
        bool first = true;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (first) {
                    first = false;
                    continue;
                }
                acc += mul_at(g_inv[idx2(j, k)], Ric[idx2(j, k)], ro);
            }
        r = acc;
    }

    // Constant-curvature model tensor G^i_jkl = g_kj delta^i_l - g_lj delta^i_k.
    Gten.resize(static_cast<std::size_t>(n * n * n * n));
    {
        Jet zero = Jet::constant(tab, ro, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        Jet v = zero;
                        if (i == l) v += g[idx2(k, j)].truncated(ro);
                        if (i == k) v -= g[idx2(l, j)].truncated(ro);
                        Gten[idx4(i, j, k, l)] = v;
                    }
    }

    // Concircular tensor C = R - r/(n(n-1)) G.
    Cten.resize(static_cast<std::size_t>(n * n * n * n));
    {
        Jet rf = r * (1.0 / (n * (n - 1.0)));
        for (std::size_t q = 0; q < Cten.size(); ++q)
            Cten[q] = R[q] - mul_at(rf, Gten[q], ro);
    }

    if (depth == Depth::Base) return;

    dR = nabla(R, 4, 0b0001u);
    dRic = nabla(Ric, 2, 0u);
    dC = nabla(Cten, 4, 0b0001u);
    dr.resize(static_cast<std::size_t>(n));
    for (int mm = 0; mm < n; ++mm) dr[static_cast<std::size_t>(mm)] = delta(r, mm);

    if (depth == Depth::First) return;

    ddR = nabla(dR, 5, 0b0010u);
    ddRic = nabla(dRic, 3, 0u);
    ddC = nabla(dC, 5, 0b0010u);
}

Jet PointFrame::delta(const Jet& f, int m) const {
    const int target = std::min(f.order() - 1, N[0].order());
    Jet acc = f.derivative(m).truncated(target);
    for (int rr = 0; rr < n; ++rr)
        acc -= mul_at(N[static_cast<std::size_t>(rr * n + m)], f.derivative(n + rr), target);
    return acc;
}

std::vector<Jet> PointFrame::nabla(std::span<const Jet> T, int rank, unsigned up_mask) const {
    std::size_t comp = 1;
    for (int s = 0; s < rank; ++s) comp *= static_cast<std::size_t>(n);
    if (T.size() != comp) throw std::invalid_argument("nabla: component count does not match rank");
    const int target = std::min({T[0].order() - 1, N[0].order(), Gamma[0].order()});

    std::vector<std::size_t> stride(static_cast<std::size_t>(rank), 1);
    for (int s = rank - 2; s >= 0; --s)
        stride[static_cast<std::size_t>(s)] = stride[static_cast<std::size_t>(s + 1)] * static_cast<std::size_t>(n);

    std::vector<Jet> out(static_cast<std::size_t>(n) * comp);
    std::vector<int> idx(static_cast<std::size_t>(rank), 0);
    for (std::size_t flat = 0; flat < comp; ++flat) {
        std::size_t rest = flat;
        for (int s = 0; s < rank; ++s) {
            idx[static_cast<std::size_t>(s)] = static_cast<int>(rest / stride[static_cast<std::size_t>(s)]);
            rest %= stride[static_cast<std::size_t>(s)];
        }
        for (int mm = 0; mm < n; ++mm) {
            Jet acc = delta(T[flat], mm).truncated(target);
            for (int s = 0; s < rank; ++s) {
                const bool up = (up_mask >> s) & 1u;
                const int is = idx[static_cast<std::size_t>(s)];
                const std::ptrdiff_t base =
                    static_cast<std::ptrdiff_t>(flat) -
                    static_cast<std::ptrdiff_t>(is) * static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(s)]);
                for (int rr = 0; rr < n; ++rr) {
                    std::size_t nb = static_cast<std::size_t>(
                        base + static_cast<std::ptrdiff_t>(rr) *
                                   static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(s)]));
                    const Jet& gam =
                        up ? Gamma[static_cast<std::size_t>((is * n + rr) * n + mm)]
                           : Gamma[static_cast<std::size_t>((rr * n + is) * n + mm)];
                    if (up)
                        acc += mul_at(gam, T[nb], target);
                    else
                        acc -= mul_at(gam, T[nb], target);
                }
            }
            out[static_cast<std::size_t>(mm) * comp + flat] = acc;
        }
    }
    return out;
}

CurvatureBundle PointFrame::values() const {
    CurvatureBundle b;
    b.n = n;
    b.depth = depth;
    auto ext = [](const std::vector<Jet>& src) {
        std::vector<double> out(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i].value();
        return out;
    };
    b.g = ext(g);
    b.g_inv = ext(g_inv);
    b.cartan = ext(cartan);
    b.spray = ext(spray);
    b.N = ext(N);
    b.Gamma = ext(Gamma);
    b.Rhat = ext(Rhat);
    b.R = ext(R);
    b.Ric = ext(Ric);
    b.Gten = ext(Gten);
    b.Cten = ext(Cten);
    b.r = r.value();
    if (depth == Depth::Base) return b;
    b.dR = ext(dR);
    b.dRic = ext(dRic);
    b.dC = ext(dC);
    b.dr = ext(dr);
    if (depth == Depth::First) return b;
    b.ddR = ext(ddR);
    b.ddRic = ext(ddRic);
    b.ddC = ext(ddC);
    return b;
}

std::vector<double> fundamental_tensor(const zoo::FinslerMetric& m, const TMPoint& p) {
    if (!m.domain(p.x, p.y)) throw DegeneratePoint("point rejected by the metric domain");
    auto g = zoo::fundamental_matrix(m, p.x, p.y);
    if (!zoo::positive_definite(g, m.n))
        throw DegeneratePoint("fundamental tensor is not positive definite at this point");
    return g;
}

std::vector<double> cartan_tensor(const zoo::FinslerMetric& m, const TMPoint& p) {
    if (!m.domain(p.x, p.y)) throw DegeneratePoint("point rejected by the metric domain");
    const int n = m.n;
    auto tab = Tables::get(2 * n, 3);
    std::vector<double> pt(p.x.begin(), p.x.end());
    pt.insert(pt.end(), p.y.begin(), p.y.end());
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(tab, 3, pt, i));
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(tab, 3, pt, n + i));
    Jet f2 = m.energy(xs, ys);
    std::vector<double> c(static_cast<std::size_t>(n * n * n));
    std::vector<int> alpha(static_cast<std::size_t>(2 * n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::fill(alpha.begin(), alpha.end(), 0);
                alpha[static_cast<std::size_t>(n + i)] += 1;
                alpha[static_cast<std::size_t>(n + j)] += 1;
                alpha[static_cast<std::size_t>(n + k)] += 1;
                c[static_cast<std::size_t>((i * n + j) * n + k)] = 0.25 * f2.partial(alpha);
            }
    return c;
}

ConnectionData connection(const zoo::FinslerMetric& m, const TMPoint& p, int order) {
    PointFrame f(m, p, Depth::Base, std::max(order, 4));
    ConnectionData out;
    auto ext = [](const std::vector<Jet>& src) {
        std::vector<double> o(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) o[i] = src[i].value();
        return o;
    };
    out.spray = ext(f.spray);
    out.N = ext(f.N);
    out.Gamma = ext(f.Gamma);
    return out;
}

CurvatureBundle curvature(const zoo::FinslerMetric& m, const TMPoint& p, Depth depth, int order) {
    PointFrame f(m, p, depth, order);
    return f.values();
}

std::vector<double> curvature_action(std::span<const double> R, std::span<const double> omega,
                                     int rank, int n) {
    std::size_t comp = 1;
    for (int s = 0; s < rank; ++s) comp *= static_cast<std::size_t>(n);
    if (omega.size() != comp)
        throw std::invalid_argument("curvature_action: component count does not match rank");
    if (R.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                        static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("curvature_action: curvature tensor has wrong size");

    std::vector<std::size_t> stride(static_cast<std::size_t>(rank), 1);
    for (int s = rank - 2; s >= 0; --s)
        stride[static_cast<std::size_t>(s)] = stride[static_cast<std::size_t>(s + 1)] * static_cast<std::size_t>(n);
    auto Ridx = [&](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };

    std::vector<double> out(static_cast<std::size_t>(n * n) * comp, 0.0);
    std::vector<int> idx(static_cast<std::size_t>(rank), 0);
    for (std::size_t flat = 0; flat < comp; ++flat) {
        std::size_t rest = flat;
        for (int s = 0; s < rank; ++s) {
            idx[static_cast<std::size_t>(s)] = static_cast<int>(rest / stride[static_cast<std::size_t>(s)]);
            rest %= stride[static_cast<std::size_t>(s)];
        }
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                double acc = 0.0;
                for (int s = 0; s < rank; ++s) {
                    const int ws = idx[static_cast<std::size_t>(s)];
                    const std::ptrdiff_t base =
                        static_cast<std::ptrdiff_t>(flat) -
                        static_cast<std::ptrdiff_t>(ws) *
                            static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(s)]);
                    for (int mm = 0; mm < n; ++mm) {
                        std::size_t nb = static_cast<std::size_t>(
                            base + static_cast<std::ptrdiff_t>(mm) *
                                       static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(s)]));
                        acc -= R[Ridx(mm, ws, u, v)] * omega[nb];
                    }
                }
                out[(static_cast<std::size_t>(u * n + v)) * comp + flat] = acc;
            }
    }
    return out;
}

std::vector<double> lower_rank4(std::span<const double> T, std::span<const double> g, int n) {
    auto idx4 = [&](int a, int b, int c, int d) {
        return static_cast<std::size_t>(((a * n + b) * n + c) * n + d);
    };
    std::vector<double> out(T.size(), 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double acc = 0.0;
                    for (int mm = 0; mm < n; ++mm)
                        acc += g[static_cast<std::size_t>(d * n + mm)] * T[idx4(mm, c, a, b)];
                    out[idx4(a, b, c, d)] = acc;
                }
    return out;
}

std::vector<jets::Jet> lower_rank4(std::span<const jets::Jet> T, std::span<const jets::Jet> g,
                                   int n) {
    auto idx4 = [&](int a, int b, int c, int d) {
        return static_cast<std::size_t>(((a * n + b) * n + c) * n + d);
    };
    const int ord = T[0].order();
    std::vector<jets::Jet> out(T.size());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    Jet acc = mul_at(g[static_cast<std::size_t>(d * n)], T[idx4(0, c, a, b)], ord);
                    for (int mm = 1; mm < n; ++mm)
                        acc += mul_at(g[static_cast<std::size_t>(d * n + mm)], T[idx4(mm, c, a, b)], ord);
                    out[idx4(a, b, c, d)] = acc;
                }
    return out;
}

}  // namespace finsler::geom
