#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finsler/fd.hpp"
#include "finsler/geometry.hpp"
#include "finsler/metric.hpp"
#include "support/levi_civita.hpp"
#include "support/tensors.hpp"

using namespace finsler;
using testsupport::frob;
using testsupport::max_abs;
using testsupport::rel_frob_diff;

namespace {

geom::TMPoint pt3(std::initializer_list<double> x, std::initializer_list<double> y) {
    return geom::TMPoint{std::vector<double>(x), std::vector<double>(y)};
}

std::vector<geom::TMPoint> sample_points(const zoo::FinslerMetric& m, int count,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&]() { return (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 1.6 - 0.8; };
    std::vector<geom::TMPoint> out;
    while (static_cast<int>(out.size()) < count) {
        geom::TMPoint p;
        p.x.resize(static_cast<std::size_t>(m.n));
        p.y.resize(static_cast<std::size_t>(m.n));
        for (auto& v : p.x) v = uni();
        double norm = 0.0;
        for (auto& v : p.y) {
            v = uni();
            norm += v * v;
        }
        if (norm < 1e-4) continue;
        for (auto& v : p.y) v /= std::sqrt(norm);
        if (!m.domain(p.x, p.y)) continue;
        out.push_back(std::move(p));
    }
    return out;
}

std::size_t i2(int n, int i, int j) { return static_cast<std::size_t>(i * n + j); }
std::size_t i3(int n, int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); }
std::size_t i4(int n, int i, int j, int k, int l) {
    return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
}

}  // namespace

TEST_CASE("euclidean metric is flat through every tensor") {
    auto m = zoo::build(zoo::builtin_spec("euclidean", 3, 1.0));
    auto p = pt3({0.3, -0.2, 0.5}, {0.6, 0.8, 0.0});
    auto b = geom::curvature(m, p, geom::Depth::Second, 8);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(b.g[i2(3, i, j)] == doctest::Approx(i == j ? 1.0 : 0.0));
    CHECK(max_abs(b.cartan) < 1e-14);
    CHECK(max_abs(b.spray) < 1e-14);
    CHECK(max_abs(b.N) < 1e-14);
    CHECK(max_abs(b.Gamma) < 1e-14);
    CHECK(max_abs(b.R) < 1e-14);
    CHECK(max_abs(b.Rhat) < 1e-14);
    CHECK(max_abs(b.Ric) < 1e-14);
    CHECK(max_abs(b.Cten) < 1e-14);
    CHECK(std::abs(b.r) < 1e-14);
    CHECK(max_abs(b.dR) < 1e-13);
    CHECK(max_abs(b.ddR) < 1e-13);
}

TEST_CASE("riemannian reduction of the fundamental tensor") {
    zoo::MetricSpec s;
    s.family = "riemannian_diag";
    s.n = 3;
    s.diag = {"1", "x1^2 + 1", "1"};
    auto m = zoo::build(s);
    auto p = pt3({1.0, 0.0, 0.0}, {0.4, 0.5, -0.3});
    auto g = geom::fundamental_tensor(m, p);
    CHECK(g[i2(3, 0, 0)] == doctest::Approx(1.0));
    CHECK(g[i2(3, 1, 1)] == doctest::Approx(2.0));
    CHECK(g[i2(3, 2, 2)] == doctest::Approx(1.0));
    CHECK(std::abs(g[i2(3, 0, 1)]) < 1e-12);

    // independent of y for a Riemannian input
    auto p2 = pt3({1.0, 0.0, 0.0}, {0.0, 0.1, 0.9});
    auto g2 = geom::fundamental_tensor(m, p2);
    CHECK(rel_frob_diff(g, g2) < 1e-12);
}

TEST_CASE("randers fundamental tensor matches a finite-difference oracle") {
    zoo::MetricSpec s;
    s.family = "randers";
    s.n = 3;
    s.b = {"0.1", "0", "0"};
    auto m = zoo::build(s);
    auto p = pt3({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
    auto g = geom::fundamental_tensor(m, p);

    const int n = 3;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto f = [&](std::span<const double> yy) { return m.energy_value(p.x, yy); };
            std::vector<int> alpha(static_cast<std::size_t>(n), 0);
            alpha[static_cast<std::size_t>(i)] += 1;
            alpha[static_cast<std::size_t>(j)] += 1;
            double want = 0.5 * fd::partial(f, p.y, alpha, 1e-4);
            CHECK(std::abs(g[i2(n, i, j)] - want) < 1e-6);
        }
}

TEST_CASE("cartan tensor symmetry and fiber contraction") {
    auto mr = zoo::build(zoo::builtin_spec("riemannian_diag", 3, 1.0));
    auto p = pt3({0.2, 0.4, -0.1}, {0.5, -0.5, 0.7});
    CHECK(max_abs(geom::cartan_tensor(mr, p)) < 1e-12);

    zoo::MetricSpec s;
    s.family = "randers";
    s.n = 3;
    s.b = {"0.1", "0", "0"};
    auto m = zoo::build(s);
    auto c = geom::cartan_tensor(m, p);
    CHECK(frob(c) > 1e-3);
    const int n = 3;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double contr = 0.0;
            for (int k = 0; k < n; ++k) contr += c[i3(n, i, j, k)] * p.y[static_cast<std::size_t>(k)];
            CHECK(std::abs(contr) < 1e-10);
            for (int k = 0; k < n; ++k) {
                CHECK(c[i3(n, i, j, k)] == doctest::Approx(c[i3(n, j, i, k)]).epsilon(1e-12));
                CHECK(c[i3(n, i, j, k)] == doctest::Approx(c[i3(n, k, j, i)]).epsilon(1e-12));
            }
        }
}

TEST_CASE("connection reduces to Christoffel symbols on Riemannian inputs") {
    auto spec = zoo::builtin_spec("riemannian_diag", 3, 1.0);
    auto m = zoo::build(spec);
    auto p = pt3({0.3, -0.2, 0.4}, {0.5, 0.6, -0.2});
    auto conn = geom::connection(m, p, 6);

    testsupport::LeviCivitaOracle lc;
    lc.n = 3;
    lc.a_fn = [&m](std::span<const double> x) {
        std::vector<double> a(9, 0.0);
        // recover the diagonal from the energy with unit fiber directions
        for (int i = 0; i < 3; ++i) {
            std::vector<double> y(3, 0.0);
            y[static_cast<std::size_t>(i)] = 1.0;
            a[static_cast<std::size_t>(i * 3 + i)] = m.energy_value(x, y);
        }
        return a;
    };
    auto gamma = lc.christoffel(p.x);
    CHECK(rel_frob_diff(conn.Gamma, gamma) < 1e-8);

    // spray is quadratic in y
    auto p2 = p;
    for (auto& v : p2.y) v *= 2.0;
    auto conn2 = geom::connection(m, p2, 6);
    for (std::size_t q = 0; q < conn.spray.size(); ++q)
        CHECK(conn2.spray[q] == doctest::Approx(4.0 * conn.spray[q]).epsilon(1e-10));
}

TEST_CASE("euclidean connection vanishes") {
    auto m = zoo::build(zoo::builtin_spec("euclidean", 3, 1.0));
    auto p = pt3({0.1, 0.2, 0.3}, {1.0, -1.0, 0.5});
    auto conn = geom::connection(m, p, 6);
    CHECK(max_abs(conn.spray) < 1e-14);
    CHECK(max_abs(conn.N) < 1e-14);
    CHECK(max_abs(conn.Gamma) < 1e-14);
}

TEST_CASE("convention pins on the constant curvature model") {
    auto m = zoo::build(zoo::builtin_spec("constant_curvature", 3, 1.0));
    const int n = 3;
    for (const auto& p : sample_points(m, 4, 99)) {
        auto b = geom::curvature(m, p, geom::Depth::First, 8);
        // pin (i): r = +n(n-1) kappa
        CHECK(b.r == doctest::Approx(6.0).epsilon(1e-9));
        // Ric = (n-1) kappa g
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                CHECK(b.Ric[i2(n, j, k)] == doctest::Approx(2.0 * b.g[i2(n, j, k)]).epsilon(1e-8));
        // pin (ii): concircular tensor vanishes
        CHECK(frob(b.Cten) / frob(b.R) < 1e-10);
        // pin (iii): Ricci-style trace of Gten equals (n-1) g
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double tr = 0.0;
                for (int i = 0; i < n; ++i) tr += b.Gten[i4(n, i, j, k, i)];
                CHECK(tr == doctest::Approx(2.0 * b.g[i2(n, j, k)]).epsilon(1e-10));
            }
        // pin (iv): double g-trace of Cten vanishes
        double dtrace = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double tr = 0.0;
                for (int i = 0; i < n; ++i) tr += b.Cten[i4(n, i, j, k, i)];
                dtrace += b.g_inv[i2(n, j, k)] * tr;
            }
        CHECK(std::abs(dtrace) < 1e-9);
        // symmetric model: dR vanishes
        CHECK(frob(b.dR) / frob(b.R) < 1e-9);
    }
}

TEST_CASE("riemannian reduction against the Levi-Civita oracle") {
    auto spec = zoo::builtin_spec("riemannian_diag", 3, 1.0);
    auto m = zoo::build(spec);

    testsupport::LeviCivitaOracle lc;
    lc.n = 3;
    lc.a_fn = [&m](std::span<const double> x) {
        std::vector<double> a(9, 0.0);
        for (int i = 0; i < 3; ++i) {
            std::vector<double> y(3, 0.0);
            y[static_cast<std::size_t>(i)] = 1.0;
            a[static_cast<std::size_t>(i * 3 + i)] = m.energy_value(x, y);
        }
        return a;
    };

    for (const auto& p : sample_points(m, 3, 7)) {
        auto b = geom::curvature(m, p, geom::Depth::First, 8);
        CHECK(rel_frob_diff(b.g, lc.metric(p.x)) < 1e-8);
        CHECK(rel_frob_diff(b.Gamma, lc.christoffel(p.x)) < 1e-8);
        CHECK(rel_frob_diff(b.R, lc.riemann(p.x)) < 1e-7);
        CHECK(rel_frob_diff(b.Ric, lc.ricci(p.x)) < 1e-7);
        CHECK(b.r == doctest::Approx(lc.scalar(p.x)).epsilon(1e-7));
    }
}

TEST_CASE("homogeneity degrees under fiber rescaling") {
    zoo::MetricSpec s;
    s.family = "randers";
    s.n = 3;
    s.b = {"0.1 + 0.05*x2", "0.05", "0"};
    auto m = zoo::build(s);
    auto p = pt3({0.3, -0.4, 0.2}, {0.7, 0.3, -0.6});
    auto b1 = geom::curvature(m, p, geom::Depth::Base, 8);
    auto p2 = p;
    const double lam = 2.0;
    for (auto& v : p2.y) v *= lam;
    auto b2 = geom::curvature(m, p2, geom::Depth::Base, 8);

    CHECK(rel_frob_diff(b2.g, b1.g) < 1e-8);         // degree 0
    CHECK(rel_frob_diff(b2.R, b1.R) < 1e-8);         // degree 0
    auto scaled = b1.N;
    for (auto& v : scaled) v *= lam;
    CHECK(rel_frob_diff(b2.N, scaled) < 1e-8);       // degree 1
    scaled = b1.spray;
    for (auto& v : scaled) v *= lam * lam;
    CHECK(rel_frob_diff(b2.spray, scaled) < 1e-8);   // degree 2
}

TEST_CASE("structure residuals: metricity, deflection, torsion symmetry, parallel Gten") {
    for (const char* fam : {"riemannian_diag", "randers", "product"}) {
        auto spec = zoo::builtin_spec(fam, 3, 1.0);
        if (spec.family == "randers") spec.b = {"0.1 + 0.05*x2", "0.05", "0"};
        auto m = zoo::build(spec);
        const int n = 3;
        for (const auto& p : sample_points(m, 2, 31)) {
            geom::PointFrame f(m, p, geom::Depth::Base, 8);
            // deflection: N^i_k = Gamma^i_jk y^j
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j)
                        acc += f.Gamma[i3(n, i, j, k)].value() * p.y[static_cast<std::size_t>(j)];
                    CHECK(std::abs(f.N[i2(n, i, k)].value() - acc) < 1e-9);
                }
            // h-metricity through the covariant derivative operator
            auto dg = f.nabla(f.g, 2, 0u);
            double worst = 0.0;
            for (const auto& j : dg) worst = std::max(worst, std::abs(j.value()));
            CHECK(worst < 1e-9);
            // Gamma symmetric in the lower pair
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        CHECK(std::abs(f.Gamma[i3(n, i, j, k)].value() -
                                       f.Gamma[i3(n, i, k, j)].value()) < 1e-12);
            // the model tensor is parallel
            auto dG = f.nabla(f.Gten, 4, 0b0001u);
            worst = 0.0;
            for (const auto& j : dG) worst = std::max(worst, std::abs(j.value()));
            CHECK(worst < 1e-9);
        }
    }
}

TEST_CASE("Rhat consistency: commutator curvature equals the fiber contraction of R") {
    for (const char* fam : {"constant_curvature", "randers", "product"}) {
        auto spec = zoo::builtin_spec(fam, 3, 1.0);
        if (spec.family == "randers") spec.b = {"0.1 + 0.05*x2", "0.05", "0"};
        auto m = zoo::build(spec);
        const int n = 3;
        for (const auto& p : sample_points(m, 2, 77)) {
            auto b = geom::curvature(m, p, geom::Depth::Base, 8);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double contr = 0.0;
                        for (int j = 0; j < n; ++j)
                            contr += b.R[i4(n, i, j, k, l)] * p.y[static_cast<std::size_t>(j)];
                        CHECK(std::abs(contr - b.Rhat[i3(n, i, k, l)]) < 1e-9);
                    }
            // antisymmetry of R in the plane slots
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            CHECK(std::abs(b.R[i4(n, i, j, k, l)] + b.R[i4(n, i, j, l, k)]) < 1e-9);
        }
    }
}

TEST_CASE("classical identities hold on non-flat Riemannian inputs") {
    auto m = zoo::build(zoo::builtin_spec("riemannian_diag", 3, 1.0));
    const int n = 3;
    for (const auto& p : sample_points(m, 2, 13)) {
        geom::PointFrame f(m, p, geom::Depth::First, 8);
        auto b = f.values();
        double scaleR = frob(b.R);
        CHECK(scaleR > 1e-4);  // genuinely curved sample

        // first Bianchi: cyclic sum of R(X,Y)Z over ((k,l,j) -> (l,j,k) -> (j,k,l))
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        worst = std::max(
                            worst, std::abs(b.R[i4(n, i, j, k, l)] + b.R[i4(n, i, k, l, j)] +
                                            b.R[i4(n, i, l, j, k)]));
        CHECK(worst / scaleR < 1e-8);

        // pair symmetry of the lowered tensor
        auto low = geom::lower_rank4(b.R, b.g, n);
        worst = 0.0;
        for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        worst = std::max(worst, std::abs(low[i4(n, a, bb, c, d)] -
                                                         low[i4(n, c, d, a, bb)]));
        CHECK(worst / scaleR < 1e-8);

        // second Bianchi: cyclic sum of the lowered derivative over the first three slots
        auto lowj = geom::lower_rank4(f.R, f.g, n);
        auto dlow = f.nabla(lowj, 4, 0u);
        auto idx5 = [&](int v, int a, int bb, int c, int d) {
            return static_cast<std::size_t>((((v * n + a) * n + bb) * n + c) * n + d);
        };
        double scaleD = 0.0;
        for (const auto& j : dlow) scaleD = std::max(scaleD, std::abs(j.value()));
        worst = 0.0;
        for (int v = 0; v < n; ++v)
            for (int a = 0; a < n; ++a)
                for (int bb = 0; bb < n; ++bb)
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d)
                            worst = std::max(
                                worst,
                                std::abs(dlow[idx5(v, a, bb, c, d)].value() +
                                         dlow[idx5(a, bb, v, c, d)].value() +
                                         dlow[idx5(bb, v, a, c, d)].value()));
        CHECK(worst / std::max(scaleD, 1e-12) < 1e-7);

        // Ricci symmetry
        worst = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(b.Ric[i2(n, j, k)] - b.Ric[i2(n, k, j)]));
        CHECK(worst / frob(b.Ric) < 1e-8);
    }
}

TEST_CASE("Ricci identity pins the second-derivative slot order") {
    // y-independent probe one-form on Riemannian inputs: the commutator of
    // the outer-first second covariant derivative must equal the curvature
    // action exactly.
    auto m = zoo::build(zoo::builtin_spec("riemannian_diag", 3, 1.0));
    const int n = 3;
    for (const auto& p : sample_points(m, 2, 47)) {
        geom::PointFrame f(m, p, geom::Depth::First, 8);
        int po = f.g[0].order() - 1;
        std::vector<jets::Jet> omega;
        omega.push_back((1.0 + 0.3 * f.xj[0]).truncated(po));
        omega.push_back((0.2 + 0.1 * f.xj[1] * f.xj[1]).truncated(po));
        omega.push_back((0.1 + 0.2 * f.xj[2] - 0.1 * f.xj[0]).truncated(po));

        auto dom = f.nabla(omega, 1, 0u);
        auto ddom = f.nabla(dom, 2, 0u);
        auto b = f.values();

        auto dd = [&](int a, int bb, int z) {
            return ddom[static_cast<std::size_t>((a * n + bb) * n + z)].value();
        };
        std::vector<double> om(3);
        for (int i = 0; i < n; ++i) om[static_cast<std::size_t>(i)] = omega[static_cast<std::size_t>(i)].value();
        auto act = geom::curvature_action(b.R, om, 1, n);

        double scale = 0.0;
        for (const auto& j : ddom) scale = std::max(scale, std::abs(j.value()));
        double worst = 0.0;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                for (int z = 0; z < n; ++z) {
                    double lhs = dd(y, x, z) - dd(x, y, z);
                    double rhs = act[static_cast<std::size_t>((x * n + y)) * 3 + static_cast<std::size_t>(z)];
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
        CHECK(worst / std::max(scale, 1e-12) < 1e-8);
    }
}

TEST_CASE("curvature action annihilates the metric") {
    for (const char* fam : {"euclidean", "constant_curvature", "randers"}) {
        auto spec = zoo::builtin_spec(fam, 3, 1.0);
        if (spec.family == "randers") spec.b = {"0.1 + 0.05*x2", "0.05", "0"};
        auto m = zoo::build(spec);
        auto p = sample_points(m, 1, 3)[0];
        auto b = geom::curvature(m, p, geom::Depth::Base, 8);
        auto act = geom::curvature_action(b.R, b.g, 2, 3);
        CHECK(max_abs(act) < 1e-9);
    }
}

TEST_CASE("curvature action on the lowered tensor vanishes on the sphere") {
    auto m = zoo::build(zoo::builtin_spec("constant_curvature", 3, 1.0));
    auto p = sample_points(m, 1, 21)[0];
    auto b = geom::curvature(m, p, geom::Depth::Base, 8);
    auto low = geom::lower_rank4(b.R, b.g, 3);
    auto act = geom::curvature_action(b.R, low, 4, 3);
    CHECK(max_abs(act) / (frob(b.R) * frob(low)) < 1e-8);
}

TEST_CASE("insufficient jet order and domain rejection raise") {
    auto m = zoo::build(zoo::builtin_spec("constant_curvature", 3, 1.0));
    auto p = pt3({0.1, 0.1, 0.1}, {1.0, 0.0, 0.0});
    CHECK_THROWS_AS(geom::curvature(m, p, geom::Depth::Second, 6), std::invalid_argument);

    auto h = zoo::build(zoo::builtin_spec("constant_curvature", 3, -1.0));
    auto bad = pt3({2.5, 0.0, 0.0}, {1.0, 0.0, 0.0});
    CHECK_THROWS_AS(geom::curvature(h, bad, geom::Depth::Base, 8), geom::DegeneratePoint);
}
