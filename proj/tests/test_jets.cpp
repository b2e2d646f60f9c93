#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "finsler/fd.hpp"
#include "finsler/jets.hpp"
#include "support/poly.hpp"

using finsler::jets::Jet;
using finsler::jets::Tables;

namespace {

Jet jvar(const std::shared_ptr<const Tables>& tab, int order, const std::vector<double>& pt,
         int i) {
    return Jet::variable(tab, order, pt, i);
}

double rel_err(double got, double want) {
    double scale = std::max(std::abs(want), 1e-14);
    return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("coordinate jets carry the expected coefficients") {
    auto tab = Tables::get(2, 2);
    std::vector<double> pt{3.0, 5.0};
    Jet x = jvar(tab, 2, pt, 0);
    CHECK(x.value() == 3.0);
    std::vector<int> a{1, 0};
    CHECK(x.partial(a) == 1.0);
    std::vector<int> b{0, 1};
    CHECK(x.partial(b) == 0.0);
    std::vector<int> c{2, 0};
    CHECK(x.partial(c) == 0.0);

    auto tab1 = Tables::get(2, 1);
    std::vector<double> origin{0.0, 0.0};
    Jet y = jvar(tab1, 1, origin, 1);
    CHECK(y.value() == 0.0);
    CHECK(y.partial(b) == 1.0);

    CHECK_THROWS_AS(jvar(tab, 2, pt, 2), std::out_of_range);
}

TEST_CASE("basic arithmetic matches closed forms") {
    auto tab = Tables::get(1, 2);
    std::vector<double> pt{3.0};
    Jet x = jvar(tab, 2, pt, 0);
    Jet sq = x * x;
    CHECK(sq.value() == 9.0);
    std::vector<int> a1{1};
    std::vector<int> a2{2};
    CHECK(sq.partial(a1) == 6.0);
    CHECK(sq.partial(a2) == 2.0);

    Jet four = Jet::constant(tab, 2, 4.0);
    Jet root = sqrt(four);
    CHECK(root.value() == 2.0);
    CHECK(root.partial(a1) == 0.0);
    CHECK(root.partial(a2) == 0.0);

    Jet zero = Jet::constant(tab, 2, 0.0);
    CHECK_THROWS_AS(x / zero, std::domain_error);
    CHECK_THROWS_AS(sqrt(zero), std::domain_error);
    CHECK_THROWS_AS(log(zero), std::domain_error);
}

TEST_CASE("exp jet reproduces raw derivatives") {
    auto tab = Tables::get(1, 4);
    std::vector<double> pt{0.0};
    Jet x = jvar(tab, 4, pt, 0);
    Jet e = exp(x);
    for (int k = 0; k <= 4; ++k) {
        std::vector<int> a{k};
        CHECK(rel_err(e.partial(a), 1.0) < 1e-14);
    }
}

TEST_CASE("constant-term extraction is the identity case") {
    auto tab = Tables::get(3, 3);
    std::vector<double> pt{1.0, 2.0, -1.0};
    Jet x = jvar(tab, 3, pt, 0);
    Jet y = jvar(tab, 3, pt, 1);
    Jet f = x * y + 2.0 * x;
    std::vector<int> zero{0, 0, 0};
    CHECK(f.partial(zero) == f.value());
}

TEST_CASE("config mismatch is rejected") {
    auto t1 = Tables::get(2, 3);
    auto t2 = Tables::get(3, 3);
    std::vector<double> p2{1.0, 2.0};
    std::vector<double> p3{1.0, 2.0, 3.0};
    Jet a = jvar(t1, 3, p2, 0);
    Jet b = jvar(t2, 3, p3, 0);
    CHECK_THROWS_AS(a + b, std::invalid_argument);
    CHECK_THROWS_AS(a * b, std::invalid_argument);
    Jet c = jvar(t1, 2, p2, 0);
    CHECK_THROWS_AS(a + c, std::invalid_argument);

    std::vector<int> too_deep{4, 0};
    CHECK_THROWS_AS(a.partial(too_deep), std::out_of_range);
}

TEST_CASE("randomized polynomials agree with symbolic differentiation") {
    using testsupport::Poly;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);

    const int nv = 3;
    const int order = 6;
    auto tab = Tables::get(nv, order);
    std::vector<double> pt{0.7, -0.4, 1.3};

    for (int trial = 0; trial < 20; ++trial) {
        // Random expression tree over +, -, * starting from variables and constants.
        std::vector<Poly> polys;
        std::vector<Jet> jets;
        for (int i = 0; i < nv; ++i) {
            polys.push_back(Poly::var(nv, i));
            jets.push_back(jvar(tab, order, pt, i));
        }
        polys.push_back(Poly::constant(nv, coef(rng)));
        jets.push_back(Jet::constant(tab, order, polys.back().eval(pt)));

        for (int step = 0; step < 10; ++step) {
            std::size_t i = rng() % polys.size();
            std::size_t j = rng() % polys.size();
            int op = static_cast<int>(rng() % 3);
            Poly p;
            Jet jv;
            if (op == 0) {
                p = polys[i] + polys[j];
                jv = jets[i] + jets[j];
            } else if (op == 1) {
                p = polys[i] - polys[j];
                jv = jets[i] - jets[j];
            } else {
                if (polys[i].degree() + polys[j].degree() > order) continue;
                p = polys[i] * polys[j];
                jv = jets[i] * jets[j];
            }
            polys.push_back(p);
            jets.push_back(jv);
        }

        const Poly& p = polys.back();
        const Jet& jv = jets.back();
        // Compare every mixed partial up to total degree = order.
        std::vector<int> alpha(nv, 0);
        for (int a0 = 0; a0 <= order; ++a0)
            for (int a1 = 0; a0 + a1 <= order; ++a1)
                for (int a2 = 0; a0 + a1 + a2 <= order; ++a2) {
                    alpha[0] = a0;
                    alpha[1] = a1;
                    alpha[2] = a2;
                    double want = p.partial(alpha, pt);
                    double got = jv.partial(alpha);
                    CHECK(rel_err(got, want) < 1e-12);
                }
    }
}

TEST_CASE("smooth compositions agree with finite differences") {
    const int nv = 2;
    const int order = 3;
    auto tab = Tables::get(nv, order);
    std::vector<double> pt{0.4, -0.3};

    auto build = [&](std::span<const double> q) {
        return std::sqrt(2.0 + 0.3 * std::sin(q[0]) + 0.2 * q[1] * q[1]) *
                   std::exp(0.1 * q[0] * q[1]) +
               std::cos(q[0] - 0.5 * q[1]);
    };
    Jet x = jvar(tab, order, pt, 0);
    Jet y = jvar(tab, order, pt, 1);
    Jet f = sqrt(2.0 + 0.3 * sin(x) + 0.2 * y * y) * exp(0.1 * x * y) + cos(x - 0.5 * y);

    std::vector<int> alpha(nv, 0);
    for (int a0 = 0; a0 <= order; ++a0)
        for (int a1 = 0; a0 + a1 <= order; ++a1) {
            if (a0 + a1 == 0) continue;
            alpha[0] = a0;
            alpha[1] = a1;
            double want = finsler::fd::partial(build, pt, alpha);
            double got = f.partial(alpha);
            CHECK(std::abs(got - want) < 1e-5 * std::max(1.0, std::abs(want)));
        }
}

TEST_CASE("Leibniz rule at the base point") {
    const int nv = 3;
    auto tab = Tables::get(nv, 4);
    std::vector<double> pt{0.9, 1.1, -0.6};
    Jet x = jvar(tab, 4, pt, 0);
    Jet y = jvar(tab, 4, pt, 1);
    Jet z = jvar(tab, 4, pt, 2);
    Jet a = x * y + sin(z);
    Jet b = exp(0.2 * x) - y * z;
    Jet prod = a * b;
    for (int i = 0; i < nv; ++i) {
        std::vector<int> e(nv, 0);
        e[static_cast<std::size_t>(i)] = 1;
        double lhs = prod.partial(e);
        double rhs = a.value() * b.partial(e) + b.value() * a.partial(e);
        CHECK(rel_err(lhs, rhs) < 1e-13);
    }
}

TEST_CASE("division and transcendental round trips") {
    auto tab = Tables::get(2, 6);
    std::vector<double> pt{0.8, -0.2};
    Jet x = jvar(tab, 6, pt, 0);
    Jet y = jvar(tab, 6, pt, 1);
    Jet f = 1.5 + x * x + 0.3 * y;

    Jet q = (f * f) / f;
    for (std::size_t r = 0; r < q.coeffs().size(); ++r)
        CHECK(std::abs(q.coeff(r) - f.coeff(r)) < 1e-13);

    Jet s = sqrt(f) * sqrt(f);
    for (std::size_t r = 0; r < s.coeffs().size(); ++r)
        CHECK(std::abs(s.coeff(r) - f.coeff(r)) < 1e-13);

    Jet le = exp(log(f));
    for (std::size_t r = 0; r < le.coeffs().size(); ++r)
        CHECK(std::abs(le.coeff(r) - f.coeff(r)) < 1e-12);

    Jet sc = sin(x) * sin(x) + cos(x) * cos(x);
    CHECK(rel_err(sc.value(), 1.0) < 1e-14);
    std::vector<int> e1{1, 0};
    CHECK(std::abs(sc.partial(e1)) < 1e-13);
}

TEST_CASE("derivative operator drops one order and matches coefficients") {
    auto tab = Tables::get(2, 5);
    std::vector<double> pt{0.3, 0.7};
    Jet x = jvar(tab, 5, pt, 0);
    Jet y = jvar(tab, 5, pt, 1);
    Jet f = x * x * y + exp(0.5 * y);
    Jet fx = f.derivative(0);
    CHECK(fx.order() == 4);
    std::vector<int> a{1, 2};
    std::vector<int> a_up{2, 2};
    CHECK(rel_err(fx.partial(a), f.partial(a_up)) < 1e-13);
    CHECK(rel_err(fx.value(), 2.0 * pt[0] * pt[1]) < 1e-13);
}

TEST_CASE("pow variants") {
    auto tab = Tables::get(1, 4);
    std::vector<double> pt{1.7};
    Jet x = jvar(tab, 4, pt, 0);
    Jet p3 = pow_int(x, 3);
    Jet direct = x * x * x;
    for (std::size_t r = 0; r < p3.coeffs().size(); ++r)
        CHECK(std::abs(p3.coeff(r) - direct.coeff(r)) < 1e-13 * std::max(1.0, std::abs(direct.coeff(r))));

    Jet ph = pow(x, 0.5);
    Jet rt = sqrt(x);
    for (std::size_t r = 0; r < ph.coeffs().size(); ++r)
        CHECK(std::abs(ph.coeff(r) - rt.coeff(r)) < 1e-12);

    Jet pm = pow_int(x, -2);
    Jet inv2 = 1.0 / (x * x);
    for (std::size_t r = 0; r < pm.coeffs().size(); ++r)
        CHECK(std::abs(pm.coeff(r) - inv2.coeff(r)) < 1e-12);
}

TEST_CASE("apply dispatch mirrors the operators") {
    using finsler::jets::apply;
    using finsler::jets::Op;
    auto tab = Tables::get(1, 3);
    std::vector<double> pt{0.6};
    Jet x = jvar(tab, 3, pt, 0);
    Jet two = Jet::constant(tab, 3, 2.0);
    Jet s = apply(Op::Add, x, &two);
    CHECK(s.value() == doctest::Approx(2.6));
    Jet p = apply(Op::PowInt, x, &two);
    CHECK(p.value() == doctest::Approx(0.36));
    CHECK_THROWS_AS(apply(Op::Mul, x, nullptr), std::invalid_argument);
}
