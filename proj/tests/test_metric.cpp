#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finsler/metric.hpp"

using namespace finsler;

TEST_CASE("euclidean energy and flat fundamental tensor") {
    auto m = zoo::build(zoo::builtin_spec("euclidean", 3, 1.0));
    std::vector<double> x{0.2, -0.1, 0.4};
    std::vector<double> y{1.0, 2.0, -1.0};
    CHECK(m.energy_value(x, y) == doctest::Approx(6.0));
    auto g = zoo::fundamental_matrix(m, x, y);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(g[static_cast<std::size_t>(i * 3 + j)] == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("constant curvature sphere model evaluates the stated closed form") {
    auto m = zoo::build(zoo::builtin_spec("constant_curvature", 3, 1.0));
    std::vector<double> x{0.4, 0.2, -0.3};
    std::vector<double> y{0.0, 1.0, 0.0};
    double w = 1.0 + 0.25 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    CHECK(m.energy_value(x, y) == doctest::Approx(1.0 / (w * w)));

    // kappa < 0 shrinks the domain
    auto h = zoo::build(zoo::builtin_spec("constant_curvature", 3, -1.0));
    std::vector<double> far{3.0, 0.0, 0.0};
    CHECK_FALSE(h.domain(far, y));
}

TEST_CASE("randers validation rejects |b| >= 1") {
    zoo::MetricSpec s;
    s.family = "randers";
    s.n = 3;
    s.b = {"1.2", "0", "0"};
    CHECK_THROWS_AS(zoo::build(s), zoo::MetricError);

    s.b = {"0.1", "0", "0"};
    auto m = zoo::build(s);
    std::vector<double> x{0.0, 0.0, 0.0};
    std::vector<double> y{1.0, 0.0, 0.0};
    CHECK(m.energy_value(x, y) == doctest::Approx(1.21));
}

TEST_CASE("inhomogeneous dsl energy is rejected") {
    zoo::MetricSpec s;
    s.family = "dsl";
    s.n = 3;
    s.dsl_src = "y1^2 + x1";
    s.dsl_is_energy = true;
    CHECK_THROWS_AS(zoo::build(s), zoo::MetricError);

    s.dsl_src = "y1^2 + y1";  // 1-homogeneous term inside F^2
    CHECK_THROWS_AS(zoo::build(s), zoo::MetricError);
}

TEST_CASE("dsl length expression builds and matches the squared energy") {
    zoo::MetricSpec s;
    s.family = "dsl";
    s.n = 3;
    s.dsl_src = "sqrt(y1^2 + y2^2 + y3^2) + 0.1*y1";
    auto m = zoo::build(s);
    std::vector<double> x{0.0, 0.0, 0.0};
    std::vector<double> y{1.0, 0.0, 0.0};
    CHECK(m.energy_value(x, y) == doctest::Approx(1.21));
}

TEST_CASE("invalid parameters are rejected") {
    zoo::MetricSpec s;
    s.family = "euclidean";
    s.n = 1;
    CHECK_THROWS_AS(zoo::build(s), zoo::MetricError);

    s.family = "nosuch";
    s.n = 3;
    CHECK_THROWS_AS(zoo::build(s), zoo::MetricError);

    zoo::MetricSpec p;
    p.family = "product";
    p.n = 2;
    p.f = "x1";
    CHECK_THROWS_AS(zoo::build(p), zoo::MetricError);
}

TEST_CASE("metric file round trip") {
    std::string text =
        "# sphere-like model\n"
        "family = constant_curvature\n"
        "n = 3\n"
        "kappa = 1.0\n";
    auto s = zoo::parse_metric_file(text);
    CHECK(s.family == "constant_curvature");
    CHECK(s.n == 3);
    CHECK(s.kappa == 1.0);
    auto m = zoo::build(s);
    CHECK(m.n == 3);

    std::string dsl =
        "family = dsl\n"
        "n = 3\n"
        "F = sqrt(y1^2 + y2^2 + y3^2) + 0.1*y1\n"
        "label = randers_like\n";
    auto d = zoo::parse_metric_file(dsl);
    CHECK(d.family == "dsl");
    CHECK_FALSE(d.dsl_is_energy);
    CHECK(zoo::build(d).label == "randers_like");

    std::string diag =
        "family = riemannian_diag\n"
        "n = 2\n"
        "d1 = 1 + x1^2\n"
        "d2 = exp(0.2*x1)\n";
    auto r = zoo::parse_metric_file(diag);
    CHECK(r.diag.size() == 2);
    CHECK(zoo::build(r).n == 2);

    CHECK_THROWS_AS(zoo::parse_metric_file("n = 3\n"), zoo::MetricError);
    CHECK_THROWS_AS(zoo::parse_metric_file("family = dsl\nn = 3\nbogus ~ 3\n"), zoo::MetricError);
    CHECK_THROWS_AS(zoo::parse_metric_file("family = dsl\nn = 3\nwhat = 3\n"), zoo::MetricError);
}

TEST_CASE("every builtin family passes definiteness on 100 seeded points") {
    std::mt19937_64 rng(20260809);
    auto uni = [&]() { return (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 1.8 - 0.9; };
    for (const char* fam :
         {"euclidean", "riemannian_diag", "constant_curvature", "conformal", "randers", "product"}) {
        auto m = zoo::build(zoo::builtin_spec(fam, 3, 1.0));
        int checked = 0;
        while (checked < 100) {
            std::vector<double> x(3), y(3);
            for (auto& v : x) v = uni();
            double norm = 0.0;
            for (auto& v : y) {
                v = uni();
                norm += v * v;
            }
            if (norm < 1e-6) continue;
            for (auto& v : y) v /= std::sqrt(norm);
            if (!m.domain(x, y)) continue;
            auto g = zoo::fundamental_matrix(m, x, y);
            CHECK(zoo::positive_definite(g, 3));
            ++checked;
        }
    }
}
