#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finsler/fd_oracle.hpp"

using namespace finsler;

namespace {

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

}  // namespace

TEST_CASE("finite-difference route is exact on the flat metric") {
    auto m = zoo::build(zoo::builtin_spec("euclidean", 3, 1.0));
    auto p = sample_points(m, 1, 8)[0];
    auto res = oracle::compare(m, p, 8);
    CHECK(res.max_rel < 1e-8);  // rounding noise over the stencil denominators
}

TEST_CASE("finite-difference route tracks the jet pipeline on curved models") {
    for (const char* fam : {"constant_curvature", "riemannian_diag", "conformal", "product"}) {
        auto m = zoo::build(zoo::builtin_spec(fam, 3, 1.0));
        for (const auto& p : sample_points(m, 2, 19)) {
            auto res = oracle::compare(m, p, 8);
            INFO(fam);
            CHECK(res.max_rel < 1e-5);
            CHECK(res.per_tensor.size() == 5);
        }
    }
}

TEST_CASE("finite-difference route tracks the jet pipeline on a Finsler metric") {
    zoo::MetricSpec s;
    s.family = "randers";
    s.n = 3;
    s.b = {"0.1 + 0.05*x2", "0.05", "0"};
    auto m = zoo::build(s);
    for (const auto& p : sample_points(m, 2, 29)) {
        auto res = oracle::compare(m, p, 8);
        CHECK(res.max_rel < 1e-4);
    }
}
