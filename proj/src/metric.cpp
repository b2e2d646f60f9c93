#include "finsler/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace finsler::zoo {

namespace {

using jets::Jet;
using jets::Tables;

std::vector<expr::NodePtr> parse_all(const std::vector<std::string>& srcs, int n,
                                     bool x_only, const char* what) {
    std::vector<expr::NodePtr> out;
    for (const auto& s : srcs) {
        expr::NodePtr ast;
        try {
            ast = expr::parse(s);
        } catch (const expr::ParseError& e) {
            throw MetricError(std::string(what) + ": " + e.what());
        }
        if (expr::max_x_index(*ast) > n)
            throw MetricError(std::string(what) + ": x index exceeds dimension");
        if (x_only && expr::max_y_index(*ast) > 0)
            throw MetricError(std::string(what) + ": fiber variables not allowed here");
        if (expr::max_y_index(*ast) > n)
            throw MetricError(std::string(what) + ": y index exceeds dimension");
        out.push_back(ast);
    }
    return out;
}

Jet sum_of_squares(std::span<const Jet> ys, int from, int to) {
    Jet acc = ys[static_cast<std::size_t>(from)] * ys[static_cast<std::size_t>(from)];
    for (int i = from + 1; i < to; ++i)
        acc += ys[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)];
    return acc;
}

double sum_of_squares_v(std::span<const double> y, int from, int to) {
    double acc = 0.0;
    for (int i = from; i < to; ++i) acc += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    return acc;
}

/// Deterministic validation points in the box [-0.9, 0.9]^n with |y| = 1.
struct SamplePoint {
    std::vector<double> x, y;
};

std::vector<SamplePoint> validation_points(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&]() { return (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 1.8 - 0.9; };
    std::vector<SamplePoint> pts;
    while (static_cast<int>(pts.size()) < count) {
        SamplePoint p;
        p.x.resize(static_cast<std::size_t>(n));
        p.y.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) p.x[static_cast<std::size_t>(i)] = uni();
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            p.y[static_cast<std::size_t>(i)] = uni();
            norm += p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-3) continue;
        for (int i = 0; i < n; ++i) p.y[static_cast<std::size_t>(i)] /= norm;
        pts.push_back(std::move(p));
    }
    return pts;
}

void check_homogeneity(const FinslerMetric& m) {
    auto pts = validation_points(m.n, 10, 0x9a7d3bull);
    int used = 0;
    for (const auto& p : pts) {
        if (!m.domain(p.x, p.y)) continue;
        double base = m.energy_value(p.x, p.y);
        if (!std::isfinite(base)) throw MetricError("energy not finite at a sample point");
        for (double lam : {2.0, 3.0}) {
            std::vector<double> ys(p.y);
            for (double& v : ys) v *= lam;
            if (!m.domain(p.x, ys)) continue;
            double got = m.energy_value(p.x, ys);
            double want = lam * lam * base;
            if (std::abs(got - want) > 1e-8 * std::max(std::abs(want), 1e-8))
                throw MetricError("energy is not 2-homogeneous in y (is the expression a norm?)");
        }
        ++used;
    }
    if (used < 3) throw MetricError("domain predicate rejected nearly all validation points");
}

void check_positive_definite(const FinslerMetric& m) {
    auto pts = validation_points(m.n, 10, 0x51cf24ull);
    int used = 0;
    for (const auto& p : pts) {
        if (!m.domain(p.x, p.y)) continue;
        auto g = fundamental_matrix(m, p.x, p.y);
        if (!positive_definite(g, m.n))
            throw MetricError("fundamental tensor is not positive definite at a sample point");
        ++used;
    }
    if (used < 3) throw MetricError("domain predicate rejected nearly all validation points");
}

}  // namespace

bool positive_definite(std::span<const double> g, int n) {
    // Cholesky without pivoting; fails iff a pivot is non-positive.
    std::vector<double> a(g.begin(), g.end());
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
    for (int k = 0; k < n; ++k) {
        double d = at(k, k);
        for (int s = 0; s < k; ++s) d -= at(k, s) * at(k, s);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        at(k, k) = d;
        for (int i = k + 1; i < n; ++i) {
            double v = at(i, k);
            for (int s = 0; s < k; ++s) v -= at(i, s) * at(k, s);
            at(i, k) = v / d;
        }
    }
    return true;
}

std::vector<double> fundamental_matrix(const FinslerMetric& m, std::span<const double> x,
                                       std::span<const double> y) {
    const int n = m.n;
    auto tab = Tables::get(2 * n, 2);
    std::vector<double> pt(x.begin(), x.end());
    pt.insert(pt.end(), y.begin(), y.end());
    std::vector<Jet> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(tab, 2, pt, i));
    for (int i = 0; i < n; ++i) ys.push_back(Jet::variable(tab, 2, pt, n + i));
    Jet f2 = m.energy(xs, ys);
    std::vector<double> g(static_cast<std::size_t>(n * n));
    std::vector<int> alpha(static_cast<std::size_t>(2 * n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[static_cast<std::size_t>(n + i)] += 1;
            alpha[static_cast<std::size_t>(n + j)] += 1;
            g[static_cast<std::size_t>(i * n + j)] = 0.5 * f2.partial(alpha);
        }
    return g;
}

FinslerMetric build(const MetricSpec& spec) {
    const int n = spec.n;
    if (n < 2) throw MetricError("dimension must be at least 2");

    FinslerMetric m;
    m.n = n;
    m.family = spec.family;
    m.label = spec.label.empty() ? spec.family : spec.label;

    auto nonzero_y = [n](std::span<const double>, std::span<const double> y) {
        return sum_of_squares_v(y, 0, n) > 0.0;
    };

    if (spec.family == "euclidean") {
        m.energy = [n](std::span<const Jet> xs, std::span<const Jet> ys) {
            (void)xs;
            return sum_of_squares(ys, 0, n);
        };
        m.energy_value = [n](std::span<const double>, std::span<const double> y) {
            return sum_of_squares_v(y, 0, n);
        };
        m.domain = nonzero_y;
    } else if (spec.family == "riemannian_diag") {
        if (static_cast<int>(spec.diag.size()) != n)
            throw MetricError("riemannian_diag requires exactly n diagonal entries");
        auto asts = parse_all(spec.diag, n, true, "riemannian_diag entry");
        m.energy = [asts, n](std::span<const Jet> xs, std::span<const Jet> ys) {
            Jet acc = expr::eval(*asts[0], xs, {}) * (ys[0] * ys[0]);
            for (int i = 1; i < n; ++i)
                acc += expr::eval(*asts[static_cast<std::size_t>(i)], xs, {}) *
                       (ys[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)]);
            return acc;
        };
        m.energy_value = [asts, n](std::span<const double> x, std::span<const double> y) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += expr::eval_value(*asts[static_cast<std::size_t>(i)], x, {}) *
                       y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
            return acc;
        };
        m.domain = [asts, n](std::span<const double> x, std::span<const double> y) {
            if (sum_of_squares_v(y, 0, n) == 0.0) return false;
            for (const auto& a : asts)
                if (expr::eval_value(*a, x, {}) <= 0.0) return false;
            return true;
        };
    } else if (spec.family == "constant_curvature") {
        double kappa = spec.kappa;
        m.energy = [kappa, n](std::span<const Jet> xs, std::span<const Jet> ys) {
            Jet w = 1.0 + kappa * 0.25 * sum_of_squares(xs, 0, n);
            return sum_of_squares(ys, 0, n) / (w * w);
        };
        m.energy_value = [kappa, n](std::span<const double> x, std::span<const double> y) {
            double w = 1.0 + kappa * 0.25 * sum_of_squares_v(x, 0, n);
            return sum_of_squares_v(y, 0, n) / (w * w);
        };
        m.domain = [kappa, n](std::span<const double> x, std::span<const double> y) {
            if (sum_of_squares_v(y, 0, n) == 0.0) return false;
            return 1.0 + kappa * 0.25 * sum_of_squares_v(x, 0, n) > 1e-3;
        };
    } else if (spec.family == "conformal") {
        if (spec.f.empty()) throw MetricError("conformal requires the exponent expression f");
        auto asts = parse_all({spec.f}, n, true, "conformal exponent");
        auto f = asts[0];
        m.energy = [f, n](std::span<const Jet> xs, std::span<const Jet> ys) {
            return exp(2.0 * expr::eval(*f, xs, {})) * sum_of_squares(ys, 0, n);
        };
        m.energy_value = [f, n](std::span<const double> x, std::span<const double> y) {
            return std::exp(2.0 * expr::eval_value(*f, x, {})) * sum_of_squares_v(y, 0, n);
        };
        m.domain = nonzero_y;
    } else if (spec.family == "randers") {
        if (static_cast<int>(spec.b.size()) != n)
            throw MetricError("randers requires exactly n covector entries");
        std::vector<std::string> adiag = spec.a_diag;
        if (adiag.empty()) adiag.assign(static_cast<std::size_t>(n), "1");
        if (static_cast<int>(adiag.size()) != n)
            throw MetricError("randers base diagonal needs n entries");
        auto a_asts = parse_all(adiag, n, true, "randers base entry");
        auto b_asts = parse_all(spec.b, n, true, "randers covector entry");
        auto b_norm = [a_asts, b_asts, n](std::span<const double> x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                double ai = expr::eval_value(*a_asts[static_cast<std::size_t>(i)], x, {});
                double bi = expr::eval_value(*b_asts[static_cast<std::size_t>(i)], x, {});
                if (ai <= 0.0) return 2.0;  // treat as out of domain
                s += bi * bi / ai;
            }
            return std::sqrt(s);
        };
        m.energy = [a_asts, b_asts, n](std::span<const Jet> xs, std::span<const Jet> ys) {
            Jet alpha2 = expr::eval(*a_asts[0], xs, {}) * (ys[0] * ys[0]);
            Jet beta = expr::eval(*b_asts[0], xs, {}) * ys[0];
            for (int i = 1; i < n; ++i) {
                alpha2 += expr::eval(*a_asts[static_cast<std::size_t>(i)], xs, {}) *
                          (ys[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)]);
                beta += expr::eval(*b_asts[static_cast<std::size_t>(i)], xs, {}) *
                        ys[static_cast<std::size_t>(i)];
            }
            Jet f = sqrt(alpha2) + beta;
            return f * f;
        };
        m.energy_value = [a_asts, b_asts, n](std::span<const double> x, std::span<const double> y) {
            double alpha2 = 0.0, beta = 0.0;
            for (int i = 0; i < n; ++i) {
                alpha2 += expr::eval_value(*a_asts[static_cast<std::size_t>(i)], x, {}) *
                          y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
                beta += expr::eval_value(*b_asts[static_cast<std::size_t>(i)], x, {}) *
                        y[static_cast<std::size_t>(i)];
            }
            double f = std::sqrt(alpha2) + beta;
            return f * f;
        };
        m.domain = [b_norm, n](std::span<const double> x, std::span<const double> y) {
            if (sum_of_squares_v(y, 0, n) == 0.0) return false;
            return b_norm(x) < 1.0 - 1e-9;
        };
        // The Randers positivity condition |b|_a < 1, sampled over the box.
        auto pts = validation_points(n, 20, 0x7b11e2ull);
        for (const auto& p : pts)
            if (b_norm(p.x) >= 1.0)
                throw MetricError("randers covector has |b| >= 1 on the sample box");
    } else if (spec.family == "product") {
        if (n < 3) throw MetricError("product requires dimension at least 3");
        if (spec.f.empty()) throw MetricError("product requires the surface exponent f");
        auto asts = parse_all({spec.f}, 2, true, "product surface exponent");
        auto f = asts[0];
        m.energy = [f, n](std::span<const Jet> xs, std::span<const Jet> ys) {
            Jet surf = exp(2.0 * expr::eval(*f, xs.subspan(0, 2), {})) * sum_of_squares(ys, 0, 2);
            return surf + sum_of_squares(ys, 2, n);
        };
        m.energy_value = [f, n](std::span<const double> x, std::span<const double> y) {
            double surf =
                std::exp(2.0 * expr::eval_value(*f, x.subspan(0, 2), {})) * sum_of_squares_v(y, 0, 2);
            return surf + sum_of_squares_v(y, 2, n);
        };
        m.domain = nonzero_y;
    } else if (spec.family == "dsl") {
        if (spec.dsl_src.empty()) throw MetricError("dsl requires an expression");
        expr::NodePtr ast;
        try {
            ast = expr::parse(spec.dsl_src);
        } catch (const expr::ParseError& e) {
            throw MetricError(std::string("dsl: ") + e.what());
        }
        if (expr::max_x_index(*ast) > n || expr::max_y_index(*ast) > n)
            throw MetricError("dsl: variable index exceeds dimension");
        bool as_energy = spec.dsl_is_energy;
        m.energy = [ast, as_energy](std::span<const Jet> xs, std::span<const Jet> ys) {
            Jet v = expr::eval(*ast, xs, ys);
            return as_energy ? v : v * v;
        };
        m.energy_value = [ast, as_energy](std::span<const double> x, std::span<const double> y) {
            double v = expr::eval_value(*ast, x, y);
            return as_energy ? v : v * v;
        };
        m.domain = [ast, nonzero_y](std::span<const double> x, std::span<const double> y) {
            if (!nonzero_y(x, y)) return false;
            double v = expr::eval_value(*ast, x, y);
            return std::isfinite(v);
        };
    } else {
        throw MetricError("unknown metric family '" + spec.family + "'");
    }

    check_homogeneity(m);
    check_positive_definite(m);
    return m;
}

MetricSpec builtin_spec(const std::string& family, int n, double kappa) {
    MetricSpec s;
    s.family = family;
    s.n = n;
    s.kappa = kappa;
    if (family == "riemannian_diag") {
        for (int i = 0; i < n; ++i) {
            // d_i depends on the cyclically next coordinate, so no entry is
            // constant and the metric is not conformally flat.
            int idx = ((i + 1) % n) + 1;
            std::ostringstream os;
            os << "exp(0.4*x" << idx << ")";
            s.diag.push_back(os.str());
        }
    } else if (family == "conformal") {
        s.f = "0.3*x1";
    } else if (family == "randers") {
        s.b.assign(static_cast<std::size_t>(n), "0");
        s.b[0] = "0.1 + 0.05*x2";
        if (n >= 2) s.b[1] = "0.05";
    } else if (family == "product") {
        s.f = "exp(0.3*x1)";
    }
    return s;
}

bool is_builtin(const std::string& family) {
    return family == "euclidean" || family == "riemannian_diag" ||
           family == "constant_curvature" || family == "conformal" || family == "randers" ||
           family == "product";
}

MetricSpec parse_metric_file(const std::string& text) {
    MetricSpec s;
    s.family.clear();
    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto ltrim = line.find_first_not_of(" \t\r");
        if (ltrim == std::string::npos) continue;
        auto rtrim = line.find_last_not_of(" \t\r");
        line = line.substr(ltrim, rtrim - ltrim + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw MetricError("metric file line " + std::to_string(lineno) + ": expected key = value");
        auto key = line.substr(0, eq);
        auto val = line.substr(eq + 1);
        auto trim = [](std::string v) {
            auto a = v.find_first_not_of(" \t");
            auto b = v.find_last_not_of(" \t");
            if (a == std::string::npos) return std::string();
            return v.substr(a, b - a + 1);
        };
        kv.emplace_back(trim(key), trim(val));
    }

    std::vector<std::pair<int, std::string>> diag, bvec, avec;
    for (const auto& [key, val] : kv) {
        if (key == "family") {
            s.family = val;
        } else if (key == "n") {
            s.n = std::stoi(val);
        } else if (key == "kappa") {
            s.kappa = std::stod(val);
        } else if (key == "f") {
            s.f = val;
        } else if (key == "label") {
            s.label = val;
        } else if (key == "F") {
            s.dsl_src = val;
            s.dsl_is_energy = false;
        } else if (key == "F2") {
            s.dsl_src = val;
            s.dsl_is_energy = true;
        } else if (key.size() >= 2 && (key[0] == 'd' || key[0] == 'b' || key[0] == 'a') &&
                   std::isdigit(static_cast<unsigned char>(key[1]))) {
            int idx = std::stoi(key.substr(1));
            if (key[0] == 'd') diag.emplace_back(idx, val);
            if (key[0] == 'b') bvec.emplace_back(idx, val);
            if (key[0] == 'a') avec.emplace_back(idx, val);
        } else {
            throw MetricError("metric file: unknown key '" + key + "'");
        }
    }
    if (s.family.empty()) throw MetricError("metric file: missing 'family'");

    auto place = [&](std::vector<std::pair<int, std::string>>& src, std::vector<std::string>& dst,
                     const char* what) {
        if (src.empty()) return;
        dst.assign(static_cast<std::size_t>(s.n), "");
        for (auto& [i, v] : src) {
            if (i < 1 || i > s.n)
                throw MetricError(std::string("metric file: ") + what + " index out of range");
            dst[static_cast<std::size_t>(i - 1)] = v;
        }
        for (auto& v : dst)
            if (v.empty()) throw MetricError(std::string("metric file: incomplete ") + what);
    };
    place(diag, s.diag, "diagonal");
    place(bvec, s.b, "covector");
    place(avec, s.a_diag, "base diagonal");

    if (s.family == "dsl" && s.dsl_src.empty())
        throw MetricError("metric file: dsl family requires F or F2");
    return s;
}

}  // namespace finsler::zoo
