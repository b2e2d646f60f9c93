#include "finsler/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace finsler::fit {

namespace {

using jets::Jet;

double dotv(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dotv(a, a)); }

Jet dotJ(std::span<const Jet> a, std::span<const Jet> b, int ord) {
    Jet acc = a[0].truncated(ord) * b[0].truncated(ord);
    for (std::size_t i = 1; i < a.size(); ++i)
        acc += a[i].truncated(ord) * b[i].truncated(ord);
    return acc;
}

struct DecideInput {
    double residual;
    double dnorm;
    double tnorm;
    double anorm;
    double bnorm;
    bool has_b;
    std::size_t K;
};

void decide(const DecideInput& in, const Eps& eps, FitOutcome& out) {
    out.residual = in.residual;
    out.target_norm = in.tnorm;
    out.symmetric = in.dnorm / std::max(in.tnorm, eps.abs) < eps.fit;
    out.a_zero = in.anorm <= eps.form;
    out.b_zero = in.has_b && in.bnorm <= eps.form;
    if (out.symmetric) {
        // The recurrence equation is satisfied only with vanishing forms;
        // the condition requires nonzero forms, so this is the symmetric
        // degeneration, not a proper hold.
        out.verdict = Verdict::Degenerate;
        return;
    }
    if (in.residual < eps.fit && !out.a_zero && !(in.has_b && out.b_zero)) {
        out.verdict = Verdict::Holds;
        return;
    }
    out.verdict = Verdict::Fails;
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "HOLDS";
        case Verdict::Fails: return "FAILS";
        case Verdict::Degenerate: return "DEGENERATE";
    }
    return "?";
}

const char* condition_name(Condition c) {
    switch (c) {
        case Condition::Sym: return "SYM";
        case Condition::F: return "F";
        case Condition::TwoF: return "2F";
        case Condition::GF: return "GF";
        case Condition::G2F: return "G2F";
        case Condition::RSym: return "RSYM";
        case Condition::RF: return "RF";
        case Condition::TwoRF: return "2RF";
        case Condition::GRF: return "GRF";
        case Condition::G2RF: return "G2RF";
        case Condition::CSym: return "CSYM";
        case Condition::CF: return "CF";
        case Condition::TwoCF: return "2CF";
        case Condition::GCF: return "GCF";
        case Condition::G2CF: return "G2CF";
    }
    return "?";
}

const std::array<Condition, kConditionCount>& all_conditions() {
    static const std::array<Condition, kConditionCount> a = {
        Condition::Sym,  Condition::F,     Condition::TwoF,  Condition::GF,  Condition::G2F,
        Condition::RSym, Condition::RF,    Condition::TwoRF, Condition::GRF, Condition::G2RF,
        Condition::CSym, Condition::CF,    Condition::TwoCF, Condition::GCF, Condition::G2CF,
    };
    return a;
}

FitOutcome fit_proportional(std::span<const double> D, std::span<const double> T, int m_count,
                            const Eps& eps) {
    const std::size_t K = T.size();
    if (D.size() != K * static_cast<std::size_t>(m_count))
        throw std::invalid_argument("fit: derivative block size does not match the target");
    FitOutcome out;
    out.target_norm = norm2(T);
    if (out.target_norm < eps.deg * std::sqrt(static_cast<double>(K))) {
        out.verdict = Verdict::Degenerate;
        return out;
    }
    const double tt = dotv(T, T);
    out.A.resize(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m)
        out.A[static_cast<std::size_t>(m)] = dotv(D.subspan(static_cast<std::size_t>(m) * K, K), T) / tt;
    double num = 0.0;
    for (int m = 0; m < m_count; ++m)
        for (std::size_t k = 0; k < K; ++k) {
            double d = D[static_cast<std::size_t>(m) * K + k] - out.A[static_cast<std::size_t>(m)] * T[k];
            num += d * d;
        }
    const double dnorm = norm2(D);
    DecideInput in;
    in.residual = std::sqrt(num) / std::max(dnorm, eps.abs);
    in.dnorm = dnorm;
    in.tnorm = out.target_norm;
    in.anorm = norm2(out.A);
    in.bnorm = 0.0;
    in.has_b = false;
    in.K = K;
    decide(in, eps, out);
    return out;
}

FitOutcome fit_affine(std::span<const double> D, std::span<const double> T,
                      std::span<const double> U, int m_count, const Eps& eps) {
    const std::size_t K = T.size();
    if (U.size() != K) throw std::invalid_argument("fit: companion tensor size mismatch");
    if (D.size() != K * static_cast<std::size_t>(m_count))
        throw std::invalid_argument("fit: derivative block size does not match the target");
    FitOutcome out;
    out.target_norm = norm2(T);
    if (out.target_norm < eps.deg * std::sqrt(static_cast<double>(K)) ||
        norm2(U) < eps.deg * std::sqrt(static_cast<double>(K))) {
        out.verdict = Verdict::Degenerate;
        return out;
    }
    const double tt = dotv(T, T), uu = dotv(U, U), tu = dotv(T, U);
    // eigenvalues of the 2x2 Gram matrix
    const double tr = tt + uu;
    const double disc = std::sqrt(std::max((tt - uu) * (tt - uu) + 4.0 * tu * tu, 0.0));
    const double lmin = 0.5 * (tr - disc), lmax = 0.5 * (tr + disc);
    if (!(lmin > 0.0) || lmax / lmin > 1.0 / eps.gram) {
        out.verdict = Verdict::Degenerate;
        return out;
    }
    const double det = tt * uu - tu * tu;
    out.A.resize(static_cast<std::size_t>(m_count));
    out.B.resize(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
        const double dt = dotv(D.subspan(static_cast<std::size_t>(m) * K, K), T);
        const double du = dotv(D.subspan(static_cast<std::size_t>(m) * K, K), U);
        out.A[static_cast<std::size_t>(m)] = (dt * uu - du * tu) / det;
        out.B[static_cast<std::size_t>(m)] = (du * tt - dt * tu) / det;
    }
    double num = 0.0;
    for (int m = 0; m < m_count; ++m)
        for (std::size_t k = 0; k < K; ++k) {
            double d = D[static_cast<std::size_t>(m) * K + k] -
                       out.A[static_cast<std::size_t>(m)] * T[k] -
                       out.B[static_cast<std::size_t>(m)] * U[k];
            num += d * d;
        }
    const double dnorm = norm2(D);
    DecideInput in;
    in.residual = std::sqrt(num) / std::max(dnorm, eps.abs);
    in.dnorm = dnorm;
    in.tnorm = out.target_norm;
    in.anorm = norm2(out.A);
    in.bnorm = norm2(out.B);
    in.has_b = true;
    in.K = K;
    decide(in, eps, out);
    return out;
}

namespace {

std::vector<double> jet_values(std::span<const Jet> src) {
    std::vector<double> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i].value();
    return out;
}

/// Fill the jet-form derived side data (alpha, mu, dbar, B1, trace law).
void derive_form_data(const geom::PointFrame& f, const std::vector<Jet>& Aj,
                      const std::vector<Jet>* Bj, PointFit& pf) {
    const int n = f.n;
    auto idx2 = [&](int i, int j) { return static_cast<std::size_t>(i * n + j); };

    auto dA = f.nabla(Aj, 1, 0u);
    pf.alpha_form.assign(static_cast<std::size_t>(n * n), 0.0);
    pf.dbarA.assign(static_cast<std::size_t>(n * n), 0.0);
    std::vector<double> dAv(static_cast<std::size_t>(n * n));
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i) {
            dAv[idx2(m, i)] = dA[idx2(m, i)].value();
            pf.alpha_form[idx2(m, i)] =
                dA[idx2(m, i)].value() + pf.A[static_cast<std::size_t>(m)] * pf.A[static_cast<std::size_t>(i)];
            pf.dbarA[idx2(m, i)] = dA[idx2(m, i)].value() - dA[idx2(i, m)].value();
        }
    pf.side["norm_nabla_A"] = norm2(dAv);
    pf.side["norm_nabla_A_plus_AA"] = norm2(pf.alpha_form);
    pf.side["norm_dbar_A"] = norm2(pf.dbarA);
    pf.side["norm_A"] = norm2(pf.A);

    const double r = f.r.value();
    std::vector<double> dr = jet_values(f.dr);
    std::vector<double> nr(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        nr[static_cast<std::size_t>(i)] = dr[static_cast<std::size_t>(i)] - r * pf.A[static_cast<std::size_t>(i)];
    pf.side["norm_nabla_r_minus_rA"] = norm2(nr);

    if (Bj) {
        auto dB = f.nabla(*Bj, 1, 0u);
        pf.mu_form.assign(static_cast<std::size_t>(n * n), 0.0);
        pf.dbarB_wedge.assign(static_cast<std::size_t>(n * n), 0.0);
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i) {
                pf.mu_form[idx2(m, i)] =
                    dB[idx2(m, i)].value() + pf.A[static_cast<std::size_t>(m)] * pf.B[static_cast<std::size_t>(i)];
                pf.dbarB_wedge[idx2(m, i)] =
                    dB[idx2(m, i)].value() - dB[idx2(i, m)].value() +
                    pf.A[static_cast<std::size_t>(m)] * pf.B[static_cast<std::size_t>(i)] -
                    pf.A[static_cast<std::size_t>(i)] * pf.B[static_cast<std::size_t>(m)];
            }
        pf.side["norm_nabla_B_plus_AB"] = norm2(pf.mu_form);
        pf.side["norm_dbar_B_plus_A_wedge_B"] = norm2(pf.dbarB_wedge);
        pf.side["norm_B"] = norm2(pf.B);

        const double c = 1.0 / (n * (n - 1.0));
        pf.B1.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            pf.B1[static_cast<std::size_t>(i)] = pf.B[static_cast<std::size_t>(i)] -
                                                 c * r * pf.A[static_cast<std::size_t>(i)] +
                                                 c * dr[static_cast<std::size_t>(i)];
        pf.side["norm_B1"] = norm2(pf.B1);
    }
}

/// Jet-level proportional fit for one condition at one point.
PointFit point_proportional(const geom::PointFrame& f, std::span<const Jet> D,
                            std::span<const Jet> T, int m_count, const Eps& eps,
                            bool one_form) {
    PointFit pf;
    auto Dv = jet_values(D);
    auto Tv = jet_values(T);
    FitOutcome vo = fit_proportional(Dv, Tv, m_count, eps);
    pf.verdict = vo.verdict;
    pf.residual = vo.residual;
    pf.target_norm = vo.target_norm;
    pf.symmetric = vo.symmetric;
    pf.a_zero = vo.a_zero;
    pf.A = vo.A;
    if (vo.verdict == Verdict::Degenerate && vo.A.empty()) return pf;

    if (one_form) {
        // jet-valued forms for the differentiated side data
        const int ord = D[0].order();
        Jet tt = dotJ(T, T, ord);
        std::vector<Jet> Aj(static_cast<std::size_t>(m_count));
        const std::size_t K = T.size();
        for (int m = 0; m < m_count; ++m) {
            auto Dm = D.subspan(static_cast<std::size_t>(m) * K, K);
            Aj[static_cast<std::size_t>(m)] = dotJ(Dm, T, ord) / tt;
        }
        derive_form_data(f, Aj, nullptr, pf);
    } else {
        const int n = f.n;
        pf.side["norm_alpha"] = norm2(pf.A);
        double asym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double d = pf.A[static_cast<std::size_t>(i * n + j)] - pf.A[static_cast<std::size_t>(j * n + i)];
                asym += d * d;
            }
        pf.side["alpha_antisym"] = std::sqrt(asym);
    }
    return pf;
}

PointFit point_affine(const geom::PointFrame& f, std::span<const Jet> D, std::span<const Jet> T,
                      std::span<const Jet> U, int m_count, const Eps& eps, bool one_form) {
    PointFit pf;
    auto Dv = jet_values(D);
    auto Tv = jet_values(T);
    auto Uv = jet_values(U);
    FitOutcome vo = fit_affine(Dv, Tv, Uv, m_count, eps);
    pf.verdict = vo.verdict;
    pf.residual = vo.residual;
    pf.target_norm = vo.target_norm;
    pf.symmetric = vo.symmetric;
    pf.a_zero = vo.a_zero;
    pf.b_zero = vo.b_zero;
    pf.A = vo.A;
    pf.B = vo.B;
    if (vo.A.empty()) return pf;  // degenerate before fitting

    if (one_form) {
        const int ord = D[0].order();
        Jet tt = dotJ(T, T, ord);
        Jet uu = dotJ(U, U, ord);
        Jet tu = dotJ(T, U, ord);
        Jet det = tt * uu - tu * tu;
        std::vector<Jet> Aj(static_cast<std::size_t>(m_count)), Bj(static_cast<std::size_t>(m_count));
        const std::size_t K = T.size();
        for (int m = 0; m < m_count; ++m) {
            auto Dm = D.subspan(static_cast<std::size_t>(m) * K, K);
            Jet dt = dotJ(Dm, T, ord);
            Jet du = dotJ(Dm, U, ord);
            Aj[static_cast<std::size_t>(m)] = (dt * uu - du * tu) / det;
            Bj[static_cast<std::size_t>(m)] = (du * tt - dt * tu) / det;
        }
        derive_form_data(f, Aj, &Bj, pf);
    } else {
        const int n = f.n;
        auto asym_of = [&](const std::vector<double>& M) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double d = M[static_cast<std::size_t>(i * n + j)] - M[static_cast<std::size_t>(j * n + i)];
                    s += d * d;
                }
            return std::sqrt(s);
        };
        pf.side["norm_alpha"] = norm2(pf.A);
        pf.side["norm_mu"] = norm2(pf.B);
        pf.side["alpha_antisym"] = asym_of(pf.A);
        pf.side["mu_antisym"] = asym_of(pf.B);
    }
    return pf;
}

PointFit point_symmetry(std::span<const Jet> D, std::span<const Jet> T, const Eps& eps) {
    PointFit pf;
    auto Dv = jet_values(D);
    auto Tv = jet_values(T);
    pf.target_norm = norm2(Tv);
    const std::size_t K = Tv.size();
    if (pf.target_norm < eps.deg * std::sqrt(static_cast<double>(K))) {
        pf.verdict = Verdict::Degenerate;
        return pf;
    }
    pf.residual = norm2(Dv) / pf.target_norm;
    pf.symmetric = pf.residual < eps.fit;
    pf.verdict = pf.symmetric ? Verdict::Holds : Verdict::Fails;
    return pf;
}

}  // namespace

void classify_point(const geom::PointFrame& f, const Eps& eps,
                    std::array<PointFit, kConditionCount>& out) {
    const int n = f.n;
    const int n2 = n * n;
    auto set = [&](Condition c, PointFit pf) { out[static_cast<std::size_t>(c)] = std::move(pf); };

    set(Condition::Sym, point_symmetry(f.dR, f.R, eps));
    set(Condition::F, point_proportional(f, f.dR, f.R, n, eps, true));
    set(Condition::TwoF, point_proportional(f, f.ddR, f.R, n2, eps, false));
    set(Condition::GF, point_affine(f, f.dR, f.R, f.Gten, n, eps, true));
    set(Condition::G2F, point_affine(f, f.ddR, f.R, f.Gten, n2, eps, false));

    set(Condition::RSym, point_symmetry(f.dRic, f.Ric, eps));
    set(Condition::RF, point_proportional(f, f.dRic, f.Ric, n, eps, true));
    set(Condition::TwoRF, point_proportional(f, f.ddRic, f.Ric, n2, eps, false));
    set(Condition::GRF, point_affine(f, f.dRic, f.Ric, f.g, n, eps, true));
    set(Condition::G2RF, point_affine(f, f.ddRic, f.Ric, f.g, n2, eps, false));

    set(Condition::CSym, point_symmetry(f.dC, f.Cten, eps));
    set(Condition::CF, point_proportional(f, f.dC, f.Cten, n, eps, true));
    set(Condition::TwoCF, point_proportional(f, f.ddC, f.Cten, n2, eps, false));
    set(Condition::GCF, point_affine(f, f.dC, f.Cten, f.Gten, n, eps, true));
    set(Condition::G2CF, point_affine(f, f.ddC, f.Cten, f.Gten, n2, eps, false));
}

PointTensors point_tensors(const geom::PointFrame& f) {
    PointTensors t;
    t.r = f.r.value();
    auto nrm = [](std::span<const Jet> v) {
        double s = 0.0;
        for (const auto& j : v) s += j.value() * j.value();
        return std::sqrt(s);
    };
    t.norm_R = nrm(f.R);
    t.norm_Ric = nrm(f.Ric);
    t.norm_C = nrm(f.Cten);
    t.norm_Rhat = nrm(f.Rhat);
    t.norm_dr = nrm(f.dr);
    return t;
}

Report aggregate(int n, const Eps& eps, std::vector<geom::TMPoint> points,
                 std::vector<PointTensors> tensors,
                 std::vector<std::array<PointFit, kConditionCount>> fits) {
    Report rep;
    rep.n = n;
    rep.eps = eps;
    rep.points = std::move(points);
    rep.tensors = std::move(tensors);
    rep.r_abs_min = std::numeric_limits<double>::infinity();
    for (const auto& t : rep.tensors) {
        rep.rhat_rel_max = std::max(rep.rhat_rel_max, t.norm_Rhat / std::max(t.norm_R, eps.abs));
        rep.r_abs_min = std::min(rep.r_abs_min, std::abs(t.r));
        rep.r_const_dev = std::max(rep.r_const_dev, t.norm_dr / std::max(std::abs(t.r), 1.0));
    }

    for (Condition c : all_conditions()) {
        ConditionReport& cr = rep.at(c);
        bool any_fails = false, any_degenerate = false, all_symmetric = true;
        for (std::size_t p = 0; p < fits.size(); ++p) {
            PointFit& pf = fits[p][static_cast<std::size_t>(c)];
            cr.max_residual = std::max(cr.max_residual, pf.residual);
            if (pf.verdict == Verdict::Fails) any_fails = true;
            if (pf.verdict == Verdict::Degenerate) any_degenerate = true;
            if (!pf.symmetric) all_symmetric = false;
            for (const auto& [k, v] : pf.side) {
                auto [it_min, ins_min] = cr.side.try_emplace(k + "_min", v);
                if (!ins_min) it_min->second = std::min(it_min->second, v);
                auto [it_max, ins_max] = cr.side.try_emplace(k + "_max", v);
                if (!ins_max) it_max->second = std::max(it_max->second, v);
            }
            cr.points.push_back(std::move(pf));
        }
        cr.symmetric = all_symmetric;
        if (any_fails)
            cr.verdict = Verdict::Fails;
        else if (any_degenerate)
            cr.verdict = Verdict::Degenerate;
        else
            cr.verdict = Verdict::Holds;
    }
    return rep;
}

Report classify(const zoo::FinslerMetric& m, const std::vector<geom::TMPoint>& points,
                const Eps& eps, int order) {
    if (m.n < 3) throw std::invalid_argument("classification requires dimension at least 3");
    if (points.empty()) throw std::invalid_argument("classification requires at least one point");

    std::vector<std::array<PointFit, kConditionCount>> fits;
    std::vector<PointTensors> tensors;
    fits.reserve(points.size());
    for (const auto& p : points) {
        geom::PointFrame f(m, p, geom::Depth::Second, order);
        std::array<PointFit, kConditionCount> pf;
        classify_point(f, eps, pf);
        tensors.push_back(point_tensors(f));
        fits.push_back(std::move(pf));
    }
    return aggregate(m.n, eps, points, std::move(tensors), std::move(fits));
}

}  // namespace finsler::fit
