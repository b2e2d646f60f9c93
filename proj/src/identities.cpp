#include "finsler/identities.hpp"

#include <algorithm>
#include <cmath>

namespace finsler::identities {

namespace {

using fit::Condition;
using fit::PointFit;
using fit::Verdict;
using jets::Jet;

double frob(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> values(std::span<const Jet> src) {
    std::vector<double> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i].value();
    return out;
}

const PointFit& at(const std::array<PointFit, fit::kConditionCount>& fits, Condition c) {
    return fits[static_cast<std::size_t>(c)];
}

bool holds(const std::array<PointFit, fit::kConditionCount>& fits, Condition c) {
    return at(fits, c).verdict == Verdict::Holds;
}

}  // namespace

IdentitySet structural_residuals(const geom::PointFrame& f, const fit::Eps& eps) {
    const int n = f.n;
    IdentitySet out;
    auto b = f.values();
    auto i2 = [&](int i, int j) { return static_cast<std::size_t>(i * n + j); };
    auto i4 = [&](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };

    const double normR = frob(b.R);
    const double rhat_rel = frob(b.Rhat) / std::max(normR, eps.abs);
    const bool integrable = rhat_rel < eps.fit;
    auto guards = [&]() {
        std::map<std::string, double> g;
        g["norm_rhat"] = frob(b.Rhat);
        g["rhat_rel"] = rhat_rel;
        return g;
    };

    {  // cyclic sum of R(X,Y)Z over the three arguments
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        worst = std::max(worst, std::abs(b.R[i4(i, j, k, l)] + b.R[i4(i, k, l, j)] +
                                                         b.R[i4(i, l, j, k)]));
        IdentityResult r;
        r.scale = std::max(normR, eps.abs);
        r.residual = worst / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["cyclic_R"] = r;
    }

    auto low = geom::lower_rank4(b.R, b.g, n);
    {  // pair symmetry of the lowered tensor
        double worst = 0.0;
        for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        worst = std::max(worst,
                                         std::abs(low[i4(a, bb, c, d)] - low[i4(c, d, a, bb)]));
        IdentityResult r;
        r.scale = std::max(frob(low), eps.abs);
        r.residual = worst / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["pair_symmetry"] = r;
    }

    if (!f.dR.empty()) {  // cyclic sum of the lowered covariant derivative
        auto lowj = geom::lower_rank4(f.R, f.g, n);
        auto dlow = f.nabla(lowj, 4, 0u);
        auto dlv = values(dlow);
        auto i5 = [&](int v, int a, int bb, int c, int d) {
            return static_cast<std::size_t>((((v * n + a) * n + bb) * n + c) * n + d);
        };
        double worst = 0.0;
        for (int v = 0; v < n; ++v)
            for (int a = 0; a < n; ++a)
                for (int bb = 0; bb < n; ++bb)
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d)
                            worst = std::max(worst, std::abs(dlv[i5(v, a, bb, c, d)] +
                                                             dlv[i5(a, bb, v, c, d)] +
                                                             dlv[i5(bb, v, a, c, d)]));
        IdentityResult r;
        // a symmetric space drives the derivative itself to rounding level,
        // so the lowered tensor norm floors the comparison scale
        r.scale = std::max({frob(dlv), frob(low), eps.abs});
        r.residual = worst / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["cyclic_nabla_R"] = r;
    }

    {  // Ricci symmetry
        double worst = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(b.Ric[i2(j, k)] - b.Ric[i2(k, j)]));
        IdentityResult r;
        r.scale = std::max(frob(b.Ric), eps.abs);
        r.residual = worst / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["ric_symmetry"] = r;
    }

    auto three_pair_cyclic = [&](std::span<const double> lowered) {
        auto act = geom::curvature_action(b.R, lowered, 4, n);
        const std::size_t comp = lowered.size();
        auto a6 = [&](int u, int v, int w, int x, int y, int z) {
            return (static_cast<std::size_t>(u * n + v)) * comp +
                   static_cast<std::size_t>(((w * n + x) * n + y) * n + z);
        };
        double worst = 0.0;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                for (int w = 0; w < n; ++w)
                    for (int x = 0; x < n; ++x)
                        for (int y = 0; y < n; ++y)
                            for (int z = 0; z < n; ++z)
                                worst = std::max(worst,
                                                 std::abs(act[a6(u, v, w, x, y, z)] +
                                                          act[a6(w, x, y, z, u, v)] +
                                                          act[a6(y, z, u, v, w, x)]));
        return worst;
    };

    {  // three-pair cyclic action on the lowered curvature
        IdentityResult r;
        r.scale = std::max(normR * frob(low), eps.abs);
        r.residual = three_pair_cyclic(low) / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["action_R_lowR"] = r;
    }

    {  // same with the lowered concircular tensor; when it degenerates to
       // rounding level the lowered curvature sets the comparison scale
        auto lowC = geom::lower_rank4(b.Cten, b.g, n);
        IdentityResult r;
        r.scale = std::max(normR * std::max(frob(lowC), frob(low)), eps.abs);
        r.residual = three_pair_cyclic(lowC) / r.scale;
        r.applicable = integrable;
        r.guards = guards();
        out["action_R_lowC"] = r;
    }

    if (!f.dR.empty()) {  // second-derivative commutator on the fiber one-form
        const int po = f.g[0].order();
        Jet L = sqrt(f.F2.truncated(po));
        std::vector<Jet> omega(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Jet acc = f.g[i2(i, 0)].truncated(po) * f.yj[0].truncated(po);
            for (int j = 1; j < n; ++j)
                acc += f.g[i2(i, j)].truncated(po) * f.yj[static_cast<std::size_t>(j)].truncated(po);
            omega[static_cast<std::size_t>(i)] = acc / L;
        }
        auto dom = f.nabla(omega, 1, 0u);
        auto ddom = f.nabla(dom, 2, 0u);
        auto om = values(omega);
        auto act = geom::curvature_action(b.R, om, 1, n);
        auto dd = [&](int a, int bb, int z) {
            return ddom[static_cast<std::size_t>((a * n + bb) * n + z)].value();
        };
        double worst = 0.0;
        double scale = std::max({frob(values(ddom)), frob(act), eps.abs});
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                for (int z = 0; z < n; ++z) {
                    double lhs = dd(y, x, z) - dd(x, y, z) -
                                 act[(static_cast<std::size_t>(x * n + y)) * static_cast<std::size_t>(n) +
                                     static_cast<std::size_t>(z)];
                    worst = std::max(worst, std::abs(lhs));
                }
        IdentityResult r;
        r.scale = scale;
        r.residual = worst / scale;
        r.applicable = integrable;
        r.guards = guards();
        out["ricci_identity"] = r;
    }

    return out;
}

IdentitySet recurrence_residuals(const geom::PointFrame& f,
                                 const std::array<fit::PointFit, fit::kConditionCount>& fits,
                                 const fit::Eps& eps) {
    const int n = f.n;
    IdentitySet out;
    auto b = f.values();
    auto i4 = [&](int i, int j, int k, int l) {
        return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
    };
    const double normR = frob(b.R);
    const double rhat_rel = frob(b.Rhat) / std::max(normR, eps.abs);
    const bool integrable = rhat_rel < eps.fit;
    const double r_thr = 1e-8;

    auto cyclic_outer = [&](std::span<const double> A, std::span<const double> T4,
                            const double* B, std::span<const double> U4) {
        // cyclic sum over (X,Y,Z) of A(X) T(Y,Z)W (+ B(X) U(Y,Z)W)
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int w = 0; w < n; ++w)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        for (int z = 0; z < n; ++z) {
                            double s = A[static_cast<std::size_t>(x)] * T4[i4(i, w, y, z)] +
                                       A[static_cast<std::size_t>(y)] * T4[i4(i, w, z, x)] +
                                       A[static_cast<std::size_t>(z)] * T4[i4(i, w, x, y)];
                            if (B) {
                                s += B[x] * U4[i4(i, w, y, z)] + B[y] * U4[i4(i, w, z, x)] +
                                     B[z] * U4[i4(i, w, x, y)];
                            }
                            worst = std::max(worst, std::abs(s));
                        }
        return worst;
    };

    if (!at(fits, Condition::F).A.empty()) {
        const auto& pf = at(fits, Condition::F);
        IdentityResult r;
        r.scale = std::max(frob(pf.A) * normR, eps.abs);
        r.residual = cyclic_outer(pf.A, b.R, nullptr, {}) / r.scale;
        r.applicable = holds(fits, Condition::F) && integrable;
        r.guards["rhat_rel"] = rhat_rel;
        r.guards["norm_A"] = frob(pf.A);
        out["recurrent_cyclic"] = r;
    }

    if (!at(fits, Condition::GF).A.empty()) {
        const auto& pf = at(fits, Condition::GF);
        IdentityResult r;
        r.scale = std::max(frob(pf.A) * normR + frob(pf.B) * frob(b.Gten), eps.abs);
        r.residual = cyclic_outer(pf.A, b.R, pf.B.data(), b.Gten) / r.scale;
        r.applicable = holds(fits, Condition::GF) && integrable;
        r.guards["rhat_rel"] = rhat_rel;
        out["gen_recurrent_cyclic"] = r;
    }

    {  // symmetry of nabla A for the simple and concircular recurrence forms
        const PointFit* src = nullptr;
        bool premise = false;
        if (holds(fits, Condition::F)) {
            src = &at(fits, Condition::F);
            premise = true;
        } else if (holds(fits, Condition::CF)) {
            src = &at(fits, Condition::CF);
            premise = true;
        } else if (!at(fits, Condition::F).A.empty()) {
            src = &at(fits, Condition::F);
        }
        if (src && !src->dbarA.empty()) {
            IdentityResult r;
            r.scale = std::max(src->side.count("norm_nabla_A") ? src->side.at("norm_nabla_A") : 0.0,
                               eps.abs);
            r.residual = frob(src->dbarA) / r.scale;
            r.applicable = premise && integrable;
            r.guards["rhat_rel"] = rhat_rel;
            out["dA_symmetry"] = r;
        }
    }

    {  // symmetry of the fitted second-order form
        const PointFit* src = nullptr;
        bool premise = false;
        if (holds(fits, Condition::TwoF)) {
            src = &at(fits, Condition::TwoF);
            premise = true;
        } else if (holds(fits, Condition::TwoCF)) {
            src = &at(fits, Condition::TwoCF);
            premise = true;
        }
        if (src && src->side.count("alpha_antisym")) {
            IdentityResult r;
            r.scale = std::max(src->side.at("norm_alpha"), eps.abs);
            r.residual = src->side.at("alpha_antisym") / r.scale;
            r.applicable = premise && integrable;
            r.guards["rhat_rel"] = rhat_rel;
            out["alpha_symmetry"] = r;
        }
    }

    {  // the action of R annihilates the lowered curvature
        auto low = geom::lower_rank4(b.R, b.g, n);
        auto act = geom::curvature_action(b.R, low, 4, n);
        IdentityResult r;
        r.scale = std::max(normR * frob(low), eps.abs);
        r.residual = frob(act) / r.scale;
        r.applicable = integrable && (holds(fits, Condition::F) || holds(fits, Condition::CF) ||
                                      holds(fits, Condition::GF));
        r.guards["rhat_rel"] = rhat_rel;
        out["action_R_lowR_zero"] = r;
    }

    {  // the action of R annihilates the lowered concircular tensor
        auto lowC = geom::lower_rank4(b.Cten, b.g, n);
        auto lowR = geom::lower_rank4(b.R, b.g, n);
        auto act = geom::curvature_action(b.R, lowC, 4, n);
        IdentityResult r;
        r.scale = std::max(normR * std::max(frob(lowC), frob(lowR)), eps.abs);
        r.residual = frob(act) / r.scale;
        r.applicable = integrable && holds(fits, Condition::CF);
        r.guards["rhat_rel"] = rhat_rel;
        out["action_R_lowC_zero"] = r;
    }

    if (!at(fits, Condition::GF).dbarB_wedge.empty()) {
        const auto& pf = at(fits, Condition::GF);
        IdentityResult r;
        r.scale = std::max({pf.side.count("norm_nabla_B_plus_AB") ? pf.side.at("norm_nabla_B_plus_AB") : 0.0,
                            frob(pf.A) * frob(pf.B), eps.abs});
        r.residual = frob(pf.dbarB_wedge) / r.scale;
        r.applicable = holds(fits, Condition::GF) && integrable;
        r.guards["rhat_rel"] = rhat_rel;
        out["dB_wedge_zero"] = r;
    }

    if (at(fits, Condition::G2F).side.count("alpha_antisym")) {
        const auto& pf = at(fits, Condition::G2F);
        const double r_val = f.r.value();
        std::vector<double> drv = values(f.dr);
        bool r_const = frob(drv) / std::max(std::abs(r_val), 1.0) < eps.fit;
        IdentityResult r;
        double a_asym = pf.side.at("alpha_antisym") / std::max(pf.side.at("norm_alpha"), eps.abs);
        double m_asym = pf.side.at("mu_antisym") / std::max(pf.side.at("norm_mu"), eps.abs);
        r.scale = 1.0;
        r.residual = std::max(a_asym, m_asym);
        r.applicable = holds(fits, Condition::G2F) && integrable && r_const &&
                       std::abs(r_val) > r_thr;
        r.guards["rhat_rel"] = rhat_rel;
        r.guards["r"] = r_val;
        out["two_form_symmetry"] = r;
    }

    return out;
}

double parallel_scalar_residual(int n, std::span<const double> g_inv, std::span<const double> Ric,
                                double r, std::span<const double> grad_r,
                                std::span<const double> A, std::span<const double> B) {
    // Ric_o^i_j = g^{ik} Ric_kj; (A o Ric_o)_j = A_i Ric_o^i_j
    std::vector<double> aric(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                acc += A[static_cast<std::size_t>(i)] * g_inv[static_cast<std::size_t>(i * n + k)] *
                       Ric[static_cast<std::size_t>(k * n + j)];
        aric[static_cast<std::size_t>(j)] = acc;
    }
    std::vector<double> t1(static_cast<std::size_t>(n)), t2(static_cast<std::size_t>(n)),
        t3(static_cast<std::size_t>(n)), t4(static_cast<std::size_t>(n)),
        sum(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        t1[static_cast<std::size_t>(j)] = 2.0 * r * A[static_cast<std::size_t>(j)];
        t2[static_cast<std::size_t>(j)] = -2.0 * n * aric[static_cast<std::size_t>(j)];
        t3[static_cast<std::size_t>(j)] = n * (n - 1.0) * (n - 2.0) * B[static_cast<std::size_t>(j)];
        t4[static_cast<std::size_t>(j)] = (n - 2.0) * grad_r[static_cast<std::size_t>(j)];
        sum[static_cast<std::size_t>(j)] = t1[static_cast<std::size_t>(j)] + t2[static_cast<std::size_t>(j)] +
                                           t3[static_cast<std::size_t>(j)] + t4[static_cast<std::size_t>(j)];
    }
    double scale = std::max({frob(t1), frob(t2), frob(t3), frob(t4), 1e-14});
    return frob(sum) / scale;
}

std::vector<LawCheck> law_checks(const geom::PointFrame& f,
                                 const std::array<fit::PointFit, fit::kConditionCount>& fits,
                                 const fit::Eps& eps, double rhat_rel, double r_const_dev) {
    const int n = f.n;
    std::vector<LawCheck> out;
    auto b = f.values();
    const double r_thr = 1e-8;

    auto outer_residual = [&](std::span<const double> D, std::span<const double> form,
                              std::span<const double> T, const std::vector<double>* form2,
                              std::span<const double> U) {
        // |D - form (x) T (- form2 (x) U)| / max(|D|, abs)
        const std::size_t K = T.size();
        double num = 0.0, den = 0.0;
        for (std::size_t m = 0; m < form.size(); ++m)
            for (std::size_t k = 0; k < K; ++k) {
                double d = D[m * K + k] - form[m] * T[k];
                if (form2) d -= (*form2)[m] * U[k];
                num += d * d;
                den += D[m * K + k] * D[m * K + k];
            }
        return std::sqrt(num) / std::max(std::sqrt(den), eps.abs);
    };

    const auto& pfF = at(fits, Condition::F);
    {
        LawCheck c;
        c.id = "ricci_reuse_A";
        c.applicable = holds(fits, Condition::F);
        if (!pfF.A.empty()) c.residual = outer_residual(b.dRic, pfF.A, b.Ric, nullptr, {});
        out.push_back(c);
    }
    {
        LawCheck c;
        c.id = "concircular_reuse_A";
        c.applicable = holds(fits, Condition::F) && std::abs(b.r) > r_thr;
        if (!pfF.A.empty()) c.residual = outer_residual(b.dC, pfF.A, b.Cten, nullptr, {});
        out.push_back(c);
    }
    {
        LawCheck c;
        c.id = "second_from_first";
        c.applicable = holds(fits, Condition::F) && !b.ddR.empty();
        if (!pfF.alpha_form.empty() && !b.ddR.empty())
            c.residual = outer_residual(b.ddR, pfF.alpha_form, b.R, nullptr, {});
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::RF);
        LawCheck c;
        c.id = "second_from_first_ric";
        c.applicable = holds(fits, Condition::RF) && !b.ddRic.empty();
        if (!pf.alpha_form.empty() && !b.ddRic.empty())
            c.residual = outer_residual(b.ddRic, pf.alpha_form, b.Ric, nullptr, {});
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::GF);
        LawCheck c;
        c.id = "gen_second_from_first";
        c.applicable = holds(fits, Condition::GF) && !b.ddR.empty();
        if (!pf.alpha_form.empty() && !pf.mu_form.empty() && !b.ddR.empty())
            c.residual = outer_residual(b.ddR, pf.alpha_form, b.R, &pf.mu_form, b.Gten);
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::GF);
        LawCheck c;
        c.id = "scalar_trace_law";
        c.applicable = holds(fits, Condition::GF);
        if (!pf.A.empty() && !pf.B.empty()) {
            std::vector<double> res(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                res[static_cast<std::size_t>(i)] = b.dr[static_cast<std::size_t>(i)] -
                                                   b.r * pf.A[static_cast<std::size_t>(i)] -
                                                   n * (n - 1.0) * pf.B[static_cast<std::size_t>(i)];
            c.residual = frob(res) / std::max(std::abs(b.r), 1.0);
        }
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::GCF);
        LawCheck c;
        c.id = "gcf_curvature_law";
        c.applicable = holds(fits, Condition::GCF);
        if (!pf.A.empty() && !pf.B1.empty())
            c.residual = outer_residual(b.dR, pf.A, b.R, &pf.B1, b.Gten);
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::GCF);
        LawCheck c;
        c.id = "gcf_ricci_law";
        c.applicable = holds(fits, Condition::GCF);
        if (!pf.A.empty() && !pf.B1.empty()) {
            std::vector<double> b2(pf.B1);
            for (auto& v : b2) v *= (n - 1.0);
            c.residual = outer_residual(b.dRic, pf.A, b.Ric, &b2, b.g);
        }
        out.push_back(c);
    }
    {
        const auto& pf = at(fits, Condition::GCF);
        LawCheck c;
        c.id = "gcf_constant_r_law";
        c.applicable = holds(fits, Condition::GCF) && rhat_rel < eps.fit &&
                       r_const_dev < eps.fit;
        if (!pf.A.empty() && !pf.B.empty()) {
            // D = n(n-1)/2 B - A o Ric_o
            std::vector<double> D(static_cast<std::size_t>(n), 0.0);
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        acc += pf.A[static_cast<std::size_t>(i)] *
                               b.g_inv[static_cast<std::size_t>(i * n + k)] *
                               b.Ric[static_cast<std::size_t>(k * n + j)];
                D[static_cast<std::size_t>(j)] = 0.5 * n * (n - 1.0) * pf.B[static_cast<std::size_t>(j)] - acc;
            }
            c.residual = outer_residual(b.dRic, pf.A, b.Ric, &D, b.g);
            c.aux = frob(D);
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace finsler::identities
