#pragma once

#include <map>
#include <string>
#include <vector>

#include "finsler/fit.hpp"
#include "finsler/geometry.hpp"

namespace finsler::identities {

/// One identity evaluated numerically: residual relative to `scale`, with
/// the applicability of its hypothesis and the guard values that decided it.
/// Inapplicable identities are still evaluated and reported.
struct IdentityResult {
    double residual = 0.0;
    double scale = 0.0;
    bool applicable = false;
    std::map<std::string, double> guards;
};

using IdentitySet = std::map<std::string, IdentityResult>;

/// Structural curvature identities at one point. Keys:
///   cyclic_R            cyclic sum of R(X,Y)Z
///   pair_symmetry       lowered tensor swap of argument pairs
///   cyclic_nabla_R      cyclic sum of the lowered derivative (first 3 slots)
///   ric_symmetry        asymmetry of the Ricci tensor
///   action_R_lowR       three-pair cyclic sum of the action of R on lowered R
///   action_R_lowC       same with the lowered concircular tensor
///   ricci_identity      second-derivative commutator on the normalized
///                       fiber one-form g(eta,.)/L
/// All guarded by horizontal integrability (relative Rhat norm below the
/// fit tolerance).
IdentitySet structural_residuals(const geom::PointFrame& f, const fit::Eps& eps);

/// Recurrence-conditional identities at one point, driven by the fitted
/// forms. Keys:
///   recurrent_cyclic        cyclic sum of A (x) R            [premise F]
///   gen_recurrent_cyclic    cyclic sum of A (x) R + B (x) G  [premise GF]
///   dA_symmetry             symmetry of nabla A              [premise F or CF]
///   alpha_symmetry          symmetry of the fitted two-form  [premise 2F or 2CF]
///   action_R_lowR_zero      R acting on lowered R vanishes   [premise F, CF or GF]
///   action_R_lowC_zero      R acting on lowered C vanishes   [premise CF]
///   dB_wedge_zero           dbar B + A wedge B vanishes      [premise GF]
///   two_form_symmetry       fitted alpha and mu symmetric    [premise G2F, r const nonzero]
IdentitySet recurrence_residuals(const geom::PointFrame& f,
                                 const std::array<fit::PointFit, fit::kConditionCount>& fits,
                                 const fit::Eps& eps);

/// Residual of the contracted parallel-scalar identity
///   2 r A - 2 n A o Ric_o + n(n-1)(n-2) B + (n-2) grad r = 0
/// relative to the largest term norm. Ric_o is the metric-raised Ricci
/// operator.
double parallel_scalar_residual(int n, std::span<const double> g_inv,
                                std::span<const double> Ric, double r,
                                std::span<const double> grad_r, std::span<const double> A,
                                std::span<const double> B);

/// One theorem-consistency law evaluated at a point: when the premise
/// condition holds, the stated residual law must close below the fit
/// tolerance. `aux` carries a secondary norm when the law asserts one.
struct LawCheck {
    std::string id;
    bool applicable = false;
    double residual = 0.0;
    double aux = 0.0;
};

/// The residual laws derived from the recurrence theorems:
///   ricci_reuse_A           [F]   nabla Ric = A (x) Ric with F's form
///   concircular_reuse_A     [F, r nonzero]  nabla C = A (x) C
///   second_from_first       [F]   nabla nabla R = (nabla A + A A) (x) R
///   second_from_first_ric   [RF]  same shape on the Ricci tensor
///   gen_second_from_first   [GF]  adds (nabla B + A B) (x) G
///   scalar_trace_law        [GF]  nabla r = r A + n(n-1) B
///   gcf_curvature_law       [GCF] nabla R = A (x) R + B1 (x) G
///   gcf_ricci_law           [GCF] nabla Ric = A (x) Ric + (n-1) B1 (x) g
///   gcf_constant_r_law      [GCF, Rhat ~ 0, r const] nabla Ric = A (x) Ric + D (x) g,
///                           D = n(n-1)/2 B - A o Ric_o; aux = |D|
std::vector<LawCheck> law_checks(const geom::PointFrame& f,
                                 const std::array<fit::PointFit, fit::kConditionCount>& fits,
                                 const fit::Eps& eps, double rhat_rel, double r_const_dev);

}  // namespace finsler::identities
