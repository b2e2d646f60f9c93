#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler::fit {

enum class Verdict { Holds, Fails, Degenerate };
const char* verdict_name(Verdict v);

/// The fifteen recurrence/symmetry conditions: five shapes for each of the
/// three target tensors (h-curvature, Ricci, concircular).
enum class Condition {
    Sym, F, TwoF, GF, G2F,
    RSym, RF, TwoRF, GRF, G2RF,
    CSym, CF, TwoCF, GCF, G2CF,
};
inline constexpr int kConditionCount = 15;
const char* condition_name(Condition c);
const std::array<Condition, kConditionCount>& all_conditions();

struct Eps {
    double fit = 1e-7;
    double deg = 1e-10;   // scaled by sqrt(component count) where applied
    double form = 1e-9;
    double gram = 1e-10;
    double abs = 1e-14;
};

/// Value-level outcome of a single least-squares recurrence fit.
struct FitOutcome {
    Verdict verdict = Verdict::Fails;
    double residual = 0.0;
    double target_norm = 0.0;
    bool symmetric = false;  // derivative data vanishes relative to the target
    bool a_zero = false;
    bool b_zero = false;
    std::vector<double> A, B;  // fitted form components per derivative index
};

/// Fit D[m] ~= A_m T by per-index projection: A_m = <D_m, T> / <T, T>.
/// D holds m_count blocks of K = T.size() components.
FitOutcome fit_proportional(std::span<const double> D, std::span<const double> T, int m_count,
                            const Eps& eps);

/// Fit D[m] ~= A_m T + B_m U through the 2x2 normal equations per index.
/// Degenerate when the (T, U) Gram matrix is numerically singular.
FitOutcome fit_affine(std::span<const double> D, std::span<const double> T,
                      std::span<const double> U, int m_count, const Eps& eps);

/// One condition's fit at one sample point, with the derived side values
/// used by the theorem guards.
struct PointFit {
    Verdict verdict = Verdict::Degenerate;
    double residual = 0.0;
    double target_norm = 0.0;
    bool symmetric = false;
    bool a_zero = false;
    bool b_zero = false;
    std::vector<double> A, B;           // n (one-forms) or n*n (two-forms)
    std::vector<double> alpha_form;     // nabla A + A (x) A, n*n
    std::vector<double> mu_form;        // nabla B + A (x) B, n*n
    std::vector<double> dbarA;          // antisymmetrized nabla A, n*n
    std::vector<double> dbarB_wedge;    // dbar B + A wedge B, n*n
    std::vector<double> B1;             // B - rA/(n(n-1)) + grad r/(n(n-1)), n
    std::map<std::string, double> side;
};

struct ConditionReport {
    Verdict verdict = Verdict::Degenerate;
    double max_residual = 0.0;
    bool symmetric = false;
    std::vector<PointFit> points;
    std::map<std::string, double> side;  // per-key _min / _max aggregates
};

struct PointTensors {
    double r = 0.0;
    double norm_R = 0.0, norm_Ric = 0.0, norm_C = 0.0, norm_Rhat = 0.0, norm_dr = 0.0;
};

struct Report {
    int n = 0;
    Eps eps;
    std::vector<geom::TMPoint> points;
    std::vector<PointTensors> tensors;
    std::array<ConditionReport, kConditionCount> conditions;
    // bundle-level aggregates used by the diagram guards
    double rhat_rel_max = 0.0;   // max_p |Rhat| / max(|R|, abs)
    double r_abs_min = 0.0;      // min_p |r|
    double r_const_dev = 0.0;    // max_p |grad r| / max(|r|, 1)
    const ConditionReport& at(Condition c) const {
        return conditions[static_cast<std::size_t>(c)];
    }
    ConditionReport& at(Condition c) { return conditions[static_cast<std::size_t>(c)]; }
};

/// Classify all fifteen conditions at the sample points and aggregate.
/// Requires n >= 3 and at least one point.
Report classify(const zoo::FinslerMetric& m, const std::vector<geom::TMPoint>& points,
                const Eps& eps, int order = 8);

/// Classify a single already-computed frame (exposed for reuse by tests and
/// the theorem-consistency suite).
void classify_point(const geom::PointFrame& frame, const Eps& eps,
                    std::array<PointFit, kConditionCount>& out);

/// Per-point tensor norms used by the report and the diagram guards.
PointTensors point_tensors(const geom::PointFrame& frame);

/// Combine per-point fits into the aggregated report (all points must
/// agree for a condition to hold; any failing point fails it).
Report aggregate(int n, const Eps& eps, std::vector<geom::TMPoint> points,
                 std::vector<PointTensors> tensors,
                 std::vector<std::array<PointFit, kConditionCount>> fits);

}  // namespace finsler::fit
