#pragma once

#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler::oracle {

/// Connection and curvature tensors recomputed from finite differences of
/// the energy alone: raw mixed partials by central stencils, composed
/// through explicitly coded chain rules. Shares no differentiation machinery
/// with the jet pipeline.
struct FdTensors {
    std::vector<double> g, g_inv, spray, N, Gamma, R;
};

FdTensors fd_tensors(const zoo::FinslerMetric& m, const geom::TMPoint& p);

struct Deviation {
    std::string tensor;
    double rel = 0.0;
};

struct CompareResult {
    std::vector<Deviation> per_tensor;
    double max_rel = 0.0;
};

/// Relative Frobenius deviation between the jet pipeline and the
/// finite-difference route for g, spray, N, Gamma and R at one point.
CompareResult compare(const zoo::FinslerMetric& m, const geom::TMPoint& p, int order = 8);

}  // namespace finsler::oracle
