#pragma once

#include <functional>
#include <span>
#include <vector>

namespace finsler::fd {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Default central-difference step for a partial of the given total order.
/// First order uses 1e-4; higher orders back off to keep the roundoff
/// amplification eps/h^k below the truncation error.
double step_for_order(int total_order);

/// Mixed partial d^alpha f at `point` by tensor-product central stencils
/// (second-order accurate), Richardson-extrapolated over h and h/2.
double partial(const ScalarFn& f, std::span<const double> point, std::span<const int> alpha,
               double h);

double partial(const ScalarFn& f, std::span<const double> point, std::span<const int> alpha);

}  // namespace finsler::fd
