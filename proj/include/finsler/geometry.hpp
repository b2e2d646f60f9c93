#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "finsler/jets.hpp"
#include "finsler/metric.hpp"

namespace finsler::geom {

enum class Depth { Base, First, Second };

/// A point of the slit tangent bundle in chart coordinates.
struct TMPoint {
    std::vector<double> x, y;
};

/// Raised when a point is outside the metric's domain or the fundamental
/// tensor is numerically degenerate there. Points are rejected, not repaired.
class DegeneratePoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric curvature data at one point. Index conventions:
///   g, g_inv, Ric      row-major n x n
///   cartan             C_ijk, fully symmetric, n^3
///   N                  N^i_j, n^2
///   Gamma              Gamma^i_jk, symmetric in (j,k), n^3
///   Rhat               Rhat^i_kl, antisymmetric in (k,l), n^3
///   R, Gten, Cten      T^i_jkl: value slot i, transported slot j, plane
///                      slots (k,l); component of T(delta_k, delta_l) dbar_j
///   dX                 h-covariant derivative, leading derivative slot
///   ddX                second derivative, outer derivative slot first
struct CurvatureBundle {
    int n = 0;
    Depth depth = Depth::Base;
    std::vector<double> g, g_inv, cartan, spray, N, Gamma, Rhat, R, Ric, Gten, Cten;
    double r = 0.0;
    std::vector<double> dR, dRic, dC, dr;
    std::vector<double> ddR, ddRic, ddC;
};

/// Jet-valued curvature pipeline at one point. Tensors are flat row-major
/// arrays of jets; every jet's truncation order shrinks as derivatives are
/// consumed, which keeps late-stage arithmetic cheap.
struct PointFrame {
    PointFrame(const zoo::FinslerMetric& m, const TMPoint& p, Depth depth, int order = 8);

    int n = 0;
    Depth depth = Depth::Base;
    int order = 0;
    TMPoint point;

    std::vector<jets::Jet> xj, yj;  // coordinate jets
    jets::Jet F2;
    std::vector<jets::Jet> g, g_inv, cartan, cartan_up, spray, N, Gamma, Rhat, R, Ric, Gten, Cten;
    jets::Jet r;
    std::vector<jets::Jet> dR, dRic, dC, dr;
    std::vector<jets::Jet> ddR, ddRic, ddC;

    /// Derivative along the horizontal frame field delta_m.
    jets::Jet delta(const jets::Jet& f, int m) const;

    /// h-covariant derivative of a jet tensor with `rank` slots; bit s of
    /// `up_mask` marks slot s contravariant. Output prepends the derivative
    /// slot: out[m][i0..i_{rank-1}].
    std::vector<jets::Jet> nabla(std::span<const jets::Jet> T, int rank, unsigned up_mask) const;

    CurvatureBundle values() const;
};

/// Fundamental tensor at a point; rejects non-positive-definite points.
std::vector<double> fundamental_tensor(const zoo::FinslerMetric& m, const TMPoint& p);

/// Cartan tensor C_ijk = quarter third fiber derivative of the energy.
std::vector<double> cartan_tensor(const zoo::FinslerMetric& m, const TMPoint& p);

struct ConnectionData {
    std::vector<double> spray, N, Gamma;
};

/// Spray, nonlinear connection and horizontal connection coefficients.
ConnectionData connection(const zoo::FinslerMetric& m, const TMPoint& p, int order = 6);

/// Full curvature apparatus through the requested depth.
CurvatureBundle curvature(const zoo::FinslerMetric& m, const TMPoint& p, Depth depth,
                          int order = 8);

/// Derivation action of the curvature on a covariant rank-k tensor:
/// out[(u*n+v)*n^k + (w_1..w_k)] = (R(e_u, e_v) omega)(w_1, ..., w_k)
///   = - sum_s sum_m R^m_{w_s uv} omega(w_1, .., m, .., w_k).
std::vector<double> curvature_action(std::span<const double> R, std::span<const double> omega,
                                     int rank, int n);

/// Index-lowered rank-4 tensor in intrinsic argument order:
/// lowered[a][b][c][d] = g(T(e_a, e_b) e_c, e_d) = sum_m g[d][m] T[m][c][a][b].
std::vector<double> lower_rank4(std::span<const double> T, std::span<const double> g, int n);
std::vector<jets::Jet> lower_rank4(std::span<const jets::Jet> T, std::span<const jets::Jet> g,
                                   int n);

}  // namespace finsler::geom
