#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/jets.hpp"

namespace finsler::zoo {

/// Raised for invalid metric parameters or failed construction-time checks.
class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A validated Finsler metric: dimension, an energy function F^2 evaluable
/// over jets, and the domain predicate of the slit region where the metric
/// is defined. Immutable and freely shareable.
struct FinslerMetric {
    int n = 0;
    std::string label;
    std::string family;
    std::function<jets::Jet(std::span<const jets::Jet>, std::span<const jets::Jet>)> energy;
    std::function<double(std::span<const double>, std::span<const double>)> energy_value;
    std::function<bool(std::span<const double>, std::span<const double>)> domain;
};

struct MetricSpec {
    std::string family;  // euclidean, riemannian_diag, constant_curvature,
                         // conformal, randers, product, dsl
    int n = 3;
    double kappa = 1.0;
    std::string f;                    // conformal / product exponent, expression in x
    std::vector<std::string> diag;    // riemannian_diag entries d1..dn
    std::vector<std::string> b;       // randers covector entries b1..bn
    std::vector<std::string> a_diag;  // randers base diagonal a1..an (default 1)
    std::string dsl_src;
    bool dsl_is_energy = false;  // true when the DSL source defines F^2
    std::string label;
};

/// Validate parameters and assemble the metric. Checks positive
/// 1-homogeneity of F in y and positive definiteness of the fundamental
/// tensor on seeded sample points; throws MetricError on failure.
FinslerMetric build(const MetricSpec& spec);

/// Parse the line-oriented metric file format (`key = value`, `#` comments).
MetricSpec parse_metric_file(const std::string& text);

/// Default parameterization for a builtin family name.
MetricSpec builtin_spec(const std::string& family, int n, double kappa);

bool is_builtin(const std::string& family);

/// Fundamental tensor at a point from second fiber derivatives of the
/// energy, row-major n x n. Construction-time validation helper.
std::vector<double> fundamental_matrix(const FinslerMetric& m, std::span<const double> x,
                                       std::span<const double> y);

/// True when a symmetric matrix (row-major) is positive definite.
bool positive_definite(std::span<const double> g, int n);

}  // namespace finsler::zoo
