#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/diagram.hpp"
#include "finsler/fit.hpp"
#include "finsler/geometry.hpp"
#include "finsler/identities.hpp"

namespace finsler::report {

inline constexpr const char* kToolVersion = "0.1.0";

/// Raised when the metric argument cannot be loaded or parsed (exit 4).
class MetricLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when sampling cannot produce enough valid points (exit 5).
class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string metric = "euclidean";  // builtin family name or a file path
    int n = 3;
    double kappa = 1.0;
    int points = 8;
    std::uint64_t seed = 0;
    int order = 8;
    geom::Depth depth = geom::Depth::Second;
    fit::Eps eps;
    std::string out = "-";
    enum class Format { Json, Text } format = Format::Json;
};

struct Document {
    std::string json;
    std::string text;
    int exit_code = 0;
};

/// Resolve the metric argument: a builtin family name or a metric file path.
zoo::FinslerMetric load_metric(const RunConfig& cfg);

/// Deterministic sample points: x uniform over the box [-1, 1]^n, y uniform
/// on the unit sphere, rejection-sampled against the domain predicate and
/// the positive-definiteness of the fundamental tensor.
std::vector<geom::TMPoint> sample_points(const zoo::FinslerMetric& m, int count,
                                         std::uint64_t seed);

Document run_classify(const RunConfig& cfg);
Document run_verify(const RunConfig& cfg);
Document run_diagram(const RunConfig& cfg);
Document run_oracle(const RunConfig& cfg);

/// Threshold for the oracle command's pass/fail exit code.
inline constexpr double kOracleGate = 1e-4;

}  // namespace finsler::report
