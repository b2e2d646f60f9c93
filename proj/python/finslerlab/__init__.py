"""Cartan-connection curvature and recurrence classification for Finsler metrics.

Thin wrappers over the C++ core: metrics are built from builtin families or
the metric file format, curvature tensors are computed through truncated-jet
automatic differentiation, and the classifier fits the recurrence laws and
evaluates the implication rules.
"""

import json as _json

from finslerlab._core import (  # noqa: F401
    Metric,
    MetricError,
    MetricLoadError,
    SamplingError,
    DegeneratePointError,
    __version__,
    build_metric,
    classify_json,
    curvature,
    diagram_json,
    energy,
    metric_from_text,
    oracle_json,
    verify_json,
)


def _as_report(pair):
    text, exit_code = pair
    report = _json.loads(text)
    report["exit_code"] = exit_code
    return report


def classify(metric="euclidean", **kwargs):
    """Classify all fifteen recurrence conditions; returns the report dict."""
    return _as_report(classify_json(metric, **kwargs))


def verify(metric="euclidean", **kwargs):
    """Evaluate the curvature identities as residuals; returns the report dict."""
    return _as_report(verify_json(metric, **kwargs))


def diagram(metric="euclidean", **kwargs):
    """Classify and evaluate the implication rules; returns the report dict."""
    return _as_report(diagram_json(metric, **kwargs))


def oracle(metric="euclidean", **kwargs):
    """Cross-check the jet pipeline against finite differences."""
    return _as_report(oracle_json(metric, **kwargs))
