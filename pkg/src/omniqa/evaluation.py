"""Benchmarking quality predictions against mean opinion scores."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.special import betainc
from scipy.stats import rankdata

__all__ = [
    "LogisticParams",
    "ManifestRecord",
    "ManifestFormatError",
    "EvaluationRow",
    "EvaluationReport",
    "logistic",
    "fit_logistic",
    "pearson",
    "plcc",
    "srcc",
    "f_cdf",
    "f_test",
    "load_manifest",
    "evaluate_predictions",
    "run_benchmark",
]

log = logging.getLogger(__name__)

A_BETTER = "a_better"
B_BETTER = "b_better"
INDISTINGUISHABLE = "indistinguishable"


class ManifestFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LogisticParams:
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def __post_init__(self):
        if self.beta4 == 0:
            raise ValueError("beta4 must be nonzero")

    def __call__(self, q):
        return logistic(q, self.beta1, self.beta2, self.beta3, self.beta4)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.beta1, self.beta2, self.beta3, self.beta4)


def logistic(q, b1, b2, b3, b4):
    """Four-parameter logistic ``(b1 - b2) / (1 + exp(-(q - b3) / |b4|)) + b2``."""
    z = -(np.asarray(q, dtype=np.float64) - b3) / abs(b4)
    # expit form avoids overflow warnings for large |z|
    return (b1 - b2) * (0.5 * (1.0 + np.tanh(-z / 2.0))) + b2


def _residuals(beta, pred, mos):
    return logistic(pred, *beta) - mos


def _jacobian(beta, pred, mos):
    b1, b2, b3, b4 = beta
    s = abs(b4)
    z = (pred - b3) / s
    g = 0.5 * (1.0 + np.tanh(z / 2.0))
    dg = g * (1.0 - g)
    jac = np.empty((len(pred), 4))
    jac[:, 0] = g
    jac[:, 1] = 1.0 - g
    jac[:, 2] = -(b1 - b2) * dg / s
    jac[:, 3] = -(b1 - b2) * dg * z / s * np.sign(b4)
    return jac


def fit_logistic(pred, mos) -> LogisticParams:
    """Least-squares fit of the four-parameter logistic mapping predictions to MOS.

    Starts from ``(max(mos), min(mos), mean(pred), std(pred))`` and, to catch
    decreasing relations, from the same point with ``beta1``/``beta2`` swapped.
    Damped Gauss-Newton (Levenberg-Marquardt) refines each start; a Nelder-Mead pass
    takes over if it fails. The lowest-residual result is returned, never worse than
    the initialization.
    """
    pred = np.asarray(pred, dtype=np.float64)
    mos = np.asarray(mos, dtype=np.float64)
    if pred.shape != mos.shape or pred.ndim != 1:
        raise ValueError("pred and mos must be 1-D arrays of equal length")
    if len(pred) < 5:
        raise ValueError("logistic fitting needs at least 5 samples")
    spread = float(np.std(pred))
    if spread == 0 or not np.isfinite(spread):
        raise ValueError("predictions have zero variance; the logistic mapping is undefined")

    def cost(beta):
        r = _residuals(beta, pred, mos)
        return float(np.dot(r, r))

    init = np.array([mos.max(), mos.min(), pred.mean(), spread])
    best, best_cost = init, cost(init)
    for start in (init, init[[1, 0, 2, 3]]):
        try:
            res = least_squares(
                _residuals, start, jac=_jacobian, args=(pred, mos), method="lm",
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000,
            )
            candidate = res.x
        except (ValueError, np.linalg.LinAlgError):
            candidate = minimize(cost, start, method="Nelder-Mead",
                                 options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000}).x
        if candidate[3] != 0 and np.all(np.isfinite(candidate)) and cost(candidate) < best_cost:
            best, best_cost = candidate, cost(candidate)
    return LogisticParams(*map(float, best))


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    da = a - a.mean()
    db = b - b.mean()
    den = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if den == 0:
        raise ValueError("correlation undefined for zero-variance input")
    return float(np.dot(da, db)) / den


def _mapped_pearson(params: LogisticParams, pred, mos) -> float:
    # the sign follows the direction of the fitted curve, so decreasing relations
    # (lower-is-better metrics) come out negative, like SRCC
    direction = 1.0 if params.beta1 >= params.beta2 else -1.0
    return direction * pearson(params(pred), mos)


def plcc(pred, mos, params: LogisticParams | None = None) -> float:
    """Pearson correlation between logistic-mapped predictions and MOS.

    Signed by the fitted curve's direction: a decreasing mapping gives a negative value.
    """
    pred = np.asarray(pred, dtype=np.float64)
    mos = np.asarray(mos, dtype=np.float64)
    if len(pred) < 3:
        raise ValueError("PLCC needs at least 3 pairs")
    if np.std(mos) == 0:
        raise ValueError("MOS has zero variance")
    params = params if params is not None else fit_logistic(pred, mos)
    return _mapped_pearson(params, pred, mos)


def srcc(pred, mos) -> float:
    """Spearman rank correlation (Pearson on tie-averaged ranks)."""
    if len(pred) < 3:
        raise ValueError("SRCC needs at least 3 pairs")
    return pearson(rankdata(pred), rankdata(mos))


def f_cdf(x: float, d1: float, d2: float) -> float:
    """CDF of the F distribution through the regularized incomplete beta function."""
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return float(betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2)))


@dataclass(frozen=True)
class FTestResult:
    verdict: str
    F: float
    p_value: float


def f_test(residuals_a, residuals_b, confidence: float = 0.95) -> FTestResult:
    """Two-sided variance-ratio test between two models' prediction residuals.

    ``F = var(a) / var(b)`` with sample variances; the lower-variance model wins when
    the ratio is significant at ``confidence``.
    """
    a = np.asarray(residuals_a, dtype=np.float64)
    b = np.asarray(residuals_b, dtype=np.float64)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("each residual set needs at least 3 entries")
    va, vb = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    if va == 0 and vb == 0:
        return FTestResult(INDISTINGUISHABLE, 1.0, 1.0)
    F = math.inf if vb == 0 else va / vb
    cdf = f_cdf(F, len(a) - 1, len(b) - 1)
    p = min(1.0, 2.0 * min(cdf, 1.0 - cdf))
    if p >= 1.0 - confidence:
        verdict = INDISTINGUISHABLE
    else:
        verdict = A_BETTER if F < 1 else B_BETTER
    return FTestResult(verdict, F, p)


# Manifest and reports -------------------------------------------------------


@dataclass(frozen=True)
class ManifestRecord:
    ref_path: Path
    dist_path: Path
    mos: float
    distortion_type: str | None = None
    scanpath_path: Path | None = None


def load_manifest(path) -> list[ManifestRecord]:
    """Read ``ref_path,dist_path,mos[,distortion_type][,scanpath_path]``; relative paths resolve against the manifest."""
    path = Path(path)
    base = path.parent
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for required in ("ref_path", "dist_path", "mos"):
            if required not in fields:
                raise ManifestFormatError(f"{path}: missing column {required!r}")
        for row_no, row in enumerate(reader, start=2):
            try:
                mos = float(row["mos"])
            except (TypeError, ValueError):
                raise ManifestFormatError(f"{path}, row {row_no}: bad mos {row.get('mos')!r}") from None
            if not math.isfinite(mos):
                raise ManifestFormatError(f"{path}, row {row_no}: non-finite mos")
            dtype = (row.get("distortion_type") or "").strip() or None
            sp = (row.get("scanpath_path") or "").strip()
            records.append(ManifestRecord(
                base / row["ref_path"].strip(), base / row["dist_path"].strip(), mos, dtype,
                base / sp if sp else None,
            ))
    if not records:
        raise ManifestFormatError(f"{path}: no records")
    return records


@dataclass
class EvaluationRow:
    metric: str
    type: str
    plcc: float | None
    srcc: float | None
    n: int
    note: str = ""


@dataclass
class EvaluationReport:
    metric: str
    rows: list[EvaluationRow]
    predictions: np.ndarray
    mos: np.ndarray
    params: LogisticParams | None = None
    residuals: np.ndarray | None = None
    failures: list[tuple[str, str]] = field(default_factory=list)
    records: list[ManifestRecord] = field(default_factory=list)

    @property
    def overall(self) -> EvaluationRow:
        return self.rows[0]

    @property
    def degenerate(self) -> bool:
        return self.overall.plcc is None and self.overall.srcc is None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "type", "plcc", "srcc", "n"])
        for r in self.rows:
            writer.writerow([r.metric, r.type, _fmt(r.plcc), _fmt(r.srcc), r.n])
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"{'metric':<10} {'type':<14} {'PLCC':>8} {'SRCC':>8} {'n':>5}"]
        for r in self.rows:
            lines.append(f"{r.metric:<10} {r.type:<14} {_fmt(r.plcc, 4):>8} {_fmt(r.srcc, 4):>8} {r.n:>5}")
            if r.note:
                lines.append(f"  note: {r.note}")
        for name, err in self.failures:
            lines.append(f"  failed: {name}: {err}")
        return "\n".join(lines)


def _fmt(x, digits=None):
    if x is None:
        return "nan"
    return repr(x) if digits is None else f"{x:.{digits}f}"


def _correlations(metric: str, label: str, pred: np.ndarray, mos: np.ndarray, params) -> EvaluationRow:
    n = len(pred)
    if n < 2 or np.ptp(pred) == 0 or np.ptp(mos) == 0:
        why = "fewer than 2 samples" if n < 2 else "zero-variance predictions or MOS; correlation undefined"
        return EvaluationRow(metric, label, None, None, n, why)
    if params is None:
        # too few samples for the logistic mapping: plain correlations
        return EvaluationRow(metric, label, pearson(pred, mos), pearson(rankdata(pred), rankdata(mos)), n,
                             "fewer than 5 samples; PLCC computed without logistic mapping")
    return EvaluationRow(metric, label, _mapped_pearson(params, pred, mos), pearson(rankdata(pred), rankdata(mos)), n)


def evaluate_predictions(pred, mos, types: Sequence[str | None] | None = None, metric: str = "model",
                         per_type: bool = True) -> EvaluationReport:
    """Overall (and per distortion type) PLCC/SRCC of predictions against MOS.

    The logistic mapping is fitted once on all samples; its residuals are kept for
    significance testing. With fewer than 5 samples PLCC falls back to the raw Pearson
    correlation, and zero-variance predictions yield a flagged row rather than NaN.
    """
    pred = np.asarray(pred, dtype=np.float64)
    mos = np.asarray(mos, dtype=np.float64)
    params = residuals = None
    if len(pred) >= 5 and np.ptp(pred) > 0:
        params = fit_logistic(pred, mos)
        residuals = mos - params(pred)
    rows = [_correlations(metric, "overall", pred, mos, params)]
    if per_type and types is not None:
        labels = sorted({t for t in types if t})
        for label in labels:
            mask = np.array([t == label for t in types])
            rows.append(_correlations(metric, label, pred[mask], mos[mask], params))
    return EvaluationReport(metric, rows, pred, mos, params, residuals)


def run_benchmark(manifest, config=None, per_type: bool = True,
                  predictor: Callable | None = None) -> EvaluationReport:
    """Score every manifest record with the omnidirectional pipeline and correlate with MOS.

    ``manifest`` is a path or a list of :class:`ManifestRecord`. Record-level failures
    (unreadable images, size mismatches) are collected and reported; the remaining
    records are still evaluated. ``predictor(record, config) -> float`` overrides the
    per-record scoring, mainly for testing.
    """
    from .pipeline import RunConfig, score_record

    records = load_manifest(manifest) if isinstance(manifest, (str, Path)) else list(manifest)
    config = config if config is not None else RunConfig()
    predictor = predictor if predictor is not None else score_record
    ok, preds, failures = [], [], []
    for rec in records:
        try:
            preds.append(float(predictor(rec, config)))
            ok.append(rec)
        except (OSError, ValueError) as exc:
            log.warning("record %s failed: %s", rec.dist_path, exc)
            failures.append((str(rec.dist_path), str(exc)))
    if not ok:
        report = EvaluationReport(config.metric, [EvaluationRow(config.metric, "overall", None, None, 0,
                                                                "all records failed")],
                                  np.array([]), np.array([]))
    else:
        report = evaluate_predictions(preds, [r.mos for r in ok], [r.distortion_type for r in ok],
                                      metric=config.metric, per_type=per_type)
    report.failures = failures
    report.records = ok
    return report
