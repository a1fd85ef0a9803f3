"""Parameter sweeps over the lower-bound construction and power-law fits of the results."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import linregress
from tqdm import tqdm

from constructions import build_full, predicted_final_bad_edges
from dynamics import UncertaintyRule, price_of_uncertainty, run_schedule
from utils.errors import ConsensusError, DegenerateFit
from utils.utils import format_fraction

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "eps", "rule", "initial_bad", "final_bad", "pou", "moves", "ms", "predicted_final", "error"]
PHASES = ("phase1", "phase2", "all")


@dataclass
class ExperimentRow:
    n: int
    eps: Fraction
    rule: str
    initial_bad: int
    final_bad: int
    pou: Fraction
    moves: int
    ms: float
    predicted_final: int = None
    error: str = None

    @property
    def ok(self):
        return self.error is None

    def as_list(self):
        pou = "" if self.pou is None else float(self.pou)
        return [self.n, format_fraction(self.eps), self.rule, self.initial_bad, self.final_bad, pou,
                self.moves, round(self.ms, 3), self.predicted_final, self.error or ""]

    @classmethod
    def failed(cls, n, eps, rule, error):
        return cls(n, Fraction(eps), rule, None, None, None, 0, 0.0, None, str(error))


@dataclass(frozen=True)
class FitResult:
    exponent: float
    r_squared: float
    intercept: float
    points: int


def phase_schedule(plan, phase="all"):
    if phase == "phase1":
        return list(plan.phase1)
    if phase == "phase2":
        return list(plan.phase2)
    if phase == "all":
        return list(plan.phase1) + list(plan.phase2)
    raise ValueError("unknown phase {!r}, expected one of {}".format(phase, PHASES))


def row_from_trace(n, rule, trace, ms, predicted=None):
    pou = price_of_uncertainty(trace) if trace.initial_bad else None
    return ExperimentRow(n, rule.eps, rule.variant.value, trace.initial_bad, trace.final_bad, pou,
                         trace.moves, ms, predicted)


def run_pair(n, eps, rule="two-sided", phase="all"):
    """
    Build the construction for (n, eps), play its schedule and summarize.
    Failures come back as rows with an error note.
    """
    rule = UncertaintyRule.from_args(eps, rule)
    try:
        game, plan = build_full(n, rule.eps)
        started = time.perf_counter()
        trace = run_schedule(game, rule, phase_schedule(plan, phase))
        ms = (time.perf_counter() - started) * 1000
    except ConsensusError as error:
        logger.warning("pair n=%d, eps=%s failed: %s", n, rule.eps, error)
        return ExperimentRow.failed(n, rule.eps, rule.variant.value, error)
    return row_from_trace(n, rule, trace, ms, predicted_final_bad_edges(plan))


def run_sweep(ns, epss, rule="two-sided", workers=1, phase="all"):
    """
    :param ns: Vertex budgets.
    :param epss: Uncertainty parameters.
    :param workers: joblib processes.
    :return rows: One ExperimentRow per (n, eps) pair, in input order.
    """
    pairs = [(n, eps) for eps in epss for n in ns]
    rows = Parallel(n_jobs=workers)(delayed(run_pair)(n, eps, rule, phase) for n, eps in tqdm(pairs, desc="sweep"))
    logger.info("sweep finished: %d pairs, %d failed", len(rows), sum(not row.ok for row in rows))
    return rows


def rows_to_frame(rows):
    return pd.DataFrame([row.as_list() for row in rows], columns=CSV_COLUMNS)


def write_rows(rows, path):
    rows_to_frame(rows).to_csv(path, index=None)


def fit_power_law(points):
    """
    Least squares line through (log x, log y).
    :param points: Iterable of (x, y) with positive coordinates.
    :return fit: FitResult.
    """
    points = [(float(x), float(y)) for x, y in points]
    if any(x <= 0 or y <= 0 for x, y in points):
        raise DegenerateFit("power-law fit needs positive coordinates")
    if len({x for x, _ in points}) < 2:
        raise DegenerateFit("power-law fit needs at least two distinct x values, got {}".format(len(points)))
    logx = np.log([x for x, _ in points])
    logy = np.log([y for _, y in points])
    if np.allclose(logy, logy[0]):
        return FitResult(0.0, 1.0, float(logy[0]), len(points))
    result = linregress(logx, logy)
    r_squared = min(1.0, max(0.0, float(result.rvalue) ** 2))
    return FitResult(float(result.slope), r_squared, float(result.intercept), len(points))


def fit_sweep(rows):
    """
    Fit pou against n for each eps and against eps for each n.
    :return fits: {"n": {eps: FitResult or None}, "eps": {n: FitResult or None}}; None marks an undefined fit.
    """
    good = [row for row in rows if row.ok and row.pou]
    fits = {"n": {}, "eps": {}}
    for key, group, other in (("n", "eps", "n"), ("eps", "n", "eps")):
        for value in sorted({getattr(row, group) for row in good}):
            points = [(getattr(row, other), row.pou) for row in good if getattr(row, group) == value]
            try:
                fits[key][value] = fit_power_law(points)
            except DegenerateFit as error:
                logger.info("fit of pou vs %s at %s=%s undefined: %s", key, group, value, error)
                fits[key][value] = None
    return fits


def describe_fit(fit):
    if fit is None:
        return "undefined"
    return "exponent {:.3f}, r^2 {:.4f}".format(fit.exponent, fit.r_squared)


def within_factor(row, factor=4):
    """final_bad within the given factor of the predicted final count."""
    if not row.ok or not row.predicted_final:
        return False
    return row.predicted_final / factor <= row.final_bad <= row.predicted_final * factor
