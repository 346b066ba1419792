"""Threshold bisection, parameter sweeps and the assembled relaxed area."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ConvexProfile
from .outer_optimizer import OptimizerConfig, SolveReport, minimize_over_profiles

log = logging.getLogger(__name__)

CSV_COLUMNS = ("l", "value", "degenerate", "gap_to_pi", "n1", "n2", "seconds")


class BracketError(ValueError):
    pass


class SweepError(RuntimeError):
    """Raised when a sweep point fails; ``records`` holds the finished points."""

    def __init__(self, message: str, records: list["SweepRecord"]):
        super().__init__(message)
        self.records = records


@dataclass
class SweepRecord:
    l: float
    value: float
    degenerate: bool
    gap_to_pi: float
    n1: int
    n2: int
    seconds: float
    profile: ConvexProfile | None = field(default=None, repr=False)

    @classmethod
    def from_report(cls, report: SolveReport, seconds: float) -> "SweepRecord":
        return cls(
            l=report.l,
            value=report.value,
            degenerate=report.degenerate,
            gap_to_pi=math.pi - report.nondegenerate_value,
            n1=report.n1,
            n2=report.n2,
            seconds=seconds,
            profile=None if report.degenerate else report.best_profile,
        )

    def row(self) -> list:
        return [
            repr(float(self.l)),
            repr(float(self.value)),
            int(self.degenerate),
            repr(float(self.gap_to_pi)),
            self.n1,
            self.n2,
            f"{self.seconds:.3f}",
        ]


def _timed_solve(l, n1, n2, cfg, initial):
    t0 = time.perf_counter()
    report = minimize_over_profiles(l, n1, n2, cfg, initial=initial)
    return report, time.perf_counter() - t0


def sweep(
    l_min: float,
    l_max: float,
    steps: int,
    cfg: OptimizerConfig | None = None,
    n1: int = 64,
    n2: int = 64,
    out=None,
    timing: bool = True,
) -> list[SweepRecord]:
    """Solve at ``steps`` equally spaced ``l``, each warm-started from the last connected optimum.

    Rows are appended to ``out`` (CSV) as they finish.  With ``timing=False``
    the seconds column is written as zero so that reruns are byte-identical.
    """
    if not 0 < l_min <= l_max:
        raise ValueError("need 0 < l_min <= l_max")
    if steps < 1:
        raise ValueError("steps must be positive")
    if steps > 1 and l_min == l_max:
        raise ValueError("several steps need l_min < l_max")
    cfg = cfg or OptimizerConfig()
    ls = np.linspace(l_min, l_max, steps) if steps > 1 else np.array([l_min])
    records: list[SweepRecord] = []
    fh = writer = None
    if out is not None:
        fh = open(Path(out), "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        fh.flush()
    warm: ConvexProfile | None = None
    try:
        for l in ls:
            try:
                report, secs = _timed_solve(float(l), n1, n2, cfg, warm)
            except Exception as exc:
                raise SweepError(f"sweep failed at l={l:g}: {exc}", records) from exc
            rec = SweepRecord.from_report(report, secs if timing else 0.0)
            records.append(rec)
            if not report.degenerate:
                warm = report.best_profile
            log.info("sweep l=%.6g value=%.10f degenerate=%s", l, rec.value, rec.degenerate)
            if writer is not None:
                writer.writerow(rec.row())
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


@dataclass
class ThresholdResult:
    lo: float
    hi: float
    evaluations: list[SweepRecord]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def above_half(self) -> bool:
        return self.lo > 0.5

    def to_json(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "midpoint": self.midpoint,
            "width": self.width,
            "evaluations": [
                {"l": r.l, "value": r.value, "degenerate": r.degenerate, "gap_to_pi": r.gap_to_pi}
                for r in self.evaluations
            ],
        }


def threshold_bisect(
    l_lo: float = 0.5,
    l_hi: float = 4.0,
    tol: float = 0.02,
    cfg: OptimizerConfig | None = None,
    n1: int = 64,
    n2: int = 64,
) -> ThresholdResult:
    """Bracket the switch of the degenerate flag to width ``tol``.

    The flag, not the raw value, decides each step.  The connected optimum at
    the current lower end warm-starts the next solve.
    """
    if not 0 < l_lo < l_hi:
        raise BracketError("need 0 < l_lo < l_hi")
    cfg = cfg or OptimizerConfig()
    evals: list[SweepRecord] = []

    def flag(l, warm):
        report, secs = _timed_solve(l, n1, n2, cfg, warm)
        evals.append(SweepRecord.from_report(report, secs))
        log.info("bisect l=%.6f degenerate=%s gap %.3e", l, report.degenerate, math.pi - report.nondegenerate_value)
        return report

    lo_report = flag(l_lo, None)
    if lo_report.degenerate:
        raise BracketError(f"lower end l={l_lo} is degenerate")
    if not flag(l_hi, lo_report.best_profile).degenerate:
        raise BracketError(f"upper end l={l_hi} is not degenerate")
    lo, hi, warm = l_lo, l_hi, lo_report.best_profile
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        rep = flag(mid, warm)
        if rep.degenerate:
            hi = mid
        else:
            lo, warm = mid, rep.best_profile
    result = ThresholdResult(lo, hi, evals)
    if not result.above_half:
        log.warning("threshold bracket [%g, %g] reaches below 1/2", lo, hi)
    return result


def ac_part(l: float) -> float:
    """Area of the smooth part: graph of ``x/|x|`` over the disc of radius ``l``."""
    return math.pi * (l * math.sqrt(1.0 + l * l) + math.asinh(l))


@dataclass
class VortexArea:
    l: float
    ac_part: float
    singular_part: float
    total: float
    degenerate: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def vortex_relaxed_area(
    l: float, cfg: OptimizerConfig | None = None, n1: int = 64, n2: int = 64
) -> VortexArea:
    if l <= 0:
        raise ValueError("l must be positive")
    report = minimize_over_profiles(l, n1, n2, cfg)
    ac = ac_part(l)
    return VortexArea(l, ac, report.value, ac + report.value, report.degenerate)
