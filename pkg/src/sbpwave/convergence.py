"""Error norms, observed rates and grid-refinement studies.

A study runs one configuration on successively halved grids (``N -> 2N - 1``),
measures the L2 and max errors at the final time and reports pairwise rates
next to the rate predicted by the boundary-system analysis.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import discretization as disc
from .errors import ConfigError, LengthMismatch, NonPositiveError, SbpWaveError, UnsupportedPair
from .normal_mode import analysis_threshold, predict_rate
from .timeloop import TimeGrid, simulate


def l2_error(numeric, exact, h: float, d: int = 1) -> float:
    """``sqrt(h**d * sum((numeric - exact)**2))``."""
    a, b = np.asarray(numeric, float).ravel(), np.asarray(exact, float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths differ: {a.size} vs {b.size}")
    e = a - b
    return float(np.sqrt(h**d * (e @ e)))


def max_error(numeric, exact) -> float:
    a, b = np.asarray(numeric, float).ravel(), np.asarray(exact, float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths differ: {a.size} vs {b.size}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def rate(e_coarse: float, e_fine: float) -> float:
    """Observed order between two grids whose spacing differs by a factor 2."""
    if not (e_coarse > 0 and e_fine > 0):
        raise NonPositiveError(f"errors must be positive, got {e_coarse}, {e_fine}")
    return math.log(e_coarse / e_fine) / math.log(2.0)


def system_errors(system: disc.SemiDiscreteSystem, u: np.ndarray, t: float):
    """L2 and max error of ``u`` against the system's manufactured solution.

    Interface blocks contribute ``h_block * sum(e**2)`` each, so the shared
    interface point is counted once per side.
    """
    exact = system.sample(system.solution.u, t)
    if system.dim == 2:
        return l2_error(u, exact, math.sqrt(system.blocks[0].h * system.hy), 2), max_error(u, exact)
    sq = 0.0
    for b in system.blocks:
        sq += l2_error(u[b.slice], exact[b.slice], b.h) ** 2
    return math.sqrt(sq), max_error(u, exact)


@dataclass(frozen=True)
class StudyConfig:
    kind: disc.ProblemKind
    order: int
    tau_mult: float = 1.2
    levels: tuple = (51, 101, 201, 401, 801)
    courant: float = 0.1
    tf: float = 2.0
    #: Courant number overrides for individual levels
    level_courant: tuple = ()
    perturbation: float = 0.0
    ratio: int = 2
    outer_tau_mult: float = 1.2
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", disc.ProblemKind.parse(self.kind))
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        object.__setattr__(self, "level_courant", tuple(tuple(x) for x in self.level_courant))

    def courant_for(self, n: int) -> float:
        return dict(self.level_courant).get(n, self.courant)

    def problem(self, n: int) -> disc.ProblemSpec:
        return disc.ProblemSpec(
            kind=self.kind,
            order=self.order,
            n=n,
            tau_mult=self.tau_mult,
            outer_tau_mult=self.outer_tau_mult,
            ratio=self.ratio,
            tf=self.tf,
            courant=self.courant_for(n),
            perturbation=self.perturbation,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["levels"] = list(self.levels)
        d["level_courant"] = [list(x) for x in self.level_courant]
        return d


@dataclass
class LevelResult:
    N: int
    h: float
    l2_error: float = float("nan")
    max_error: float = float("nan")
    ok: bool = True
    message: str = ""


@dataclass
class ConvergenceReport:
    config: StudyConfig
    levels: list
    predicted: Optional[float] = None
    prediction_note: str = ""

    @property
    def rates_l2(self) -> list:
        return _pairwise([lv.l2_error if lv.ok else float("nan") for lv in self.levels])

    @property
    def rates_max(self) -> list:
        return _pairwise([lv.max_error if lv.ok else float("nan") for lv in self.levels])

    @property
    def finest_rate(self) -> float:
        return self.rates_l2[-1] if self.rates_l2 else float("nan")

    def level(self, n: int) -> LevelResult:
        for lv in self.levels:
            if lv.N == n:
                return lv
        raise KeyError(n)

    def rows(self):
        ql2 = [None] + self.rates_l2
        qmax = [None] + self.rates_max
        for lv, a, b in zip(self.levels, ql2, qmax):
            yield lv, a, b

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["N", "h", "l2_error", "max_error", "q_l2", "q_max"])
        for lv, a, b in self.rows():
            w.writerow([lv.N, _g(lv.h), _g(lv.l2_error), _g(lv.max_error), _g(a), _g(b)])
        return out.getvalue()

    def to_markdown(self) -> str:
        title = self.config.label or f"{self.config.kind.value} order {self.config.order}"
        lines = [
            f"**{title}** (tau = {self.config.tau_mult:g} x threshold, predicted rate {_fmt_pred(self.predicted)})",
            "",
            "| N | L2 error | q_L2 / q_max |",
            "|---:|---:|:---:|",
        ]
        for lv, a, b in self.rows():
            err = f"{lv.l2_error:.2e}" if lv.ok else f"failed: {lv.message}"
            q = "" if a is None else f"{a:.2f}/{b:.2f}"
            lines.append(f"| {lv.N} | {err} | {q} |")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "predicted_rate": self.predicted,
            "prediction_note": self.prediction_note,
            "levels": [
                {**asdict(lv), "l2_error": _j(lv.l2_error), "max_error": _j(lv.max_error)} for lv in self.levels
            ],
            "rates_l2": [_j(q) for q in self.rates_l2],
            "rates_max": [_j(q) for q in self.rates_max],
        }


def _j(x):
    return None if x is None or not np.isfinite(x) else float(f"{x:.17g}")


def _g(x):
    return "" if x is None or not np.isfinite(x) else f"{x:.17g}"


def _fmt_pred(p):
    return "n/a" if p is None else f"{p:g}"


def _pairwise(errors):
    out = []
    for a, b in zip(errors, errors[1:]):
        try:
            out.append(rate(a, b))
        except (NonPositiveError, ValueError):
            out.append(float("nan"))
    return out


def run_level(config: StudyConfig, n: int) -> LevelResult:
    """Solve one refinement level and measure its errors."""
    spec = config.problem(n)
    try:
        system = disc.assemble(spec)
        h = system.blocks[0].h
        grid = TimeGrid(0.0, config.tf, spec.courant * system.h_min)
        result = simulate(system, grid)
        l2, mx = system_errors(system, result.final.u, config.tf)
        return LevelResult(n, h, l2, mx)
    except SbpWaveError as exc:
        return LevelResult(n, float("nan"), ok=False, message=f"{exc.code}: {exc}")


def _check_levels(levels: Sequence[int]):
    if not levels:
        raise ConfigError("a study needs at least one level")
    for a, b in zip(levels, levels[1:]):
        if b - 1 != 2 * (a - 1):
            raise ConfigError(f"levels must halve h: {a} -> {b} is not N -> 2N-1")


def max_workers(requested: Optional[int] = None) -> int:
    env = os.environ.get("SBPWAVE_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigError(f"SBPWAVE_THREADS must be an integer, got {env!r}") from None
    return max(1, min(cap, requested or cap))


def predicted_rate(config: StudyConfig):
    """Rate from the boundary-system analysis, or ``None`` when no system applies."""
    kind = config.kind
    try:
        if kind is disc.ProblemKind.Neumann1D:
            damping = 1.0 if config.perturbation else 0.0
            return predict_rate("neumann", config.order, damping=damping).overall, ""
        if kind is disc.ProblemKind.Interface1D:
            r = float(config.ratio)
            tau = config.tau_mult * analysis_threshold("interface", config.order, r)
            return predict_rate("interface", config.order, tau, r).overall, ""
        tau = config.tau_mult * analysis_threshold("dirichlet", config.order)
        note = "2D rate from the 1D system in s+" if kind is disc.ProblemKind.Dirichlet2DPeriodicY else ""
        return predict_rate("dirichlet", config.order, tau).overall, note
    except UnsupportedPair as exc:
        return None, str(exc)


def run_study(config: StudyConfig, workers: Optional[int] = None) -> ConvergenceReport:
    """Run all levels, concurrently when more than one worker is allowed."""
    _check_levels(config.levels)
    nw = min(max_workers(workers), len(config.levels))
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(run_level, [config] * len(config.levels), config.levels))
    else:
        results = [run_level(config, n) for n in config.levels]
    results.sort(key=lambda lv: lv.N)
    pred, note = predicted_rate(config)
    return ConvergenceReport(config, results, pred, note)


# --------------------------------------------------------------------------
# presets for the reference refinement tables

_T3 = (51, 101, 201, 401, 801)
_T5 = (26, 51, 101, 201, 401)
_T6 = (26, 51, 101, 201)
_T6_EXTENDED = _T6 + (401,)


def _table3(mult):
    out = []
    for order in (2, 4, 6):
        lc = ((401, 0.05), (801, 0.05)) if (order == 6 and mult == 3) else ()
        out.append(
            StudyConfig("dirichlet", order, mult, _T3, level_courant=lc, label=f"Dirichlet order {order}, tau={mult:g}tau_2p")
        )
    return out


def _table4():
    out = []
    for order in (4, 6):
        # the sixth-order column needs dt = 0.05h; at 0.1h the time error shows at N >= 401
        courant = 0.05 if order == 6 else 0.1
        out.append(StudyConfig("neumann", order, 1.0, _T3, courant=courant, label=f"Neumann order {order}"))
        out.append(
            StudyConfig(
                "neumann",
                order,
                1.0,
                _T3,
                courant=courant,
                perturbation=disc.reference_damping(order),
                label=f"Neumann order {order}, perturbed",
            )
        )
    return out


def _table5(mult):
    return [
        StudyConfig("interface", order, mult, _T5, label=f"Interface order {order}, tau={mult:g}tau~")
        for order in (2, 4, 6)
    ]


def _table6(mult, extended=False):
    levels = _T6_EXTENDED if extended else _T6
    return [
        StudyConfig("dirichlet2d", order, mult, levels, label=f"2D order {order}, tau={mult:g}tau_2p")
        for order in (2, 4, 6)
    ]


PRESETS = {
    "table3-top": lambda: _table3(1.0),
    "table3-mid": lambda: _table3(1.2),
    "table3-bottom": lambda: _table3(3.0),
    "table4": _table4,
    "table5-top": lambda: _table5(1.0),
    "table5-mid": lambda: _table5(1.2),
    "table5-bottom": lambda: _table5(3.0),
    "table6-top": lambda: _table6(1.0),
    "table6-bottom": lambda: _table6(1.2),
    "table6-top-extended": lambda: _table6(1.0, True),
    "table6-bottom-extended": lambda: _table6(1.2, True),
}


def preset(name: str) -> list:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}") from None


def run_preset(name: str, workers: Optional[int] = None) -> list:
    return [run_study(cfg, workers) for cfg in preset(name)]


def reports_to_csv(reports) -> str:
    """Concatenate several reports, each prefixed by a ``# label`` line."""
    parts = []
    for rep in reports:
        parts.append(f"# {rep.config.label}\n" + rep.to_csv())
    return "".join(parts)
