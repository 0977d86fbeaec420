"""
Comparison schemes and angle-pair sweeps.

* ``MD``: beams steered exactly at the users, unit gains.
* ``CM``: beam angles optimized, gains pinned to 1 (constant modulus).
* ``NCM``: beam angles and per-element gains optimized jointly.

CM is seeded with the MD point and NCM with both the MD and CM solutions,
so per angle pair the reported SI level obeys NCM <= CM <= MD.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import pso
from .channel import SiChannel, extract_subarray, slice_band
from .geometry import TWO_PI, ArrayLayout, SteeringAngles
from .objective import ConstraintConfig, SiEvaluation, SiProblem, DEFAULT_FLOOR_DB

log = logging.getLogger(__name__)

ANGLE_NAMES = ("psi_d", "psi_u", "theta_d", "theta_u")
CSV_COLUMNS = [
    "psi_d_deg",
    "psi_u_deg",
    "theta_d_deg",
    "theta_u_deg",
    "scheme",
    "si_level_db",
    "tx_degradation",
    "rx_degradation",
    "iterations_used",
]


class SchemeKind(str, enum.Enum):
    MD = "MD"
    CM = "CM"
    NCM = "NCM"

    @classmethod
    def parse(cls, text: str) -> "SchemeKind":
        t = text.strip().upper()
        for suffix in ("-BF-SIS",):
            t = t.removesuffix(suffix)
        return cls(t)


ALL_SCHEMES = (SchemeKind.MD, SchemeKind.CM, SchemeKind.NCM)


@dataclass(frozen=True)
class SchemeContext:
    """Sub-array channel restricted to the band, plus solver settings."""

    tx_layout: ArrayLayout
    rx_layout: ArrayLayout
    band_tensor: np.ndarray = field(repr=False)
    constraints: ConstraintConfig = ConstraintConfig()
    pso: pso.PsoConfig = pso.PsoConfig()
    floor_db: float = DEFAULT_FLOOR_DB

    @classmethod
    def from_channel(
        cls,
        ch: SiChannel,
        tx_sub: ArrayLayout | None = None,
        rx_sub: ArrayLayout | None = None,
        *,
        tx_block=0,
        rx_block=0,
        center_hz: float = 3.5e9,
        bandwidth_hz: float = 20e6,
        **kw,
    ) -> "SchemeContext":
        """Cut the Tx/Rx tiles out of a full-array channel and slice the band."""
        tx_sub = tx_sub or ch.tx_layout
        rx_sub = rx_sub or ch.rx_layout
        sub = extract_subarray(ch, tx_block, rx_block, tx_sub, rx_sub)
        band = slice_band(sub, center_hz, bandwidth_hz)
        return cls(tx_sub, rx_sub, sub.band_tensor(band), **kw)

    def problem(self, nominal_tx: SteeringAngles, nominal_rx: SteeringAngles) -> SiProblem:
        return SiProblem(
            self.tx_layout,
            self.rx_layout,
            self.band_tensor,
            nominal_tx,
            nominal_rx,
            self.constraints,
            self.floor_db,
        )


def scheme_bounds(kind: SchemeKind, problem: SiProblem) -> pso.Bounds:
    """Angles in [0, 2 pi]; gains in [0, 1] for NCM and pinned to 1 otherwise."""
    n_gain = problem.tx_layout.m + problem.rx_layout.m
    lower = np.concatenate([np.zeros(4), np.zeros(n_gain) if kind is SchemeKind.NCM else np.ones(n_gain)])
    upper = np.concatenate([np.full(4, TWO_PI), np.ones(n_gain)])
    return pso.Bounds(lower, upper)


@dataclass
class SchemeSolution:
    kind: SchemeKind
    x: np.ndarray
    evaluation: SiEvaluation
    iterations_used: int = 0
    pso_best_fitness: float | None = None
    trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def si_level_db(self) -> float:
        return self.evaluation.si_level_db


class _FeasibleTracker:
    """Batch fitness that also remembers the lowest-power feasible point seen."""

    def __init__(self, problem: SiProblem):
        self.problem = problem
        self.best_x = None
        self.best_power = np.inf

    def __call__(self, X):
        p = self.problem
        power, tx_deg, rx_deg = p.evaluate_batch(X)
        hinge = np.maximum(0.0, tx_deg - p.eps_tx) + np.maximum(0.0, rx_deg - p.eps_rx)
        feasible = hinge == 0.0
        if feasible.any():
            cand = np.where(feasible, power, np.inf)
            i = int(np.argmin(cand))
            if cand[i] < self.best_power:
                self.best_power = cand[i]
                self.best_x = np.array(X[i])
        return power + p.constraints.penalty_weight * hinge


def _select(problem: SiProblem, candidates: Sequence[np.ndarray]) -> tuple[np.ndarray, SiEvaluation]:
    """Feasible candidate with the lowest fitness, else the lowest-fitness one."""
    evals = [problem.evaluate(c) for c in candidates]
    order = sorted(
        range(len(candidates)),
        key=lambda i: (not problem.is_feasible(evals[i]), evals[i].fitness, i),
    )
    i = order[0]
    return np.asarray(candidates[i], dtype=float), evals[i]


def solve_scheme(
    kind: SchemeKind | str,
    nominal_tx: SteeringAngles,
    nominal_rx: SteeringAngles,
    ctx: SchemeContext,
    *,
    seeds: Iterable[np.ndarray] = (),
    rng_seed: int | None = None,
) -> SchemeSolution:
    """Solve one scheme for one pair of nominal user directions.

    ``seeds`` are extra points (e.g. the CM solution for NCM) placed in the
    initial swarm after the MD point.
    """
    kind = SchemeKind.parse(kind) if isinstance(kind, str) else kind
    problem = ctx.problem(nominal_tx, nominal_rx)
    x_md = problem.nominal_vector()
    if kind is SchemeKind.MD:
        return SchemeSolution(kind, x_md, problem.evaluate(x_md))

    bounds = scheme_bounds(kind, problem)
    start = [x_md] + [np.asarray(s, dtype=float) for s in seeds]
    start = [s for s in start if bounds.contains(s)]
    cfg = ctx.pso if rng_seed is None else replace(ctx.pso, rng_seed=int(rng_seed))
    tracker = _FeasibleTracker(problem)
    res = pso.run(cfg, bounds, tracker, baseline=start if cfg.seed_with_baseline else None, batch=True)

    candidates = [res.best] + ([tracker.best_x] if tracker.best_x is not None else [])
    if cfg.seed_with_baseline:
        candidates += start
    x, ev = _select(problem, candidates)
    return SchemeSolution(kind, x, ev, cfg.iterations, res.best_fitness, res.fitness_trace)


def solve_all(
    nominal_tx: SteeringAngles,
    nominal_rx: SteeringAngles,
    ctx: SchemeContext,
    schemes: Sequence[SchemeKind] = ALL_SCHEMES,
    rng_seed: int | None = None,
) -> dict[SchemeKind, SchemeSolution]:
    """Solve the requested schemes in MD, CM, NCM order, chaining seeds."""
    out: dict[SchemeKind, SchemeSolution] = {}
    for kind in ALL_SCHEMES:
        if kind not in schemes:
            continue
        seeds = [out[SchemeKind.CM].x] if kind is SchemeKind.NCM and SchemeKind.CM in out else []
        out[kind] = solve_scheme(kind, nominal_tx, nominal_rx, ctx, seeds=seeds, rng_seed=rng_seed)
    return out


# -- grids --------------------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``"start:step:stop"`` (inclusive) or a single value, in degrees.

    >>> parse_range("0:30:180")
    array([  0.,  30.,  60.,  90., 120., 150., 180.])
    """
    parts = [float(p) for p in str(text).split(":")]
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3:
        raise ValueError(f"range must be start:step:stop, got {text!r}")
    start, step, stop = parts
    if step <= 0:
        raise ValueError("range step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError(f"empty range {text!r}")
    return start + step * np.arange(n)


@dataclass(frozen=True)
class SweepGrid:
    """Two varying angles (degrees) and fixed values for the other two."""

    axis1: str
    values1: tuple[float, ...]
    axis2: str
    values2: tuple[float, ...]
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values1", tuple(float(v) for v in self.values1))
        object.__setattr__(self, "values2", tuple(float(v) for v in self.values2))
        if self.axis1 == self.axis2:
            raise ValueError("sweep axes must differ")
        names = {self.axis1, self.axis2} | set(self.fixed)
        if not {self.axis1, self.axis2} <= set(ANGLE_NAMES) or names != set(ANGLE_NAMES):
            raise ValueError(f"grid must vary two of {ANGLE_NAMES} and fix the other two")
        for v in self.values1 + self.values2 + tuple(self.fixed.values()):
            if not 0.0 <= v <= 360.0:
                raise ValueError(f"angle {v} outside [0, 360] degrees")
        if not self.values1 or not self.values2:
            raise ValueError("sweep axes must be non-empty")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.values1), len(self.values2)

    def cells(self) -> list[dict[str, float]]:
        out = []
        for a in self.values1:
            for b in self.values2:
                cell = {k: float(v) for k, v in self.fixed.items()}
                cell[self.axis1] = a
                cell[self.axis2] = b
                out.append({k: cell[k] for k in ANGLE_NAMES})
        return out

    @classmethod
    def figure(cls, name: str) -> "SweepGrid":
        """Preset grids: ``"azimuth"`` (psi_D x psi_U), ``"elevation"``
        (theta_D x theta_U) and ``"downlink"`` (psi_D x theta_D)."""
        az = tuple(parse_range("0:30:180"))
        el = tuple(parse_range("0:30:90"))
        presets = {
            "azimuth": cls("psi_d", az, "psi_u", az, {"theta_d": 90.0, "theta_u": 90.0}),
            "elevation": cls("theta_d", el, "theta_u", el, {"psi_d": 90.0, "psi_u": 90.0}),
            "downlink": cls("psi_d", az, "theta_d", el, {"theta_u": 90.0, "psi_u": 90.0}),
        }
        return presets[name]


def cell_angles(cell: dict[str, float]) -> tuple[SteeringAngles, SteeringAngles]:
    tx = SteeringAngles.from_degrees(cell["theta_d"], cell["psi_d"])
    rx = SteeringAngles.from_degrees(cell["theta_u"], cell["psi_u"])
    return tx, rx


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    angles: dict
    scheme: SchemeKind
    si_level_db: float
    tx_degradation: float
    rx_degradation: float
    iterations_used: int
    fitness: float
    x: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Aggregate:
    best: float
    worst: float
    avg: float


def aggregate(levels: Iterable[float]) -> Aggregate:
    """Best (min), worst (max) and arithmetic mean of signed dB levels."""
    v = np.asarray(list(levels), dtype=float)
    if v.size == 0:
        raise ValueError("cannot aggregate an empty set of cells")
    return Aggregate(float(v.min()), float(v.max()), float(v.mean()))


def _fmt(v) -> str:
    return repr(float(v))


@dataclass
class SweepReport:
    grid: SweepGrid
    schemes: tuple[SchemeKind, ...]
    cells: list[CellResult]
    aggregates: dict[SchemeKind, Aggregate]

    def levels(self, kind: SchemeKind) -> np.ndarray:
        return np.array([c.si_level_db for c in self.cells if c.scheme is kind])

    def by_cell(self) -> dict[tuple, dict[SchemeKind, CellResult]]:
        out: dict[tuple, dict] = {}
        for c in self.cells:
            out.setdefault(tuple(c.angles[k] for k in ANGLE_NAMES), {})[c.scheme] = c
        return out

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for c in self.cells:
            rows.append(
                [_fmt(c.angles[k]) for k in ANGLE_NAMES]
                + [
                    c.scheme.value,
                    _fmt(c.si_level_db),
                    _fmt(c.tx_degradation),
                    _fmt(c.rx_degradation),
                    str(c.iterations_used),
                ]
            )
        for kind in self.schemes:
            agg = self.aggregates[kind]
            for stat in ("best", "worst", "avg"):
                rows.append(["", "", "", "", f"{kind.value}:{stat}", _fmt(getattr(agg, stat)), "", "", ""])
        return rows

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def table(self) -> str:
        """Best/worst/avg per scheme as a small text table."""
        lines = [f"{'':8}" + "".join(f"{k.value:>10}" for k in self.schemes)]
        for stat in ("best", "worst", "avg"):
            lines.append(
                f"{stat:8}" + "".join(f"{getattr(self.aggregates[k], stat):10.2f}" for k in self.schemes)
            )
        return "\n".join(lines)


def _solve_cell(args) -> list[CellResult]:
    index, cell, ctx, schemes, seed = args
    tx, rx = cell_angles(cell)
    sols = solve_all(tx, rx, ctx, schemes, rng_seed=seed ^ index)
    return [
        CellResult(
            dict(cell),
            kind,
            s.si_level_db,
            s.evaluation.tx_degradation,
            s.evaluation.rx_degradation,
            s.iterations_used,
            s.evaluation.fitness,
            s.x,
        )
        for kind in schemes
        for s in [sols[kind]]
    ]


def run_sweep(
    grid: SweepGrid,
    schemes: Sequence[SchemeKind | str],
    ctx: SchemeContext,
    *,
    seed: int = 0,
    workers: int | None = None,
) -> SweepReport:
    """Solve every grid cell for every scheme.

    Cell ``i`` runs with PSO seed ``seed ^ i``, so results do not depend on
    ``workers``. ``workers=None`` uses one process per CPU.
    """
    kinds = tuple(SchemeKind.parse(s) if isinstance(s, str) else s for s in schemes)
    kinds = tuple(k for k in ALL_SCHEMES if k in kinds)
    if not kinds:
        raise ValueError("no schemes requested")
    cells = grid.cells()
    jobs = [(i, c, ctx, kinds, int(seed)) for i, c in enumerate(cells)]
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        results = [_solve_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_solve_cell, jobs))
    flat = [r for rs in results for r in rs]
    aggs = {k: aggregate(r.si_level_db for r in flat if r.scheme is k) for k in kinds}
    log.info("sweep done: %d cells x %d schemes", len(cells), len(kinds))
    return SweepReport(grid, kinds, flat, aggs)
