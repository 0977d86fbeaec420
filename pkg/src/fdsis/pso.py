"""
Bounded particle swarm optimizer.

Velocity update::

    w <- Omega1 (x_best - x) + Omega2 (x_best_p - x) + Omega3 w

with Omega1, Omega2 fresh random diagonals (entries uniform on
``[0, omega1_max]`` / ``[0, omega2_max]``) and Omega3 a scalar inertia. The
position update clips ``x + w`` to the bounds. Personal and global bests
are running minima; ties keep the earlier point / lower particle index.

Randomness comes from a single ``numpy.random.Generator`` (PCG64) seeded
with ``rng_seed``. Draw order: initial positions for particles 0..P-1,
then each iteration, for particles 0..P-1, the Omega1 diagonal followed by
the Omega2 diagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds must have the same length")
        if np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)):
            raise ValueError("bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)


@dataclass(frozen=True)
class PsoConfig:
    """Swarm settings.

    ``inertia="constant"`` uses ``omega3`` as the inertia weight;
    ``inertia="schedule"`` uses ``(T - 1) / T``.

    The defaults are the Clerc-Kennedy constriction coefficients, which keep
    the swarm convergent. :meth:`classic` gives the Omega ranges [0, 2] with
    inertia 1.1; with inertia above 1 the velocities grow without bound and
    particles spend most of the run pinned to the box edges.
    """

    particles: int = 20
    iterations: int = 150
    omega1_max: float = 1.49618
    omega2_max: float = 1.49618
    omega3: float = 0.7298
    inertia: str = "constant"
    rng_seed: int = 0
    seed_with_baseline: bool = True

    def __post_init__(self):
        if self.particles < 1:
            raise ValueError("need at least one particle")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.omega1_max < 0 or self.omega2_max < 0:
            raise ValueError("omega ranges must be >= 0")
        if self.inertia not in ("constant", "schedule"):
            raise ValueError(f"unknown inertia mode {self.inertia!r}")

    @classmethod
    def classic(cls, **kw) -> "PsoConfig":
        """P = 20, Omega1 = Omega2 ranges [0, 2], Omega3 = 1.1."""
        return cls(**{"omega1_max": 2.0, "omega2_max": 2.0, "omega3": 1.1, **kw})

    @property
    def inertia_weight(self) -> float:
        if self.inertia == "schedule":
            t = max(self.iterations, 1)
            return (t - 1) / t
        return self.omega3


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best: np.ndarray
    personal_best_fitness: float = np.inf


@dataclass
class Swarm:
    """Swarm state as stacked arrays, one row per particle."""

    positions: np.ndarray
    velocities: np.ndarray
    personal_best: np.ndarray
    personal_best_fitness: np.ndarray

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    def particle(self, p: int) -> Particle:
        return Particle(
            self.positions[p].copy(),
            self.velocities[p].copy(),
            self.personal_best[p].copy(),
            float(self.personal_best_fitness[p]),
        )

    @property
    def particles(self) -> list[Particle]:
        return [self.particle(p) for p in range(self.size)]


@dataclass
class PsoResult:
    best: np.ndarray
    best_fitness: float
    fitness_trace: np.ndarray = field(repr=False)
    iterations: int = 0
    evaluations: int = 0


def initialize_swarm(
    cfg: PsoConfig,
    bounds: Bounds,
    baseline=None,
    rng: np.random.Generator | None = None,
) -> Swarm:
    """Uniform random positions inside ``bounds`` and zero velocities.

    ``baseline`` may be one point or a sequence of points; when
    ``cfg.seed_with_baseline`` is set they overwrite particles 0, 1, ...
    """
    rng = np.random.default_rng(cfg.rng_seed) if rng is None else rng
    P, D = cfg.particles, bounds.dim
    span = bounds.upper - bounds.lower
    X = bounds.lower + span * rng.random((P, D))
    X = bounds.clip(X)
    if baseline is not None and cfg.seed_with_baseline:
        seeds = np.atleast_2d(np.asarray(baseline, dtype=float))
        if seeds.shape[1] != D:
            raise ValueError(f"baseline has {seeds.shape[1]} coordinates, expected {D}")
        if seeds.shape[0] > P:
            raise ValueError(f"{seeds.shape[0]} baselines for {P} particles")
        for i, s in enumerate(seeds):
            if not bounds.contains(s):
                raise ValueError(f"baseline {i} lies outside the bounds")
            X[i] = s
    return Swarm(X, np.zeros((P, D)), X.copy(), np.full(P, np.inf))


def velocity_update(
    p: Particle,
    global_best,
    cfg: PsoConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """New velocity for one particle; draws the Omega1 then the Omega2 diagonal."""
    D = p.position.size
    om1 = cfg.omega1_max * rng.random(D)
    om2 = cfg.omega2_max * rng.random(D)
    x = p.position
    return om1 * (np.asarray(global_best) - x) + om2 * (p.personal_best - x) + cfg.inertia_weight * p.velocity


def position_update(p: Particle, bounds: Bounds) -> np.ndarray:
    """``clip(position + velocity, lower, upper)``."""
    return bounds.clip(p.position + p.velocity)


def run(
    cfg: PsoConfig,
    bounds: Bounds,
    fitness_fn: Callable,
    *,
    baseline=None,
    batch: bool = False,
    on_evaluate: Callable[[np.ndarray, np.ndarray], None] | None = None,
) -> PsoResult:
    """Minimize ``fitness_fn`` over ``bounds``.

    Parameters
    ----------
    cfg : PsoConfig
        Swarm size, iteration count, coefficients and seed.
    bounds : Bounds
        Box constraints; every evaluated position lies inside.
    fitness_fn : callable
        ``f(x) -> float`` or, with ``batch=True``, ``f(X) -> (P,)`` over the
        rows of a ``(P, D)`` array.
    baseline : array_like, optional
        Point(s) placed in the initial swarm.
    on_evaluate : callable, optional
        Called as ``on_evaluate(X, fitness)`` after every swarm evaluation.

    Returns
    -------
    PsoResult
        ``fitness_trace[t]`` is the global best after iteration ``t``
        (``t = 0`` being the initial swarm), so it has ``iterations + 1``
        entries and never increases.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    swarm = initialize_swarm(cfg, bounds, baseline, rng)
    P, D = swarm.positions.shape
    w3 = cfg.inertia_weight

    def evaluate(X):
        if batch:
            f = np.asarray(fitness_fn(X), dtype=float).reshape(P)
        else:
            f = np.array([float(fitness_fn(x)) for x in X])
        if on_evaluate is not None:
            on_evaluate(X, f)
        return f

    X, V = swarm.positions, swarm.velocities
    pbest, pfit = swarm.personal_best, swarm.personal_best_fitness
    pfit[:] = evaluate(X)
    g = int(np.argmin(pfit))
    gbest, gfit = pbest[g].copy(), pfit[g]
    trace = [gfit]

    for t in range(1, cfg.iterations + 1):
        omegas = rng.random((P, 2, D))
        V[:] = (
            cfg.omega1_max * omegas[:, 0] * (gbest - X)
            + cfg.omega2_max * omegas[:, 1] * (pbest - X)
            + w3 * V
        )
        X[:] = bounds.clip(X + V)
        f = evaluate(X)
        improved = f < pfit
        pbest[improved] = X[improved]
        pfit[improved] = f[improved]
        g = int(np.argmin(pfit))
        if pfit[g] < gfit:
            gbest, gfit = pbest[g].copy(), pfit[g]
        trace.append(gfit)

    log.debug("pso finished: best %.6g after %d iterations", gfit, cfg.iterations)
    return PsoResult(gbest, float(gfit), np.array(trace), cfg.iterations, P * (cfg.iterations + 1))
