"""
Wideband SI power through a Tx/Rx beam pair and the penalized fitness.

The decision vector is laid out as::

    [theta_D, theta_U, psi_D, psi_U, g_1..g_Mds (Tx), g_1..g_Mus (Rx)]

Angles are radians. ``fitness`` adds a hinge penalty for directivity
degradation beyond ``epsilon`` on either link; lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamformer import (
    BeamWeights,
    beam_weights_batch,
    build_rx_beam,
    build_tx_beam,
    degradation_batch,
    directivity_degradation,
)
from .channel import BandSlice, SiChannel
from .geometry import ArrayLayout, SteeringAngles, conjugate_response, phase_response

DEFAULT_FLOOR_DB = 300.0


class BelowNumericFloor(ValueError):
    """SI power is zero (or negative), so its dB value is undefined."""


def to_db(power: float, floor_db: float | None = None) -> float:
    """Suppression in dB, ``-10 log10(power)``.

    Non-positive power raises :class:`BelowNumericFloor` unless ``floor_db``
    is given, in which case that value is returned instead.
    """
    if not power > 0:
        if floor_db is None:
            raise BelowNumericFloor(f"power {power!r} has no dB value")
        return float(floor_db)
    return float(-10.0 * np.log10(power))


def si_level_db(power: float, floor_db: float = DEFAULT_FLOOR_DB) -> float:
    """Residual SI level in dB (negative for suppression), i.e. ``-to_db``."""
    return -to_db(power, floor_db)


def _weights(beam) -> np.ndarray:
    return beam.weights if isinstance(beam, BeamWeights) else np.asarray(beam)


def band_power(f_u, f_d, band_tensor: np.ndarray) -> float:
    """Mean of ``|f_u^T H_n f_d|^2`` over the leading axis of ``band_tensor``."""
    fu, fd = _weights(f_u), _weights(f_d)
    n, m_u, m_d = band_tensor.shape
    if fu.shape != (m_u,) or fd.shape != (m_d,):
        raise ValueError(
            f"beam sizes (rx {fu.shape}, tx {fd.shape}) do not match channel {m_u}x{m_d}"
        )
    s = (band_tensor @ fd) @ fu
    return float(np.mean(s.real**2 + s.imag**2))


def si_power(f_u, f_d, ch: SiChannel, band: BandSlice | None = None) -> float:
    """Band-averaged SI power (linear) through Rx beam ``f_u`` and Tx beam ``f_d``.

    ``band=None`` averages over every frequency of ``ch``.
    """
    band_tensor = np.moveaxis(ch.tensor if band is None else ch.tensor[:, :, band.slice], 2, 0)
    return band_power(f_u, f_d, band_tensor)


@dataclass(frozen=True)
class ConstraintConfig:
    """Directivity slack and penalty weight.

    ``epsilon=None`` means 5% of each link's maximum directivity ``m``.
    """

    epsilon: float | None = None
    penalty_weight: float = 1e3

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be > 0")

    def eps_for(self, m: int) -> float:
        return 0.05 * m if self.epsilon is None else float(self.epsilon)


@dataclass(frozen=True)
class SiEvaluation:
    mean_si_power: float
    suppression_db: float
    tx_degradation: float
    rx_degradation: float
    fitness: float

    @property
    def si_level_db(self) -> float:
        return -self.suppression_db


@dataclass(frozen=True)
class SiProblem:
    """Everything needed to score a decision vector for one angle pair.

    ``band_tensor`` is the sub-array channel restricted to the band,
    frequency-leading: shape ``(N, M_us, M_ds)``.
    """

    tx_layout: ArrayLayout
    rx_layout: ArrayLayout
    band_tensor: np.ndarray = field(repr=False)
    nominal_tx: SteeringAngles
    nominal_rx: SteeringAngles
    constraints: ConstraintConfig = ConstraintConfig()
    floor_db: float = DEFAULT_FLOOR_DB

    def __post_init__(self):
        h = np.ascontiguousarray(self.band_tensor, dtype=np.complex128)
        if h.ndim != 3 or h.shape[1:] != (self.rx_layout.m, self.tx_layout.m):
            raise ValueError(
                f"band tensor shape {h.shape} does not match rx {self.rx_layout} / tx {self.tx_layout}"
            )
        h.setflags(write=False)
        object.__setattr__(self, "band_tensor", h)

    @classmethod
    def from_channel(cls, ch: SiChannel, band: BandSlice, nominal_tx, nominal_rx, **kw) -> "SiProblem":
        return cls(ch.tx_layout, ch.rx_layout, ch.band_tensor(band), nominal_tx, nominal_rx, **kw)

    @property
    def dim(self) -> int:
        return 4 + self.tx_layout.m + self.rx_layout.m

    @property
    def eps_tx(self) -> float:
        return self.constraints.eps_for(self.tx_layout.m)

    @property
    def eps_rx(self) -> float:
        return self.constraints.eps_for(self.rx_layout.m)

    def nominal_vector(self) -> np.ndarray:
        """The maximum-directivity point: exact steering, unit gains."""
        return np.concatenate(
            [
                [self.nominal_tx.theta, self.nominal_rx.theta, self.nominal_tx.psi, self.nominal_rx.psi],
                np.ones(self.tx_layout.m + self.rx_layout.m),
            ]
        )

    def split(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"decision vector must have {self.dim} entries, got {x.shape[-1]}")
        m_d = self.tx_layout.m
        return x[..., 0], x[..., 1], x[..., 2], x[..., 3], x[..., 4 : 4 + m_d], x[..., 4 + m_d :]

    def beams(self, x) -> tuple[BeamWeights, BeamWeights]:
        """Rx and Tx beams ``(f_u, f_d)`` encoded by decision vector ``x``."""
        th_d, th_u, ps_d, ps_u, g_d, g_u = self.split(x)
        f_d = build_tx_beam(self.tx_layout, SteeringAngles(float(th_d), float(ps_d)), g_d)
        f_u = build_rx_beam(self.rx_layout, SteeringAngles(float(th_u), float(ps_u)), g_u)
        return f_u, f_d

    def penalty(self, tx_deg: float, rx_deg: float) -> float:
        hinge = max(0.0, tx_deg - self.eps_tx) + max(0.0, rx_deg - self.eps_rx)
        return self.constraints.penalty_weight * hinge

    def evaluate(self, x) -> SiEvaluation:
        f_u, f_d = self.beams(x)
        p = band_power(f_u, f_d, self.band_tensor)
        tx_deg = directivity_degradation(f_d, self.nominal_tx)
        rx_deg = directivity_degradation(f_u, self.nominal_rx)
        pen = self.penalty(tx_deg, rx_deg)
        fit = p + pen if pen > 0 else p
        return SiEvaluation(p, to_db(p, self.floor_db), tx_deg, rx_deg, fit)

    def fitness(self, x) -> float:
        return self.evaluate(x).fitness

    def is_feasible(self, ev: SiEvaluation) -> bool:
        return ev.tx_degradation <= self.eps_tx and ev.rx_degradation <= self.eps_rx

    def evaluate_batch(self, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized ``(si_power, tx_degradation, rx_degradation)`` for rows of ``X``."""
        th_d, th_u, ps_d, ps_u, g_d, g_u = self.split(np.atleast_2d(X))
        w_d = beam_weights_batch(self.tx_layout, th_d, ps_d, g_d, uplink=False)
        w_u = beam_weights_batch(self.rx_layout, th_u, ps_u, g_u, uplink=True)
        # s[p, n] = w_u[p] . H[n] . w_d[p]
        s = np.einsum("pu,nud,pd->pn", w_u, self.band_tensor, w_d, optimize=True)
        power = np.mean(s.real**2 + s.imag**2, axis=1)
        ref_d = phase_response(self.tx_layout, self.nominal_tx)
        ref_u = conjugate_response(phase_response(self.rx_layout, self.nominal_rx))
        tx_deg = degradation_batch(w_d, ref_d, self.tx_layout.m)
        rx_deg = degradation_batch(w_u, ref_u, self.rx_layout.m)
        return power, tx_deg, rx_deg

    def fitness_batch(self, X) -> np.ndarray:
        power, tx_deg, rx_deg = self.evaluate_batch(X)
        hinge = np.maximum(0.0, tx_deg - self.eps_tx) + np.maximum(0.0, rx_deg - self.eps_rx)
        return power + self.constraints.penalty_weight * hinge


def fitness(x, problem: SiProblem) -> float:
    """Penalized objective of decision vector ``x``: SI power plus constraint hinge."""
    return problem.fitness(x)
