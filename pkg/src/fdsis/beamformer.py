"""
Gain-controlled downlink (Tx) and uplink (Rx) RF beamformers.

A beam is ``phase_response * gains / sqrt(m)``; the uplink beam uses the
conjugated phase response. Gains are per element and live in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ArrayLayout,
    SteeringAngles,
    conjugate_response,
    phase_response,
    phase_response_batch,
)


def check_gains(gains, m: int) -> np.ndarray:
    g = np.asarray(gains, dtype=float)
    if g.ndim == 0:
        g = np.full(m, float(g))
    if g.shape != (m,):
        raise ValueError(f"expected {m} gains, got shape {g.shape}")
    if np.any(~np.isfinite(g)) or np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError("gains must lie in [0, 1]")
    return g


@dataclass(frozen=True)
class BeamWeights:
    weights: np.ndarray = field(repr=False)
    layout: ArrayLayout
    steer: SteeringAngles
    gains: np.ndarray = field(repr=False)
    uplink: bool = False

    @property
    def m(self) -> int:
        return self.layout.m

    def reference(self, at: SteeringAngles) -> np.ndarray:
        """Ideal response of this beam's link direction toward ``at``."""
        v = phase_response(self.layout, at)
        return conjugate_response(v) if self.uplink else v


def build_tx_beam(layout: ArrayLayout, angles: SteeringAngles, gains=1.0) -> BeamWeights:
    """Downlink beamformer steered at ``angles`` with per-element ``gains``.

    Examples
    --------
    >>> b = build_tx_beam(ArrayLayout(2, 2), SteeringAngles(0.0, 0.3))
    >>> b.weights.real
    array([0.5, 0.5, 0.5, 0.5])
    """
    g = check_gains(gains, layout.m)
    w = phase_response(layout, angles) * g / np.sqrt(layout.m)
    return BeamWeights(w, layout, angles, g, uplink=False)


def build_rx_beam(layout: ArrayLayout, angles: SteeringAngles, gains=1.0) -> BeamWeights:
    """Uplink beamformer; identical to :func:`build_tx_beam` on the conjugated response."""
    g = check_gains(gains, layout.m)
    w = conjugate_response(phase_response(layout, angles)) * g / np.sqrt(layout.m)
    return BeamWeights(w, layout, angles, g, uplink=True)


def directivity(beam: BeamWeights, at: SteeringAngles) -> float:
    """Array gain of ``beam`` toward ``at``.

    Computed as ``|a^H w|^2`` where ``a`` is the beam's own-link response at
    ``at``. With exact steering and unit gains this equals ``m``, and by
    Cauchy-Schwarz it never exceeds ``m`` for gains in [0, 1].
    """
    a = beam.reference(at)
    return float(abs(np.vdot(a, beam.weights)) ** 2)


def directivity_degradation(beam: BeamWeights, nominal: SteeringAngles) -> float:
    """``m - directivity(beam, nominal)``; a beam is feasible when this is <= epsilon."""
    return beam.m - directivity(beam, nominal)


# -- batched forms used by the optimizer ----------------------------------


def beam_weights_batch(layout: ArrayLayout, theta, psi, gains, uplink: bool = False) -> np.ndarray:
    """Weights for many beams at once.

    ``theta``/``psi`` have shape (P,), ``gains`` has shape (P, m) or (m,).
    Returns a (P, m) complex array.
    """
    v = phase_response_batch(layout, theta, psi)
    if uplink:
        v = np.conj(v)
    return v * np.asarray(gains, dtype=float) / np.sqrt(layout.m)


def degradation_batch(weights: np.ndarray, reference: np.ndarray, m: int) -> np.ndarray:
    """``m - |reference^H w_p|^2`` for each row ``w_p`` of ``weights``."""
    return m - np.abs(weights @ np.conj(reference)) ** 2
