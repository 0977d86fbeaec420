"""
Array layouts and phase-response (steering) vectors for URA/ULA sub-arrays.

Element ordering is x-major: the element at grid position (k, l) sits at
flat index ``k * m_y + l``, which is the order produced by
``np.kron(x_factor, y_factor)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ArrayLayout:
    """Uniform rectangular array of ``m_x`` by ``m_y`` elements.

    ``spacing_d`` is the element spacing in carrier wavelengths. A ULA is the
    degenerate case ``m_y == 1`` (or ``m_x == 1``).
    """

    m_x: int
    m_y: int
    spacing_d: float = 0.5

    def __post_init__(self):
        if int(self.m_x) != self.m_x or int(self.m_y) != self.m_y:
            raise ValueError("element counts must be integers")
        if self.m_x < 1 or self.m_y < 1:
            raise ValueError(f"element counts must be >= 1, got {self.m_x}x{self.m_y}")
        if not np.isfinite(self.spacing_d) or self.spacing_d <= 0:
            raise ValueError(f"spacing_d must be positive, got {self.spacing_d}")

    @property
    def m(self) -> int:
        return self.m_x * self.m_y

    @property
    def is_linear(self) -> bool:
        return self.m_x == 1 or self.m_y == 1

    def grid_indices(self) -> np.ndarray:
        """(m, 2) integer array of (k, l) grid positions in flat element order."""
        k, l = np.meshgrid(np.arange(self.m_x), np.arange(self.m_y), indexing="ij")
        return np.column_stack([k.ravel(), l.ravel()])

    def positions(self, wavelength: float = 1.0) -> np.ndarray:
        """(m, 3) element coordinates in the z = 0 plane, scaled by ``wavelength``."""
        idx = self.grid_indices().astype(float) * self.spacing_d * wavelength
        return np.column_stack([idx, np.zeros(self.m)])

    @classmethod
    def parse(cls, text: str, spacing_d: float = 0.5) -> "ArrayLayout":
        """Build a layout from a string such as ``"2x2"`` or ``"1x4"``."""
        try:
            mx, my = (int(v) for v in text.lower().split("x"))
        except ValueError:
            raise ValueError(f"layout must look like '4x4', got {text!r}") from None
        return cls(mx, my, spacing_d)

    def __str__(self) -> str:
        return f"{self.m_x}x{self.m_y}"


@dataclass(frozen=True)
class SteeringAngles:
    """Elevation ``theta`` and azimuth ``psi`` in radians."""

    theta: float
    psi: float

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.psi)):
            raise ValueError(f"angles must be finite, got ({self.theta}, {self.psi})")

    @classmethod
    def from_degrees(cls, theta_deg: float, psi_deg: float) -> "SteeringAngles":
        return cls(float(np.deg2rad(theta_deg)), float(np.deg2rad(psi_deg)))

    @property
    def degrees(self) -> tuple[float, float]:
        return float(np.rad2deg(self.theta)), float(np.rad2deg(self.psi))

    def in_range(self) -> bool:
        return 0.0 <= self.theta <= TWO_PI and 0.0 <= self.psi <= TWO_PI


def axis_factors(layout: ArrayLayout, theta, psi):
    """Return the x- and y-axis phase factors.

    ``theta`` and ``psi`` may be scalars or equal-shape arrays; the factors
    then carry the angle shape as leading axes, i.e. shapes
    ``angle_shape + (m_x,)`` and ``angle_shape + (m_y,)``.
    """
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(psi))):
        raise ValueError("angles must be finite")
    u = np.sin(theta) * np.cos(psi)
    v = np.sin(theta) * np.sin(psi)
    k = np.arange(layout.m_x)
    l = np.arange(layout.m_y)
    fx = np.exp(1j * TWO_PI * layout.spacing_d * u[..., None] * k)
    fy = np.exp(1j * TWO_PI * layout.spacing_d * v[..., None] * l)
    return fx, fy


def phase_response(layout: ArrayLayout, angles: SteeringAngles) -> np.ndarray:
    """Phase-response vector of ``layout`` toward ``angles``.

    Parameters
    ----------
    layout : ArrayLayout
        Sub-array geometry.
    angles : SteeringAngles
        Elevation/azimuth in radians.

    Returns
    -------
    ndarray of complex, shape (m,)
        ``exp(j 2 pi d (k sin(theta) cos(psi) + l sin(theta) sin(psi)))`` at
        flat index ``k * m_y + l``.

    Examples
    --------
    >>> v = phase_response(ArrayLayout(2, 2), SteeringAngles.from_degrees(90, 90))
    >>> np.round(v.real, 12)
    array([ 1., -1.,  1., -1.])
    """
    fx, fy = axis_factors(layout, angles.theta, angles.psi)
    return np.kron(fx, fy)


def phase_response_batch(layout: ArrayLayout, theta, psi) -> np.ndarray:
    """Vectorized :func:`phase_response` over arrays of angles.

    Returns shape ``broadcast(theta, psi).shape + (m,)``.
    """
    theta, psi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(psi, float))
    fx, fy = axis_factors(layout, theta, psi)
    out = fx[..., :, None] * fy[..., None, :]
    return out.reshape(theta.shape + (layout.m,))


def conjugate_response(v: np.ndarray) -> np.ndarray:
    """Uplink phase response: the elementwise conjugate of ``v``."""
    return np.conj(np.asarray(v))
