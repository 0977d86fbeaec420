"""
Frequency-sampled self-interference (SI) coupling channel.

The tensor is indexed ``[rx_element, tx_element, freq]``. Element indices
follow the x-major order of :func:`fdsis.geometry.phase_response`.

Two on-disk formats are supported:

* binary (``.sich``): ``b"SICH"``, version ``u16``, ``M_u``, ``M_d``, ``N``
  as ``u32``, then ``N`` float64 frequencies, then the tensor in row-major
  ``[rx][tx][freq]`` order as interleaved float64 ``(re, im)`` pairs; all
  little-endian.
* CSV: header ``rx,tx,freq_hz,re,im`` and one row per tensor entry.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path

import numpy as np

from .geometry import ArrayLayout

SPEED_OF_LIGHT = 299_792_458.0

MAGIC = b"SICH"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIII")
CSV_HEADER = ["rx", "tx", "freq_hz", "re", "im"]


class ChannelFormatError(ValueError):
    """Raised when a channel file is malformed or inconsistent."""


def default_layout(m: int, spacing_d: float = 0.5) -> ArrayLayout:
    """Square layout when ``m`` is a perfect square, otherwise an ``m x 1`` ULA."""
    r = isqrt(m)
    if r * r == m:
        return ArrayLayout(r, r, spacing_d)
    return ArrayLayout(m, 1, spacing_d)


@dataclass(frozen=True)
class SiChannel:
    tensor: np.ndarray = field(repr=False)
    freqs_hz: np.ndarray = field(repr=False)
    tx_layout: ArrayLayout
    rx_layout: ArrayLayout

    def __post_init__(self):
        t = np.array(self.tensor, dtype=np.complex128)
        f = np.array(self.freqs_hz, dtype=np.float64)
        if t.ndim != 3:
            raise ValueError(f"tensor must be 3-D, got shape {t.shape}")
        if f.ndim != 1 or f.size != t.shape[2] or f.size == 0:
            raise ValueError(f"{f.size} frequencies for a tensor of shape {t.shape}")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if t.shape[0] != self.rx_layout.m or t.shape[1] != self.tx_layout.m:
            raise ValueError(
                f"tensor shape {t.shape[:2]} does not match rx {self.rx_layout} / tx {self.tx_layout}"
            )
        t.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "tensor", t)
        object.__setattr__(self, "freqs_hz", f)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.tensor.shape

    @property
    def n_freqs(self) -> int:
        return self.tensor.shape[2]

    def band_tensor(self, band: "BandSlice") -> np.ndarray:
        """Band samples as an ``(N, M_u, M_d)`` array (frequency-leading)."""
        return np.ascontiguousarray(np.moveaxis(self.tensor[:, :, band.slice], 2, 0))

    def summary(self) -> dict:
        mag_db = 20 * np.log10(np.maximum(np.abs(self.tensor), 1e-300))
        return {
            "rx_layout": str(self.rx_layout),
            "tx_layout": str(self.tx_layout),
            "shape": list(self.shape),
            "freq_min_hz": float(self.freqs_hz[0]),
            "freq_max_hz": float(self.freqs_hz[-1]),
            "coupling_db_min": float(mag_db.min()),
            "coupling_db_max": float(mag_db.max()),
            "coupling_db_mean": float(mag_db.mean()),
        }


@dataclass(frozen=True)
class BandSlice:
    center_hz: float
    bandwidth_hz: float
    start: int
    stop: int

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    @property
    def n(self) -> int:
        return self.stop - self.start


# -- band and sub-array selection -----------------------------------------


def slice_band(ch_or_freqs, center_hz: float, bandwidth_hz: float) -> BandSlice:
    """Select all grid frequencies inside ``[center - bw/2, center + bw/2]``.

    Accepts an :class:`SiChannel` or a bare ascending frequency array. Grid
    points within a tiny fraction of the grid step from an edge count as
    inside, so a band whose edges fall on grid points is inclusive.

    >>> freqs = np.linspace(3e9, 4e9, 1601)
    >>> slice_band(freqs, 3.5e9, 20e6).n
    33
    """
    freqs = ch_or_freqs.freqs_hz if isinstance(ch_or_freqs, SiChannel) else np.asarray(ch_or_freqs, float)
    if bandwidth_hz < 0 or not np.isfinite(bandwidth_hz) or not np.isfinite(center_hz):
        raise ValueError("band must have finite center and non-negative width")
    lo, hi = center_hz - bandwidth_hz / 2, center_hz + bandwidth_hz / 2
    step = np.min(np.diff(freqs)) if freqs.size > 1 else max(abs(center_hz), 1.0)
    tol = 1e-6 * step
    if hi < freqs[0] - tol or lo > freqs[-1] + tol:
        raise ValueError(f"band [{lo:g}, {hi:g}] Hz lies outside the grid [{freqs[0]:g}, {freqs[-1]:g}]")
    inside = np.flatnonzero((freqs >= lo - tol) & (freqs <= hi + tol))
    if inside.size == 0:
        raise ValueError(f"no grid frequency inside [{lo:g}, {hi:g}] Hz")
    return BandSlice(float(center_hz), float(bandwidth_hz), int(inside[0]), int(inside[-1]) + 1)


def _block_elements(full: ArrayLayout, sub: ArrayLayout, block) -> np.ndarray:
    if full.m_x % sub.m_x or full.m_y % sub.m_y:
        raise ValueError(f"sub-array {sub} does not tile full array {full}")
    nbx, nby = full.m_x // sub.m_x, full.m_y // sub.m_y
    if isinstance(block, (tuple, list)):
        bx, by = (int(b) for b in block)
    else:
        bx, by = divmod(int(block), nby)
    if not (0 <= bx < nbx and 0 <= by < nby):
        raise IndexError(f"block ({bx}, {by}) out of range for a {nbx}x{nby} partition")
    k, l = np.meshgrid(
        bx * sub.m_x + np.arange(sub.m_x), by * sub.m_y + np.arange(sub.m_y), indexing="ij"
    )
    return (k * full.m_y + l).ravel()


def n_blocks(full: ArrayLayout, sub: ArrayLayout) -> int:
    if full.m_x % sub.m_x or full.m_y % sub.m_y:
        raise ValueError(f"sub-array {sub} does not tile full array {full}")
    return (full.m_x // sub.m_x) * (full.m_y // sub.m_y)


def extract_subarray(
    ch: SiChannel,
    tx_block,
    rx_block,
    tx_sub_layout: ArrayLayout,
    rx_sub_layout: ArrayLayout,
) -> SiChannel:
    """Channel between one contiguous Rx tile and one contiguous Tx tile.

    Blocks are given as ``(bx, by)`` tile coordinates or as a flat tile index
    ``bx * n_tiles_y + by``. The sub-tensor keeps x-major element order.
    """
    tx_idx = _block_elements(ch.tx_layout, tx_sub_layout, tx_block)
    rx_idx = _block_elements(ch.rx_layout, rx_sub_layout, rx_block)
    sub = ch.tensor[np.ix_(rx_idx, tx_idx)]
    return SiChannel(sub, ch.freqs_hz, tx_sub_layout, rx_sub_layout)


# -- synthetic line-of-sight coupling --------------------------------------


def default_alpha(separation_m: float, coupling_db: float = -30.0) -> float:
    """Amplitude that puts the nearest-element coupling at ``coupling_db``."""
    return separation_m * 10 ** (coupling_db / 20)


def generate_los_channel(
    tx_layout: ArrayLayout,
    rx_layout: ArrayLayout,
    separation_wavelengths: float,
    freqs_hz,
    amplitude_alpha: float | None = None,
    lateral_offset_wavelengths=0.0,
) -> SiChannel:
    """Free-space LoS coupling between two parallel planar arrays.

    The Tx array lies in the plane ``z = 0`` and the Rx array in the plane
    ``z = separation``, optionally shifted in-plane by
    ``lateral_offset_wavelengths`` (a scalar x shift or an ``(x, y)`` pair).
    Element positions are scaled by the wavelength at the grid's
    center frequency. Entry ``[u, d, n]`` is
    ``alpha / r_ud * exp(-j 2 pi r_ud f_n / c)`` with ``r_ud`` in meters.

    ``amplitude_alpha=None`` picks ``alpha`` so that the closest element pair
    couples at -30 dB.
    """
    freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    if freqs.size == 0:
        raise ValueError("frequency grid is empty")
    if not separation_wavelengths > 0:
        raise ValueError("separation must be positive (elements would collide)")
    wavelength = SPEED_OF_LIGHT / (0.5 * (freqs[0] + freqs[-1]))
    tx_pos = tx_layout.positions(wavelength)
    rx_pos = rx_layout.positions(wavelength)
    off = np.atleast_1d(np.asarray(lateral_offset_wavelengths, dtype=float))
    dx, dy = (off[0], 0.0) if off.size == 1 else off
    rx_pos = rx_pos + np.array([dx, dy, separation_wavelengths]) * wavelength
    r = np.linalg.norm(rx_pos[:, None, :] - tx_pos[None, :, :], axis=-1)
    if amplitude_alpha is None:
        amplitude_alpha = default_alpha(float(r.min()))
    tensor = (amplitude_alpha / r)[..., None] * np.exp(
        -2j * np.pi * r[..., None] * freqs / SPEED_OF_LIGHT
    )
    return SiChannel(tensor, freqs, tx_layout, rx_layout)


# Parameters of the shipped reference file (data/reference_los_4x4.sich).
REFERENCE_PARAMS = dict(
    tx_layout=ArrayLayout(4, 4),
    rx_layout=ArrayLayout(4, 4),
    separation_wavelengths=1.0,
    freqs_hz=np.linspace(3.49e9, 3.51e9, 33),
    amplitude_alpha=None,
)


def reference_channel() -> SiChannel:
    return generate_los_channel(**REFERENCE_PARAMS)


def reference_channel_path() -> Path:
    return Path(__file__).parent / "data" / "reference_los_4x4.sich"


def synthetic_channel(
    full_layout: ArrayLayout = ArrayLayout(8, 8),
    f_start_hz: float = 3e9,
    f_stop_hz: float = 4e9,
    n_freqs: int = 1601,
    separation_wavelengths: float = 0.5,
    lateral_offset_wavelengths=(4.5, 0.3),
) -> SiChannel:
    """Default stand-in for a measured 8x8 Tx / 8x8 Rx channel on a 3-4 GHz grid.

    The Rx panel sits beside the Tx panel (4.5 wavelengths along x, slightly
    skewed along y) and half a wavelength behind it. The skew avoids the
    mirror symmetry that would give exact, unphysical SI nulls.
    """
    freqs = np.linspace(f_start_hz, f_stop_hz, n_freqs)
    return generate_los_channel(
        full_layout,
        full_layout,
        separation_wavelengths,
        freqs,
        lateral_offset_wavelengths=lateral_offset_wavelengths,
    )


# -- file I/O ---------------------------------------------------------------


def _resolve_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "binary"
    fmt = fmt.lower()
    if fmt in ("bin", "sich"):
        fmt = "binary"
    if fmt not in ("binary", "csv"):
        raise ValueError(f"unknown channel format {fmt!r}")
    return fmt


def save_channel(ch: SiChannel, path, fmt: str | None = None) -> Path:
    """Write ``ch`` in binary (default) or CSV format; format follows the suffix."""
    path = Path(path)
    fmt = _resolve_format(path, fmt)
    m_u, m_d, n = ch.shape
    if fmt == "binary":
        payload = np.empty((m_u, m_d, n, 2), dtype="<f8")
        payload[..., 0] = ch.tensor.real
        payload[..., 1] = ch.tensor.imag
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, m_u, m_d, n))
            fh.write(ch.freqs_hz.astype("<f8").tobytes())
            fh.write(payload.tobytes())
    else:
        u, d, k = np.meshgrid(np.arange(m_u), np.arange(m_d), np.arange(n), indexing="ij")
        t = ch.tensor.ravel()
        cols = [u.ravel(), d.ravel(), ch.freqs_hz[k.ravel()], t.real, t.imag]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            # repr() is the shortest string that round-trips a float64 exactly
            w.writerows(
                (int(a), int(b), repr(float(f)), repr(float(re)), repr(float(im)))
                for a, b, f, re, im in zip(*cols)
            )
    return path


def _read_binary(path: Path):
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ChannelFormatError("file shorter than header")
    magic, version, m_u, m_d, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ChannelFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ChannelFormatError(f"unsupported version {version}")
    expected = _HEADER.size + 8 * n + 16 * m_u * m_d * n
    if len(raw) != expected:
        raise ChannelFormatError(
            f"dimension mismatch: header declares {m_u}x{m_d}x{n} "
            f"({expected} bytes) but file has {len(raw)} bytes"
        )
    off = _HEADER.size
    freqs = np.frombuffer(raw, dtype="<f8", count=n, offset=off).astype(np.float64)
    off += 8 * n
    pairs = np.frombuffer(raw, dtype="<f8", offset=off).reshape(m_u, m_d, n, 2)
    tensor = pairs[..., 0] + 1j * pairs[..., 1]
    return tensor, freqs


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        if header != CSV_HEADER:
            raise ChannelFormatError(f"CSV header must be {','.join(CSV_HEADER)}, got {header}")
        try:
            data = np.loadtxt(fh, delimiter=",", dtype=np.float64, ndmin=2)
        except ValueError as exc:
            raise ChannelFormatError(f"malformed CSV row: {exc}") from None
    if data.size == 0:
        raise ChannelFormatError("CSV has no data rows")
    if data.shape[1] != 5:
        raise ChannelFormatError(f"expected 5 columns, got {data.shape[1]}")
    rx = data[:, 0].astype(np.int64)
    tx = data[:, 1].astype(np.int64)
    freqs, fidx = np.unique(data[:, 2], return_inverse=True)
    m_u, m_d, n = rx.max() + 1, tx.max() + 1, freqs.size
    if data.shape[0] != m_u * m_d * n or rx.min() < 0 or tx.min() < 0:
        raise ChannelFormatError(
            f"dimension mismatch: {data.shape[0]} rows for a {m_u}x{m_d}x{n} tensor"
        )
    tensor = np.full((m_u, m_d, n), np.nan + 0j)
    tensor[rx, tx, fidx] = data[:, 3] + 1j * data[:, 4]
    if np.isnan(tensor.real).any():
        raise ChannelFormatError("CSV does not cover every (rx, tx, freq) entry exactly once")
    return tensor, freqs


def load_channel(
    path,
    fmt: str | None = None,
    tx_layout: ArrayLayout | None = None,
    rx_layout: ArrayLayout | None = None,
) -> SiChannel:
    """Read a channel written by :func:`save_channel` (or a compatible tool).

    Neither format stores array geometry; pass ``tx_layout``/``rx_layout`` or
    accept :func:`default_layout` (square when possible, else linear).
    """
    path = Path(path)
    fmt = _resolve_format(path, fmt)
    tensor, freqs = _read_binary(path) if fmt == "binary" else _read_csv(path)
    if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
        raise ChannelFormatError("frequency grid is not strictly increasing")
    m_u, m_d, _ = tensor.shape
    tx_layout = tx_layout or default_layout(m_d)
    rx_layout = rx_layout or default_layout(m_u)
    try:
        return SiChannel(tensor, freqs, tx_layout, rx_layout)
    except ValueError as exc:
        raise ChannelFormatError(str(exc)) from None
