"""M-PSK constellations, differential encoding and the linear detector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Constellation",
    "SymbolFrame",
    "diff_encode",
    "expected_diff_power",
    "linear_detect",
    "linear_detect_indices",
    "demap",
]

_ON_CONSTELLATION_TOL = 1e-9


@dataclass(frozen=True)
class Constellation:
    """Unit-modulus M-PSK alphabet, point m at angle 2*pi*m/M - rotation.

    Attributes
    ----------
    order : int
        Number of points M, a power of two >= 2.
    rotation : float
        Rotation angle in radians, restricted to [-pi/M, pi/M].
    """

    order: int
    rotation: float = 0.0
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = self.order
        if isinstance(m, bool) or int(m) != m or m < 2 or (int(m) & (int(m) - 1)):
            raise ValueError(f"order must be a power of two >= 2, got {m!r}")
        limit = math.pi / m
        if abs(self.rotation) > limit * (1 + 1e-12):
            raise ValueError(f"rotation {self.rotation} outside [-pi/{m}, pi/{m}]")
        angles = 2.0 * np.pi * np.arange(m) / m - self.rotation
        pts = np.cos(angles) + 1j * np.sin(angles)
        # Snap round-off so that e.g. the QPSK point j is exactly 0+1j.
        pts.real[np.abs(pts.real) < 1e-15] = 0.0
        pts.imag[np.abs(pts.imag) < 1e-15] = 0.0
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def rotated(cls, order: int) -> "Constellation":
        """Constellation with the default pi/M offset."""
        return cls(order, math.pi / order)

    @property
    def g_psk(self) -> float:
        return math.sin(math.pi / self.order) ** 2

    def modulate(self, indices) -> np.ndarray:
        return self.points[np.asarray(indices)]

    def indices_of(self, symbols) -> np.ndarray:
        """Indices of ``symbols``; raises if any is not a constellation point."""
        symbols = np.asarray(symbols, dtype=complex)
        dist = np.abs(symbols[..., None] - self.points)
        idx = np.argmin(dist, axis=-1)
        if np.any(np.take_along_axis(dist, idx[..., None], axis=-1) > _ON_CONSTELLATION_TOL):
            raise ValueError("symbol not on the constellation")
        return idx


@dataclass(frozen=True)
class SymbolFrame:
    """Differentially encoded frame.

    ``diff_symbols`` has length L+1 and starts with the reference symbol;
    ``info_symbols`` holds the L information symbols, so that
    ``diff_symbols[t] == diff_symbols[t-1] * info_symbols[t-1]``.
    Leading axes, if present, index independent frames.
    """

    info_symbols: np.ndarray
    diff_symbols: np.ndarray

    @property
    def length(self) -> int:
        return self.info_symbols.shape[-1]


def diff_encode(info, reference=1.0 + 0.0j, constellation: Constellation | None = None) -> SymbolFrame:
    """Differentially encode ``info`` starting from ``reference``.

    Works on a single frame or a batch of frames along the leading axes.
    When ``constellation`` is given, every info symbol is checked to lie on it.
    """
    info = np.asarray(info, dtype=complex)
    if constellation is not None:
        constellation.indices_of(info)
    elif np.any(np.abs(np.abs(info) - 1.0) > _ON_CONSTELLATION_TOL):
        raise ValueError("info symbols must have unit modulus")
    ref = np.asarray(reference, dtype=complex)
    if np.any(np.abs(np.abs(ref) - 1.0) > _ON_CONSTELLATION_TOL):
        raise ValueError("reference symbol must have unit modulus")
    ref = np.broadcast_to(ref, info.shape[:-1] + (1,))
    chain = np.cumprod(np.concatenate([ref, info], axis=-1), axis=-1)
    # Long cumulative products drift off the unit circle; renormalise.
    chain /= np.abs(chain)
    return SymbolFrame(info_symbols=info, diff_symbols=chain)


def expected_diff_power(cons1: Constellation, cons2: Constellation) -> float:
    """Mean of |a - b|^2 over all equiprobable pairs (a, b) of the two alphabets."""
    diff = cons1.points[:, None] - cons2.points[None, :]
    return float(np.mean(np.abs(diff) ** 2))


def linear_detect_indices(prev, curr, cons: Constellation) -> np.ndarray:
    """Vectorised detector: index maximising Re{conj(prev) * curr * c}.

    Ties go to the lowest constellation index.
    """
    z = np.conj(np.asarray(prev)) * np.asarray(curr)
    metric = np.real(z[..., None] * cons.points)
    return np.argmax(metric, axis=-1)


def linear_detect(prev, curr, cons: Constellation):
    """Constellation point chosen by the linear differential detector."""
    idx = linear_detect_indices(prev, curr, cons)
    out = cons.points[idx]
    return complex(out) if np.ndim(out) == 0 else out


def demap(point, cons: Constellation):
    """Nearest constellation index (Euclidean); ties go to the lowest index."""
    dist = np.abs(np.asarray(point, dtype=complex)[..., None] - cons.points)
    idx = np.argmin(dist, axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx
