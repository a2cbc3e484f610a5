"""Quasi-static Rayleigh fading for the two-hop, N-relay network."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import SeededStream, draw_complex_gaussian

__all__ = ["FadingRealization", "draw_fading", "mac_superpose", "broadcast_to_source", "awgn"]


@dataclass(frozen=True)
class FadingRealization:
    """Per-relay gains for one frame (or a batch of frames along axis 0).

    ``h1[..., k]`` links S1 and relay k, ``h2[..., k]`` links S2 and relay k.
    The same gains are used in both directions.
    """

    h1: np.ndarray
    h2: np.ndarray
    noise_var: float

    def __post_init__(self) -> None:
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        if np.shape(self.h1) != np.shape(self.h2):
            raise ValueError("h1 and h2 must have the same shape")

    @property
    def relay_count(self) -> int:
        return np.shape(self.h1)[-1]

    def gain(self, source: int, k: int):
        if source == 1:
            return self.h1[..., k]
        if source == 2:
            return self.h2[..., k]
        raise ValueError(f"source must be 1 or 2, got {source}")


def draw_fading(stream, n_relays: int, noise_var: float, batch: int | None = None) -> FadingRealization:
    """Unit-variance Rayleigh gains h1, h2 for ``n_relays`` relays.

    With ``batch`` set, returns gains of shape ``(batch, n_relays)``.
    """
    if n_relays < 1:
        raise ValueError(f"n_relays must be >= 1, got {n_relays}")
    rng = stream.generator() if isinstance(stream, SeededStream) else stream
    shape = (n_relays,) if batch is None else (batch, n_relays)
    h1 = draw_complex_gaussian(rng, 1.0, shape)
    h2 = draw_complex_gaussian(rng, 1.0, shape)
    return FadingRealization(h1, h2, float(noise_var))


def awgn(stream, noise_var: float, shape) -> np.ndarray:
    """Complex AWGN of power ``noise_var``; zero noise_var gives zeros."""
    if noise_var == 0:
        return np.zeros(shape, dtype=complex)
    return draw_complex_gaussian(stream, noise_var, shape)


def mac_superpose(s1, s2, h1, h2, noise_var: float, stream=None) -> np.ndarray:
    """Relay observation h1*s1 + h2*s2 + n for whole frames.

    ``h1``/``h2`` broadcast against the frames' leading axes, so for a batch
    of frames pass gains of shape ``(batch, 1)``. ``stream`` may be None
    only when ``noise_var`` is 0.
    """
    s1 = np.asarray(s1)
    s2 = np.asarray(s2)
    if s1.shape != s2.shape:
        raise ValueError(f"frame length mismatch: {s1.shape} vs {s2.shape}")
    y = np.asarray(h1) * s1 + np.asarray(h2) * s2
    if noise_var:
        y = y + awgn(stream, noise_var, y.shape)
    return y


def broadcast_to_source(x_r, h, noise_var: float, stream=None) -> np.ndarray:
    """Source observation h * x_r + n of the relay's forwarded frame."""
    x_r = np.asarray(x_r)
    y = np.asarray(h) * x_r
    if noise_var:
        y = y + awgn(stream, noise_var, y.shape)
    return y
