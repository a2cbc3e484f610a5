"""Special functions, seeded random streams and fixed-node quadrature.

Everything here is pure. Random numbers come from :class:`SeededStream`,
a value object naming a position in a tree of counter-based (Philox)
generators, so any trial can be regenerated in isolation.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "SeededStream",
    "gaussian_q",
    "bessel_k0",
    "bessel_k1",
    "double_factorial_odd",
    "draw_complex_gaussian",
    "gauss_legendre",
    "integrate_fixed",
]

EULER_GAMMA = 0.57721566490153286061

# Series for small arguments, Steed's continued fraction above this point.
_BESSEL_SWITCH = 2.0


@dataclass(frozen=True)
class SeededStream:
    """Reproducible random stream addressed by ``(master_seed, path)``.

    Two streams with the same seed and path yield the same samples;
    streams with different paths are statistically independent.

    Examples
    --------
    >>> a = SeededStream(7).child(0, 3)
    >>> b = SeededStream(7, (0, 3))
    >>> a == b
    True
    >>> float(a.generator().random()) == float(b.generator().random())
    True
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if any(p < 0 for p in self.path):
            raise ValueError(f"path entries must be non-negative, got {self.path}")

    def child(self, *ids: int) -> "SeededStream":
        return SeededStream(self.master_seed, self.path + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


def gaussian_q(x):
    """Gaussian tail probability Q(x) = P(X > x) for X ~ N(0, 1).

    Accepts scalars or arrays.
    """
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def _check_positive(x: float, name: str) -> float:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"{name} requires a finite argument > 0, got {x}")
    return x


def _i0_k0_series(x: float) -> float:
    # K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
    q = 0.25 * x * x
    term = 1.0
    i0 = 1.0
    tail = 0.0
    harmonic = 0.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        tail += harmonic * term
        if term < 1e-18 * i0:
            break
    return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k1_series(x: float) -> float:
    # K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k (psi(k+1)+psi(k+2)) (x^2/4)^k / (k!(k+1)!)
    q = 0.25 * x * x
    term = 1.0  # (x^2/4)^k / (k! (k+1)!)
    psi_a = -EULER_GAMMA  # psi(k+1)
    psi_b = 1.0 - EULER_GAMMA  # psi(k+2)
    i1_sum = term
    digamma_sum = (psi_a + psi_b) * term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        psi_a += 1.0 / k
        psi_b += 1.0 / (k + 1)
        i1_sum += term
        digamma_sum += (psi_a + psi_b) * term
        if term < 1e-18 * i1_sum:
            break
    i1 = 0.5 * x * i1_sum
    return 1.0 / x + math.log(0.5 * x) * i1 - 0.25 * x * digamma_sum


def _k0_k1_steed(x: float) -> tuple[float, float]:
    """K0 and K1 for x >= 2 via Steed's continued fraction (Temme's CF2)."""
    a1 = 0.25
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 10_000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    else:  # pragma: no cover
        raise ArithmeticError(f"continued fraction failed to converge at x={x}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero."""
    x = _check_positive(x, "bessel_k0")
    if x <= _BESSEL_SWITCH:
        return _i0_k0_series(x)
    return _k0_k1_steed(x)[0]


def bessel_k1(x: float) -> float:
    """Modified Bessel function of the second kind, order one."""
    x = _check_positive(x, "bessel_k1")
    if x <= _BESSEL_SWITCH:
        return _k1_series(x)
    return _k0_k1_steed(x)[1]


def double_factorial_odd(n: int) -> int:
    """Return (2n-1)!! = 1 * 3 * ... * (2n-1).

    Raises ``OverflowError`` when the result cannot be represented as a
    finite double, since callers mix it with floating point factors.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    out = 1
    for k in range(1, int(n) + 1):
        out *= 2 * k - 1
    if out > sys.float_info.max:
        raise OverflowError(f"(2*{n}-1)!! exceeds the double range")
    return out


def draw_complex_gaussian(stream, variance: float, size=None):
    """Circularly symmetric complex Gaussian samples with E|z|^2 = variance.

    ``stream`` may be a :class:`SeededStream` or an already constructed
    ``numpy.random.Generator`` (used when several draws share one stream).
    """
    if not variance > 0:
        raise ValueError(f"variance must be > 0, got {variance}")
    rng = stream.generator() if isinstance(stream, SeededStream) else stream
    scale = math.sqrt(variance / 2.0)
    if size is None:
        re, im = rng.standard_normal(2)
        return complex(scale * re, scale * im)
    shape = (size,) if np.isscalar(size) else tuple(size)
    pairs = rng.standard_normal(shape + (2,))
    pairs *= scale
    return pairs.view(np.complex128)[..., 0]


@lru_cache(maxsize=32)
def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def integrate_fixed(f: Callable, a: float, b: float, nodes: int = 64) -> float:
    """Integrate ``f`` over [a, b] with an n-point Gauss-Legendre rule.

    ``f`` is called once with the array of nodes and must return an array
    of the same shape.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {nodes}")
    x, w = gauss_legendre(int(nodes))
    half = 0.5 * (b - a)
    t = half * x + 0.5 * (a + b)
    values = np.asarray(f(t), dtype=float)
    if values.shape != t.shape:
        values = np.broadcast_to(values, t.shape)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("integrand returned a non-finite value")
    return float(half * np.dot(w, values))
