"""Per-relay effective SNRs and the two single-relay selection rules."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .numerics import gauss_legendre, integrate_fixed

__all__ = [
    "Criterion",
    "Knowledge",
    "EffectiveSnrPair",
    "SelectionDecision",
    "effective_snr_true",
    "effective_snr_estimated",
    "conditional_ser_mpsk",
    "log_conditional_ser_mpsk",
    "optimal_indices",
    "minmax_indices",
    "select_optimal",
    "select_minmax",
]

QUADRATURE_NODES = 64


class Criterion(str, enum.Enum):
    OPTIMAL = "optimal-sum-ser"
    MINMAX = "min-max"


class Knowledge(str, enum.Enum):
    TRUE = "true-channel"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class EffectiveSnrPair:
    gamma1: float
    gamma2: float

    def __post_init__(self) -> None:
        for g in (self.gamma1, self.gamma2):
            if not (math.isfinite(g) and g >= 0):
                raise ValueError(f"effective SNR must be finite and >= 0, got {g}")


@dataclass(frozen=True)
class SelectionDecision:
    relay_index: int  # 1-based
    criterion: Criterion
    knowledge: Knowledge = Knowledge.TRUE


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)
    return float(out) if out.ndim == 0 else out


def effective_snr_true(h1, h2, noise_var: float, at_source: int):
    """Effective SNR from the true gains, second-order noise term dropped.

    With psi_r = 1/(2 N0) and psi_s = 1/(4 N0), S1 sees
    psi_r psi_s |h1|^2 |h2|^2 / (psi_r |h1|^2 + psi_s |h2|^2); S2 swaps the
    roles of the two gains in the denominator.
    """
    if not noise_var > 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    a = np.abs(h1) ** 2
    b = np.abs(h2) ** 2
    psi_r = 1.0 / (2.0 * noise_var)
    psi_s = 1.0 / (4.0 * noise_var)
    if at_source == 1:
        den = psi_r * a + psi_s * b
    elif at_source == 2:
        den = psi_r * b + psi_s * a
    else:
        raise ValueError(f"at_source must be 1 or 2, got {at_source}")
    return _safe_ratio(psi_r * psi_s * a * b, den)


def effective_snr_estimated(mu_hat, nu_sq_hat, noise_var: float, at_source: int):
    """Effective SNR computed by S1 from its blind mu and |nu|^2 estimates."""
    if not noise_var > 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    mu2 = np.asarray(mu_hat, dtype=float) ** 2
    nu2 = np.asarray(nu_sq_hat, dtype=float)
    if at_source == 1:
        first = 2.0 * mu2 + nu2
    elif at_source == 2:
        first = 2.0 * nu2 + mu2
    else:
        raise ValueError(f"at_source must be 1 or 2, got {at_source}")
    return _safe_ratio(mu2 * mu2 * nu2, 2.0 * first * (mu2 + nu2) * noise_var)


def _ser_nodes(order: int, nodes: int):
    upper = (order - 1) * math.pi / order
    x, w = gauss_legendre(nodes)
    theta = 0.5 * upper * (x + 1.0)
    weights = 0.5 * upper * w / math.pi
    return theta, weights


def conditional_ser_mpsk(gamma, order: int, nodes: int = QUADRATURE_NODES):
    """M-PSK symbol error probability at effective SNR ``gamma`` (Craig form).

    (1/pi) * int_0^{(M-1)pi/M} exp(-sin^2(pi/M) gamma / sin^2(theta)) dtheta
    """
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    g_psk = math.sin(math.pi / order) ** 2
    upper = (order - 1) * math.pi / order
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be >= 0")
    if gamma.ndim == 0:
        g = float(gamma)
        return integrate_fixed(lambda t: np.exp(-g_psk * g / np.sin(t) ** 2), 0.0, upper, nodes) / math.pi
    theta, weights = _ser_nodes(order, nodes)
    expo = np.exp(-g_psk * gamma[..., None] / np.sin(theta) ** 2)
    return expo @ weights


def log_conditional_ser_mpsk(gamma, order: int, nodes: int = QUADRATURE_NODES):
    """Natural log of :func:`conditional_ser_mpsk`, safe where the SER underflows."""
    g_psk = math.sin(math.pi / order) ** 2
    theta, weights = _ser_nodes(order, nodes)
    gamma = np.asarray(gamma, dtype=float)
    expo = -g_psk * gamma[..., None] / np.sin(theta) ** 2 + np.log(weights)
    out = logsumexp(expo, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def optimal_indices(gamma1, gamma2, order: int) -> np.ndarray:
    """0-based argmin over the last axis of SER1 + SER2 (lowest index on ties)."""
    total = np.logaddexp(log_conditional_ser_mpsk(gamma1, order), log_conditional_ser_mpsk(gamma2, order))
    return np.argmin(total, axis=-1)


def minmax_indices(gamma1, gamma2) -> np.ndarray:
    """0-based argmax over the last axis of min(gamma1, gamma2)."""
    return np.argmax(np.minimum(gamma1, gamma2), axis=-1)


def _unpack(pairs: Sequence[EffectiveSnrPair]):
    if len(pairs) == 0:
        raise ValueError("no candidate relays")
    g1 = np.array([p.gamma1 for p in pairs], dtype=float)
    g2 = np.array([p.gamma2 for p in pairs], dtype=float)
    return g1, g2


def select_optimal(pairs: Sequence[EffectiveSnrPair], order: int, knowledge: Knowledge = Knowledge.TRUE) -> SelectionDecision:
    g1, g2 = _unpack(pairs)
    return SelectionDecision(int(optimal_indices(g1, g2, order)) + 1, Criterion.OPTIMAL, knowledge)


def select_minmax(pairs: Sequence[EffectiveSnrPair], knowledge: Knowledge = Knowledge.TRUE) -> SelectionDecision:
    g1, g2 = _unpack(pairs)
    return SelectionDecision(int(minmax_indices(g1, g2)) + 1, Criterion.MINMAX, knowledge)
