"""Source-side processing of the relayed frame.

Written from S1's point of view: the observation is modelled as
``y(t) = mu * conj(s_own(t)) + nu * conj(s_other(t)) + w(t)``. S2 calls the
same functions with the roles of the two sources swapped.

All functions reduce over the last axis, so a stack of frames with shape
``(batch, L + 1)`` is processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modem import Constellation, SymbolFrame, linear_detect_indices

__all__ = [
    "BlindEstimates",
    "estimate_power_sum",
    "estimate_nu_sq",
    "estimate_mu",
    "blind_estimates",
    "cancel_self_interference",
    "detect_frame_differential",
    "detect_frame_genie",
    "detect_frame_coherent",
]


@dataclass(frozen=True)
class BlindEstimates:
    mu_hat: np.ndarray | float
    nu_sq_hat: np.ndarray | float
    theta_stat: np.ndarray | float
    power_sum: np.ndarray | float


def estimate_power_sum(y1):
    """Mean received power, an estimate of mu^2 + |nu|^2."""
    y1 = np.asarray(y1)
    if y1.shape[-1] < 1:
        raise ValueError("empty observation")
    out = np.mean(np.abs(y1) ** 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def estimate_nu_sq(y1, own_info, diff_power: float):
    """Estimate |nu|^2 from the self-cancelling differences.

    ``own_info`` are the receiver's own information symbols c(1..n-1) for an
    observation of n samples. Each difference
    ``conj(c(t)) * y(t-1) - y(t)`` removes the own-signal term exactly, leaving
    ``nu * conj(s_other(t-1)) * conj(c_own(t) - c_other(t))`` plus noise.
    """
    if not diff_power > 0:
        raise ValueError(f"diff_power must be > 0, got {diff_power}")
    y1 = np.asarray(y1)
    own_info = np.asarray(own_info)
    n_diff = y1.shape[-1] - 1
    if n_diff < 1:
        raise ValueError("need at least two observed samples")
    if own_info.shape[-1] != n_diff:
        raise ValueError(f"expected {n_diff} own symbols, got {own_info.shape[-1]}")
    y_tilde = np.conj(own_info) * y1[..., :-1] - y1[..., 1:]
    out = np.sum(np.abs(y_tilde) ** 2, axis=-1) / (n_diff * diff_power)
    return float(out) if np.ndim(out) == 0 else out


def estimate_mu(power_sum, nu_sq):
    """sqrt((power_sum - nu_sq)_+): the difference estimates mu squared."""
    theta = np.asarray(power_sum) - np.asarray(nu_sq)
    out = np.sqrt(np.maximum(theta, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def blind_estimates(y1, own: SymbolFrame, diff_power: float) -> BlindEstimates:
    power_sum = estimate_power_sum(y1)
    nu_sq = estimate_nu_sq(y1, own.info_symbols, diff_power)
    theta = np.asarray(power_sum) - np.asarray(nu_sq)
    mu = estimate_mu(power_sum, nu_sq)
    if np.ndim(theta) == 0:
        theta = float(theta)
    return BlindEstimates(mu_hat=mu, nu_sq_hat=nu_sq, theta_stat=theta, power_sum=power_sum)


def cancel_self_interference(y1, own_diff, mu_hat) -> np.ndarray:
    """Remove mu * conj(s_own(t)) from the observation."""
    y1 = np.asarray(y1)
    own_diff = np.asarray(own_diff)
    if y1.shape != own_diff.shape:
        raise ValueError(f"shape mismatch: {y1.shape} vs {own_diff.shape}")
    mu = np.asarray(mu_hat, dtype=float)
    if mu.ndim:
        mu = mu[..., None]
    return y1 - mu * np.conj(own_diff)


def _detect_residual(residual, cons: Constellation) -> np.ndarray:
    return linear_detect_indices(residual[..., :-1], residual[..., 1:], cons)


def detect_frame_differential(y1, own: SymbolFrame, cons_other: Constellation, diff_power: float) -> np.ndarray:
    """Blind differential detection of the other source's L symbols.

    Returns constellation indices, one per information symbol.
    """
    if np.shape(y1)[-1] < 2:
        raise ValueError("need at least two observed samples")
    est = blind_estimates(y1, own, diff_power)
    residual = cancel_self_interference(y1, own.diff_symbols, est.mu_hat)
    return _detect_residual(residual, cons_other)


def detect_frame_genie(y1, own: SymbolFrame, cons_other: Constellation, true_mu) -> np.ndarray:
    """As :func:`detect_frame_differential` but cancelling with the true mu."""
    residual = cancel_self_interference(y1, own.diff_symbols, true_mu)
    return _detect_residual(residual, cons_other)


def detect_frame_coherent(y1, own_symbols, cons_other: Constellation, h_own, h_other, beta) -> np.ndarray:
    """Full-CSI ML detection for plain (non-differential) M-PSK frames.

    The known own-signal term ``beta |h_own|^2 conj(s_own)`` is removed and the
    other source's symbol is picked by maximising
    ``Re{conj(nu) * residual * c}`` with ``nu = beta * h_own * conj(h_other)``.
    """
    y1 = np.asarray(y1)
    h_own = np.asarray(h_own)
    h_other = np.asarray(h_other)
    beta = np.asarray(beta, dtype=float)
    mu = beta * np.abs(h_own) ** 2
    nu = beta * h_own * np.conj(h_other)
    if mu.ndim:
        mu = mu[..., None]
        nu = nu[..., None]
    residual = y1 - mu * np.conj(np.asarray(own_symbols))
    metric = np.real((np.conj(nu) * residual)[..., None] * cons_other.points)
    return np.argmax(metric, axis=-1)
