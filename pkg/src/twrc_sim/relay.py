"""Conjugate amplify-and-forward with a blind amplification factor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RelayFrame", "exact_beta", "blind_beta", "amplify_conjugate", "relay_process"]


@dataclass(frozen=True)
class RelayFrame:
    observation: np.ndarray
    beta: np.ndarray | float
    forwarded: np.ndarray


def exact_beta(h1, h2, noise_var: float):
    """Amplification meeting the unit power constraint given full CSI.

    Only used as a reference; the relay itself never sees h1, h2 or N0.
    """
    if not noise_var > 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    return np.sqrt(1.0 / (np.abs(h1) ** 2 + np.abs(h2) ** 2 + noise_var))


def blind_beta(y_r):
    """sqrt(L / sum|y_r|^2): forwarded frame gets unit empirical power.

    Reduces over the last axis, so a batch of frames gives a batch of betas.
    """
    y_r = np.asarray(y_r)
    if y_r.shape[-1] < 1:
        raise ValueError("empty observation")
    energy = np.sum(np.abs(y_r) ** 2, axis=-1)
    if np.any(energy == 0):
        raise ZeroDivisionError("all-zero relay observation")
    out = np.sqrt(y_r.shape[-1] / energy)
    return float(out) if np.ndim(out) == 0 else out


def amplify_conjugate(y_r, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0):
        raise ValueError("beta must be > 0")
    y = np.conj(np.asarray(y_r))
    return beta[..., None] * y if beta.ndim else beta * y


def relay_process(y_r) -> RelayFrame:
    beta = blind_beta(y_r)
    return RelayFrame(np.asarray(y_r), beta, amplify_conjugate(y_r, beta))
