"""Monte Carlo sweep engine.

Trials are grouped in fixed-size blocks. Each block draws its randomness from
the stream ``(seed; n_relays, snr_index, block_index, role)``, so aggregate
counts do not depend on how blocks are scheduled across workers.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import analysis
from .channel import broadcast_to_source, draw_fading, mac_superpose
from .modem import Constellation, SymbolFrame, diff_encode, expected_diff_power
from .numerics import SeededStream
from .receiver import (
    blind_estimates,
    detect_frame_coherent,
    detect_frame_differential,
    detect_frame_genie,
)
from .relay import amplify_conjugate, blind_beta
from .selection import effective_snr_estimated, effective_snr_true, minmax_indices, optimal_indices

__all__ = [
    "DETECTORS",
    "SELECTIONS",
    "KNOWLEDGE",
    "CSV_HEADER",
    "SimConfig",
    "SerCurvePoint",
    "TrialCounts",
    "run_trial",
    "run_sweep",
    "emit_csv",
    "write_csv",
    "parse_csv",
]

log = logging.getLogger(__name__)

DETECTORS = ("differential", "genie", "coherent")
SELECTIONS = ("optimal", "minmax")
KNOWLEDGE = ("true", "estimated")

CSV_HEADER = (
    "snr_db",
    "n_relays",
    "scheme",
    "selection",
    "detector",
    "trials",
    "symbols",
    "errors_s1",
    "errors_s2",
    "ser",
    "analytic_ser",
)

# stream roles inside one block
_FADING, _INFO, _RELAY_NOISE, _S1_NOISE, _S2_NOISE, _PILOT = range(6)


@dataclass(frozen=True)
class SimConfig:
    modulation: int = 2
    rotation: bool = False
    theta: float | None = None
    frame_length: int = 100
    relays: tuple[int, ...] = (1, 2, 4, 8)
    snr_db: tuple[float, ...] = tuple(float(s) for s in range(0, 31, 5))
    trials: int = 10_000
    detector: str = "differential"
    selection: str = "minmax"
    selection_knowledge: str = "true"
    pilot_length: int | None = None
    seed: int = 0
    workers: int = 1
    block_size: int = 500
    analytic: bool = False
    mod_constant: float | None = None
    scheme: str | None = None
    min_errors: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "relays", tuple(int(n) for n in self.relays))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        self.validate()

    def validate(self) -> None:
        if self.frame_length < 2:
            raise ValueError(f"frame_length must be >= 2, got {self.frame_length}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.block_size < 1 or self.workers < 1:
            raise ValueError("block_size and workers must be >= 1")
        if self.min_errors < 0:
            raise ValueError(f"min_errors must be >= 0, got {self.min_errors}")
        if not self.relays or min(self.relays) < 1:
            raise ValueError(f"relay counts must be >= 1, got {self.relays}")
        if not self.snr_db:
            raise ValueError("empty SNR grid")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        if self.selection_knowledge not in KNOWLEDGE:
            raise ValueError(f"selection-knowledge must be one of {KNOWLEDGE}, got {self.selection_knowledge!r}")
        if self.pilot_length is not None and self.pilot_length < 2:
            raise ValueError(f"pilot_length must be >= 2, got {self.pilot_length}")
        if self.scheme is not None and ("," in self.scheme or "\n" in self.scheme):
            raise ValueError("scheme label may not contain commas or newlines")
        Constellation(self.modulation, self.rotation_angle)

    @property
    def rotation_angle(self) -> float:
        if not self.rotation:
            return 0.0
        return math.pi / self.modulation if self.theta is None else float(self.theta)

    @property
    def cons1(self) -> Constellation:
        return Constellation(self.modulation)

    @property
    def cons2(self) -> Constellation:
        return Constellation(self.modulation, self.rotation_angle)

    @property
    def pilots(self) -> int:
        return self.frame_length if self.pilot_length is None else self.pilot_length

    @property
    def scheme_label(self) -> str:
        if self.scheme:
            return self.scheme
        label = f"{self.detector}-{self.selection}"
        if self.selection_knowledge == "estimated":
            label += "-est"
        if self.rotation:
            label += "-rot"
        return label

    @property
    def analytic_constant(self) -> float:
        if self.mod_constant is not None:
            return float(self.mod_constant)
        return analysis.default_mod_constant(self.modulation)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SerCurvePoint:
    snr_db: float
    n_relays: int
    scheme: str
    selection: str
    detector: str
    trials: int
    symbols: int
    errors_s1: int
    errors_s2: int
    ser: float
    analytic_ser: float | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.errors_s1 <= self.symbols and 0 <= self.errors_s2 <= self.symbols):
            raise ValueError("error counts must lie in [0, symbols]")
        if not 0.0 <= self.ser <= 1.0:
            raise ValueError(f"ser out of range: {self.ser}")

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``ser``, using one source's symbol count."""
        if self.symbols == 0:
            return 0.0
        return math.sqrt(self.ser * (1.0 - self.ser) / self.symbols)

    def half_width(self, z: float = 1.96) -> float:
        """Normal-approximation confidence half-width."""
        return z * self.sigma


@dataclass
class TrialCounts:
    trials: int = 0
    symbols: int = 0
    errors_s1: int = 0
    errors_s2: int = 0

    def __iadd__(self, other: "TrialCounts") -> "TrialCounts":
        self.trials += other.trials
        self.symbols += other.symbols
        self.errors_s1 += other.errors_s1
        self.errors_s2 += other.errors_s2
        return self

    @property
    def ser(self) -> float:
        if self.symbols == 0:
            return 0.0
        return 0.5 * (self.errors_s1 + self.errors_s2) / self.symbols


def snr_to_noise_var(snr_db: float) -> float:
    """Transmit powers are 1, so SNR = 1/N0."""
    return 10.0 ** (-snr_db / 10.0)


def _pilot_selection(config: SimConfig, fading, noise_var: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """S1's blind effective-SNR estimates from a pilot round through every relay.

    Both sources send one differential pilot frame heard by all relays; each
    relay forwards in its own orthogonal slot.
    """
    cons1, cons2 = config.cons1, config.cons2
    m = config.modulation
    batch, n = fading.h1.shape
    p = config.pilots
    c1 = cons1.points[rng.integers(0, m, (batch, p))]
    c2 = cons2.points[rng.integers(0, m, (batch, p))]
    f1 = diff_encode(c1)
    f2 = diff_encode(c2)
    y_r = mac_superpose(f1.diff_symbols[:, None, :], f2.diff_symbols[:, None, :],
                        fading.h1[..., None], fading.h2[..., None], noise_var, rng)
    x_r = amplify_conjugate(y_r, blind_beta(y_r))
    y1 = broadcast_to_source(x_r, fading.h1[..., None], noise_var, rng)
    own = SymbolFrame(c1[:, None, :], f1.diff_symbols[:, None, :])
    est = blind_estimates(y1, own, expected_diff_power(cons1, cons2))
    g1 = effective_snr_estimated(est.mu_hat, est.nu_sq_hat, noise_var, 1)
    g2 = effective_snr_estimated(est.mu_hat, est.nu_sq_hat, noise_var, 2)
    return g1, g2


def select_relays(config: SimConfig, fading, noise_var: float, stream: SeededStream) -> np.ndarray:
    """0-based index of the selected relay for every trial in the batch."""
    if fading.relay_count == 1:
        return np.zeros(fading.h1.shape[0], dtype=int)
    if config.selection_knowledge == "true":
        g1 = effective_snr_true(fading.h1, fading.h2, noise_var, 1)
        g2 = effective_snr_true(fading.h1, fading.h2, noise_var, 2)
    else:
        g1, g2 = _pilot_selection(config, fading, noise_var, stream.child(_PILOT).generator())
    if config.selection == "optimal":
        return optimal_indices(g1, g2, config.modulation)
    return minmax_indices(g1, g2)


def run_trial(config: SimConfig, n_relays: int, noise_var: float, stream: SeededStream, batch: int = 1) -> TrialCounts:
    """Simulate ``batch`` independent frame exchanges and count symbol errors.

    Errors at S1 are on S2's symbols and vice versa.
    """
    cons1, cons2 = config.cons1, config.cons2
    m, length = config.modulation, config.frame_length
    fading = draw_fading(stream.child(_FADING), n_relays, noise_var, batch)
    chosen = select_relays(config, fading, noise_var, stream)
    rows = np.arange(batch)
    h1 = fading.h1[rows, chosen]
    h2 = fading.h2[rows, chosen]

    info_rng = stream.child(_INFO).generator()
    idx1 = info_rng.integers(0, m, (batch, length))
    idx2 = info_rng.integers(0, m, (batch, length))
    c1 = cons1.points[idx1]
    c2 = cons2.points[idx2]
    if config.detector == "coherent":
        ones = np.ones((batch, 1), dtype=complex)
        f1 = SymbolFrame(c1, np.concatenate([ones, c1], axis=1))
        f2 = SymbolFrame(c2, np.concatenate([ones, c2], axis=1))
    else:
        f1 = diff_encode(c1)
        f2 = diff_encode(c2)

    y_r = mac_superpose(f1.diff_symbols, f2.diff_symbols, h1[:, None], h2[:, None], noise_var,
                        stream.child(_RELAY_NOISE).generator())
    beta = blind_beta(y_r)
    x_r = amplify_conjugate(y_r, beta)
    y1 = broadcast_to_source(x_r, h1[:, None], noise_var, stream.child(_S1_NOISE).generator())
    y2 = broadcast_to_source(x_r, h2[:, None], noise_var, stream.child(_S2_NOISE).generator())

    if config.detector == "differential":
        diff_power = expected_diff_power(cons1, cons2)
        hat2 = detect_frame_differential(y1, f1, cons2, diff_power)
        hat1 = detect_frame_differential(y2, f2, cons1, diff_power)
    elif config.detector == "genie":
        hat2 = detect_frame_genie(y1, f1, cons2, beta * np.abs(h1) ** 2)
        hat1 = detect_frame_genie(y2, f2, cons1, beta * np.abs(h2) ** 2)
    else:
        hat2 = detect_frame_coherent(y1[:, 1:], c1, cons2, h1, h2, beta)
        hat1 = detect_frame_coherent(y2[:, 1:], c2, cons1, h2, h1, beta)

    return TrialCounts(
        trials=batch,
        symbols=batch * length,
        errors_s1=int(np.count_nonzero(hat2 != idx2)),
        errors_s2=int(np.count_nonzero(hat1 != idx1)),
    )


def _blocks(config: SimConfig) -> list[tuple[int, int]]:
    """(block_index, trials_in_block) covering ``config.trials``."""
    out = []
    remaining, b = config.trials, 0
    while remaining > 0:
        size = min(config.block_size, remaining)
        out.append((b, size))
        remaining -= size
        b += 1
    return out


def _run_block(args) -> tuple[int, int, TrialCounts]:
    config, n_relays, snr_index, block_index, size = args
    noise_var = snr_to_noise_var(config.snr_db[snr_index])
    stream = SeededStream(config.seed, (n_relays, snr_index, block_index))
    return n_relays, snr_index, run_trial(config, n_relays, noise_var, stream, size)


def _point_jobs(config: SimConfig, n: int, si: int) -> list:
    return [(config, n, si, b, size) for b, size in _blocks(config)]


def _accumulate(config: SimConfig, results: Iterable[tuple[int, int, TrialCounts]]) -> TrialCounts:
    """Sum block counts in block order, stopping once ``min_errors`` is reached.

    The stopping decision only looks at the ordered prefix, so it does not
    depend on how many blocks were evaluated concurrently.
    """
    total = TrialCounts()
    for _, _, counts in results:
        total += counts
        if config.min_errors and total.errors_s1 + total.errors_s2 >= config.min_errors:
            break
    return total


def _run_point_parallel(pool: ProcessPoolExecutor, config: SimConfig, jobs: list) -> TrialCounts:
    wave = 2 * config.workers

    def ordered():
        for start in range(0, len(jobs), wave):
            yield from pool.map(_run_block, jobs[start:start + wave])

    return _accumulate(config, ordered())


def run_sweep(config: SimConfig) -> list[SerCurvePoint]:
    """One SER point per (relay count, SNR) of the configured scheme."""
    keys = [(n, si) for n in config.relays for si in range(len(config.snr_db))]
    totals: dict[tuple[int, int], TrialCounts] = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for n, si in keys:
                jobs = _point_jobs(config, n, si)
                if config.min_errors:
                    totals[n, si] = _run_point_parallel(pool, config, jobs)
                else:
                    totals[n, si] = _accumulate(config, pool.map(_run_block, jobs))
    else:
        for n, si in keys:
            totals[n, si] = _accumulate(config, map(_run_block, _point_jobs(config, n, si)))

    points = []
    for n in config.relays:
        for si, snr in enumerate(config.snr_db):
            t = totals[n, si]
            analytic = None
            if config.analytic:
                analytic = analysis.asymptotic_ser(n, snr_to_noise_var(snr), config.analytic_constant)
            points.append(SerCurvePoint(
                snr_db=snr,
                n_relays=n,
                scheme=config.scheme_label,
                selection=config.selection,
                detector=config.detector,
                trials=t.trials,
                symbols=t.symbols,
                errors_s1=t.errors_s1,
                errors_s2=t.errors_s2,
                ser=t.ser,
                analytic_ser=analytic,
            ))
            log.info("N=%d snr=%.2f dB ser=%.3e", n, snr, t.ser)
    return points


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(points: Sequence[SerCurvePoint], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([_fmt(getattr(p, name)) for name in CSV_HEADER])


def emit_csv(points: Sequence[SerCurvePoint], path, force: bool = False) -> Path:
    """Write ``points`` to ``path``; refuses to overwrite unless ``force``."""
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            write_csv(points, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def parse_csv(path) -> list[SerCurvePoint]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header in {path}: {header}")
        points = []
        for row in reader:
            rec = dict(zip(CSV_HEADER, row))
            points.append(SerCurvePoint(
                snr_db=float(rec["snr_db"]),
                n_relays=int(rec["n_relays"]),
                scheme=rec["scheme"],
                selection=rec["selection"],
                detector=rec["detector"],
                trials=int(rec["trials"]),
                symbols=int(rec["symbols"]),
                errors_s1=int(rec["errors_s1"]),
                errors_s2=int(rec["errors_s2"]),
                ser=float(rec["ser"]),
                analytic_ser=float(rec["analytic_ser"]) if rec["analytic_ser"] else None,
            ))
    return points
