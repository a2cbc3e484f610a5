"""``twrc-sim`` command line.

Configuration files are flat ``key = value`` text; every key has a CLI flag
of the same name that overrides it::

    # fig2.cfg
    relays = 2,4
    snr-db = 0:25:5
    selection = optimal
    trials = 20000

    $ twrc-sim run --config fig2.cfg --selection minmax --out minmax.csv
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .engine import DETECTORS, KNOWLEDGE, SELECTIONS, SimConfig, emit_csv, run_sweep, write_csv

_BOOL_WORDS = {"on": True, "true": True, "yes": True, "1": True, "off": False, "false": False, "no": False, "0": False}


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected on/off, got {text!r}") from None


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """``a:b:step`` (inclusive of b) or a comma separated list."""
    text = text.strip()
    if ":" in text:
        try:
            a, b, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad SNR range {text!r}, expected a:b:step") from None
        if step <= 0 or b < a:
            raise ConfigError(f"bad SNR range {text!r}")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return tuple(float(round(a + i * step, 10)) for i in range(count))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad SNR list {text!r}") from None


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "none", "default") else float(text)


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none", "default") else int(text)


# config key -> (SimConfig field, parser)
KEYS = {
    "modulation": ("modulation", int),
    "rotation": ("rotation", _parse_bool),
    "theta": ("theta", _optional_float),
    "frame-length": ("frame_length", int),
    "relays": ("relays", _parse_int_list),
    "snr-db": ("snr_db", parse_snr_grid),
    "trials": ("trials", int),
    "detector": ("detector", str),
    "selection": ("selection", str),
    "selection-knowledge": ("selection_knowledge", str),
    "pilot-length": ("pilot_length", _optional_int),
    "seed": ("seed", int),
    "workers": ("workers", int),
    "block-size": ("block_size", int),
    "min-errors": ("min_errors", int),
    "analytic": ("analytic", _parse_bool),
    "mod-constant": ("mod_constant", _optional_float),
    "scheme": ("scheme", str),
}
# keys that are not SimConfig fields
RUN_KEYS = {"out": str, "force": _parse_bool}


def read_config_file(path) -> dict[str, str]:
    """Raw ``key -> value`` strings; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("_", "-")
            if key not in KEYS and key not in RUN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_config(raw: dict[str, str]) -> tuple[SimConfig, dict]:
    fields = {}
    extras = {"out": None, "force": False}
    for key, value in raw.items():
        try:
            if key in RUN_KEYS:
                extras[key] = RUN_KEYS[key](value)
            else:
                name, conv = KEYS[key]
                fields[name] = conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    try:
        return SimConfig(**fields), extras
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twrc-sim", description="Two-way relay differential ANC SER simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a Monte Carlo SER sweep and write CSV")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--snr-db", help="a:b:step (inclusive) or comma list")
    run.add_argument("--relays", help="comma separated relay counts, e.g. 1,2,4,8")
    run.add_argument("--detector", choices=DETECTORS)
    run.add_argument("--selection", choices=SELECTIONS)
    run.add_argument("--selection-knowledge", choices=KNOWLEDGE)
    run.add_argument("--rotation", choices=("on", "off"))
    run.add_argument("--theta")
    run.add_argument("--modulation")
    run.add_argument("--frame-length")
    run.add_argument("--pilot-length")
    run.add_argument("--trials")
    run.add_argument("--min-errors")
    run.add_argument("--seed")
    run.add_argument("--workers")
    run.add_argument("--block-size")
    run.add_argument("--mod-constant")
    run.add_argument("--scheme")
    run.add_argument("--analytic", action="store_const", const="on", default=None)
    run.add_argument("--out", help="output CSV path (stdout if omitted)")
    run.add_argument("--force", action="store_const", const="on", default=None, help="overwrite an existing output")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        raw = read_config_file(args.config) if args.config else {}
        for key in list(KEYS) + list(RUN_KEYS):
            value = getattr(args, key.replace("-", "_"), None)
            if value is not None:
                raw[key] = value
        config, extras = build_config(raw)
        points = run_sweep(config)
        if extras["out"]:
            emit_csv(points, extras["out"], force=extras["force"])
        else:
            write_csv(points, sys.stdout)
    except (ConfigError, FileExistsError) as exc:
        print(f"twrc-sim: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"twrc-sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
