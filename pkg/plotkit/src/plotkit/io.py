"""Loaders for the simulator's text outputs.

Every loader checks the pieces it is about to use and raises SchemaError
naming the offending file and column, so a malformed sweep directory
fails loudly instead of producing an empty or misleading figure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPECTRUM_HEADER = "# energy,dP2_dE,dP1_dE"
SUMMARY_HEADER = ("# gamma0,P2,P1,neg_content,extent,duration,"
                  "l1_to_ref,l1_dP1_to_ref")
SPECTRUM_COLUMNS = ("energy", "dP2_dE", "dP1_dE")
SUMMARY_COLUMNS = tuple(SUMMARY_HEADER[2:].split(","))
LEDGER_COLUMNS = ("t", "norm2_psi", "trace_rho1", "p0", "residual")


class SchemaError(ValueError):
    """An input file does not match the documented format."""


@dataclass
class RunData:
    """One run directory: spectrum columns plus the metadata document."""
    path: Path
    gamma0: float
    energy: np.ndarray
    dP2_dE: np.ndarray
    dP1_dE: np.ndarray
    meta: dict


def load_spectrum(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc})") from exc
    if not lines or lines[0].strip() != SPECTRUM_HEADER:
        got = lines[0].strip() if lines else "<empty file>"
        raise SchemaError(
            f"{path}: expected header '{SPECTRUM_HEADER}', got '{got}'")
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(SPECTRUM_COLUMNS):
            raise SchemaError(
                f"{path}: line {k} has {len(parts)} fields, "
                f"expected columns {','.join(SPECTRUM_COLUMNS)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {k}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.asarray(rows)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def load_metadata(path: str | Path) -> dict:
    path = Path(path)
    try:
        meta = json.loads(path.read_text())
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("gamma0", "ledger"):
        if key not in meta:
            raise SchemaError(f"{path}: missing key '{key}'")
    for col in LEDGER_COLUMNS:
        if col not in meta["ledger"]:
            raise SchemaError(f"{path}: ledger missing column '{col}'")
    return meta


def load_run(run_dir: str | Path) -> RunData:
    run_dir = Path(run_dir)
    e, d2, d1 = load_spectrum(run_dir / "spectrum.txt")
    meta = load_metadata(run_dir / "metadata.json")
    return RunData(path=run_dir, gamma0=float(meta["gamma0"]),
                   energy=e, dP2_dE=d2, dP1_dE=d1, meta=meta)


def discover_runs(sweep_dir: str | Path) -> list[RunData]:
    """All run directories under sweep_dir, strongest absorber first."""
    sweep_dir = Path(sweep_dir)
    if not sweep_dir.is_dir():
        raise SchemaError(f"{sweep_dir}: not a directory")
    candidates = sorted(p for p in sweep_dir.iterdir()
                        if p.is_dir() and (p / "spectrum.txt").exists())
    if not candidates:
        raise SchemaError(
            f"{sweep_dir}: no run directories with spectrum.txt found")
    runs = [load_run(p) for p in candidates]
    runs.sort(key=lambda r: -r.gamma0)
    return runs


def load_summary(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc})") from exc
    if not lines or lines[0].strip() != SUMMARY_HEADER:
        got = lines[0].strip() if lines else "<empty file>"
        raise SchemaError(
            f"{path}: expected header '{SUMMARY_HEADER}', got '{got}'")
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue  # per-run failure notes are comments
        parts = line.split(",")
        if len(parts) != len(SUMMARY_COLUMNS):
            raise SchemaError(
                f"{path}: line {k} has {len(parts)} fields, "
                f"expected columns {','.join(SUMMARY_COLUMNS)}")
        rows.append([float(p) for p in parts])
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.asarray(rows)
    return {name: arr[:, j] for j, name in enumerate(SUMMARY_COLUMNS)}
