"""Readers for the versioned experiment CSVs (run traces and sweep tables).

These parse the files purely as documents: nothing here imports or
recomputes the optimization that produced them. Each reader checks the
one-line format marker first so foreign CSVs fail loudly and early.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError

TRACE_MARKER = "# dzoa-trace v1"
SWEEP_MARKER = "# dzoa-sweep v1"
_SWEEP_HEADER = (
    "method,epsilon,delta,epsilon_bar,mean_final_error,stderr_final_error,n_seeds"
)
_REQUIRED_META = ("method", "epsilon", "delta", "seed")
_REQUIRED_COLUMNS = ("m", "agent", "normalized_error")


def _read_lines(path: str) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _parse_trace(path: str) -> tuple[dict, np.ndarray, np.ndarray]:
    """(meta, m values, normalized errors) for one run trace.

    Trace rows repeat the round-level metrics once per agent; only the
    first agent's rows are kept, so the result has one entry per round.
    """
    lines = _read_lines(path)
    if not lines or lines[0].strip() != TRACE_MARKER:
        raise SchemaError(f"{path}: missing '{TRACE_MARKER}' marker")
    meta = None
    idx = 1
    while idx < len(lines) and lines[idx].startswith("#"):
        if lines[idx].startswith("# meta "):
            try:
                meta = json.loads(lines[idx][len("# meta "):])
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: malformed meta line: {exc}") from exc
        idx += 1
    if not isinstance(meta, dict):
        raise SchemaError(f"{path}: missing '# meta' line")
    missing = [key for key in _REQUIRED_META if key not in meta]
    if missing:
        raise SchemaError(f"{path}: meta lacks {missing}")
    if idx >= len(lines):
        raise SchemaError(f"{path}: no column header")
    columns = lines[idx].split(",")
    missing = [col for col in _REQUIRED_COLUMNS if col not in columns]
    if missing:
        raise SchemaError(f"{path}: columns lack {missing}")
    m_col, agent_col, err_col = (columns.index(c) for c in _REQUIRED_COLUMNS)

    m_vals: list[int] = []
    err_vals: list[float] = []
    lead_agent = None
    for line in lines[idx + 1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(columns):
            raise SchemaError(
                f"{path}: row has {len(cells)} cells, header has {len(columns)}"
            )
        if lead_agent is None:
            lead_agent = cells[agent_col]
        if cells[agent_col] != lead_agent:
            continue
        try:
            m_vals.append(int(float(cells[m_col])))
            err_vals.append(float(cells[err_col]))
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric cell: {exc}") from exc
    if not m_vals:
        raise SchemaError(f"{path}: no data rows")
    return meta, np.array(m_vals, dtype=int), np.array(err_vals, dtype=float)


@dataclass(frozen=True)
class TraceTable:
    """Long-form (m, method, epsilon, delta, seed, normalized_error) rows
    assembled from one or more run-trace CSVs."""

    m: np.ndarray
    method: tuple[str, ...]
    epsilon: np.ndarray
    delta: np.ndarray
    seed: np.ndarray
    normalized_error: np.ndarray

    def __len__(self) -> int:
        return int(self.m.shape[0])

    @classmethod
    def from_files(cls, paths) -> "TraceTable":
        paths = [str(p) for p in paths]
        if not paths:
            raise SchemaError("no input trace files")
        m_all, eps_all, delta_all, seed_all, err_all = [], [], [], [], []
        methods: list[str] = []
        for path in paths:
            meta, m, err = _parse_trace(path)
            n = m.shape[0]
            try:
                methods.extend([str(meta["method"])] * n)
                eps_all.append(np.full(n, float(meta["epsilon"])))
                delta_all.append(np.full(n, float(meta["delta"])))
                seed_all.append(np.full(n, int(meta["seed"]), dtype=int))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: non-numeric meta value: {exc}") from exc
            m_all.append(m)
            err_all.append(err)
        return cls(
            m=np.concatenate(m_all),
            method=tuple(methods),
            epsilon=np.concatenate(eps_all),
            delta=np.concatenate(delta_all),
            seed=np.concatenate(seed_all),
            normalized_error=np.concatenate(err_all),
        )


@dataclass(frozen=True)
class SweepTable:
    """One row per (method, epsilon, delta) aggregate of final errors."""

    method: tuple[str, ...]
    epsilon: np.ndarray
    delta: np.ndarray
    epsilon_bar: np.ndarray
    mean_final_error: np.ndarray
    stderr_final_error: np.ndarray
    n_seeds: np.ndarray

    def __len__(self) -> int:
        return int(self.epsilon.shape[0])

    @classmethod
    def from_file(cls, path) -> "SweepTable":
        path = str(path)
        lines = _read_lines(path)
        if not lines or lines[0].strip() != SWEEP_MARKER:
            raise SchemaError(f"{path}: missing '{SWEEP_MARKER}' marker")
        if len(lines) < 2 or lines[1] != _SWEEP_HEADER:
            raise SchemaError(f"{path}: header mismatch, expected '{_SWEEP_HEADER}'")
        rows = [line.split(",") for line in lines[2:] if line]
        if not rows:
            raise SchemaError(f"{path}: no data rows")
        width = len(_SWEEP_HEADER.split(","))
        if any(len(r) != width for r in rows):
            raise SchemaError(f"{path}: row width differs from header")
        try:
            return cls(
                method=tuple(r[0] for r in rows),
                epsilon=np.array([float(r[1]) for r in rows]),
                delta=np.array([float(r[2]) for r in rows]),
                epsilon_bar=np.array([float(r[3]) for r in rows]),
                mean_final_error=np.array([float(r[4]) for r in rows]),
                stderr_final_error=np.array([float(r[5]) for r in rows]),
                n_seeds=np.array([int(r[6]) for r in rows], dtype=int),
            )
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric cell: {exc}") from exc
