"""Gradient-magnitude landscapes over (target probability, predictive entropy).

A grid point (p, H) is realized by a spike-plus-tail distribution: mass p on
the target, and the remaining mass split between a secondary spike and a
uniform tail, with the mixing weight found by bisection on the Shannon
entropy. Cells whose entropy is unattainable for their p are left absent.
Grids normalize to their own maximum (per-grid, recorded in the JSON
metadata), and ``emit`` writes byte-deterministic CSV/JSON artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core_math import DomainError, shannon_entropy
from .objectives import ObjectiveKind, gate
from .trainer import RunRecord
from .verification import PropertyReport

_BISECTION_TOL = 1e-6
_BISECTION_MAX_ITERS = 200


class FeasibilityError(DomainError):
    """The requested (probability, entropy) pair is not attainable."""


@dataclass
class LandscapeGrid:
    """Normalized learning-signal magnitudes; NaN cells are infeasible."""

    p_grid: np.ndarray
    h_grid: np.ndarray
    cells: np.ndarray
    vocab_size: int
    objective: str


def _family_dist(p: float, mix: float, vocab: int) -> np.ndarray:
    """Spike-plus-tail member: target p, secondary spike fading into a uniform tail."""
    tail_mass = 1.0 - p
    dist = np.empty(vocab)
    dist[0] = p
    share = tail_mass * mix / (vocab - 1)
    dist[1] = tail_mass * (1.0 - mix) + share
    dist[2:] = share
    return dist


def feasible_entropy_range(p: float, vocab: int) -> tuple[float, float]:
    """Attainable Shannon-entropy interval for target mass p in this family."""
    if vocab < 3:
        raise DomainError(f"vocabulary must have >= 3 tokens, got {vocab}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"target probability must lie in (0, 1), got {p!r}")
    low = shannon_entropy(_family_dist(p, 0.0, vocab))
    high = shannon_entropy(_family_dist(p, 1.0, vocab))
    return low, high


def construct_distribution(p: float, entropy: float, vocab: int) -> np.ndarray:
    """Distribution with target entry exactly p and Shannon entropy ~ ``entropy``.

    Bisects the spike-to-tail mixing weight (entropy is strictly increasing in
    it) to tolerance 1e-6 within 200 iterations. Raises FeasibilityError,
    naming the attainable interval, when the pair cannot be realized.
    """
    low, high = feasible_entropy_range(p, vocab)
    if entropy < low - _BISECTION_TOL or entropy > high + _BISECTION_TOL:
        raise FeasibilityError(
            f"entropy {entropy!r} unattainable for p={p!r}, vocab={vocab}: "
            f"feasible interval is [{low:.6f}, {high:.6f}]"
        )
    target = min(max(entropy, low), high)
    if target == low:
        return _family_dist(p, 0.0, vocab)
    if target == high:
        return _family_dist(p, 1.0, vocab)
    lo, hi = 0.0, 1.0
    dist = _family_dist(p, 0.5, vocab)
    for _ in range(_BISECTION_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        dist = _family_dist(p, mid, vocab)
        value = shannon_entropy(dist)
        if abs(value - target) <= _BISECTION_TOL * 0.5:
            return dist
        if value < target:
            lo = mid
        else:
            hi = mid
    return dist


def gradient_landscape(kind: ObjectiveKind, p_grid, h_grid, vocab: int) -> LandscapeGrid:
    """Learning-signal magnitude at each feasible (p, H) cell, grid-normalized."""
    p_grid = np.asarray(p_grid, dtype=np.float64)
    h_grid = np.asarray(h_grid, dtype=np.float64)
    if p_grid.ndim != 1 or p_grid.size == 0 or (p_grid.size > 1 and np.any(np.diff(p_grid) <= 0.0)):
        raise DomainError("p grid must be a nonempty ascending vector")
    if h_grid.ndim != 1 or h_grid.size == 0 or (h_grid.size > 1 and np.any(np.diff(h_grid) <= 0.0)):
        raise DomainError("entropy grid must be a nonempty ascending vector")
    if np.any(p_grid <= 0.0) or np.any(p_grid >= 1.0):
        raise DomainError("p grid values must lie strictly inside (0, 1)")

    cells = np.full((p_grid.size, h_grid.size), np.nan)
    for i, p in enumerate(p_grid):
        low, high = feasible_entropy_range(float(p), vocab)
        for j, entropy in enumerate(h_grid):
            if entropy < low - _BISECTION_TOL or entropy > high + _BISECTION_TOL:
                continue
            dist = construct_distribution(float(p), float(entropy), vocab)
            cells[i, j] = gate(kind, dist, 0).signal
    finite = cells[np.isfinite(cells)]
    if finite.size and finite.max() > 0.0:
        cells = cells / finite.max()
    return LandscapeGrid(
        p_grid=p_grid, h_grid=h_grid, cells=cells, vocab_size=vocab, objective=kind.encode()
    )


Artifact = Union[LandscapeGrid, RunRecord, Sequence[PropertyReport]]


def _grid_rows(grid: LandscapeGrid):
    for i, p in enumerate(grid.p_grid):
        for j, entropy in enumerate(grid.h_grid):
            value = grid.cells[i, j]
            if np.isfinite(value):
                yield float(p), float(entropy), float(value)


def _grid_to_dict(grid: LandscapeGrid) -> dict:
    cells = [[None if not np.isfinite(v) else float(v) for v in row] for row in grid.cells]
    return {
        "objective": grid.objective,
        "vocab_size": grid.vocab_size,
        "normalization": "per-grid",
        "p_grid": [float(p) for p in grid.p_grid],
        "h_grid": [float(h) for h in grid.h_grid],
        "cells": cells,
    }


def emit(artifact: Artifact, path, fmt: str = "csv") -> None:
    """Write an artifact to disk; identical inputs produce identical bytes.

    CSV applies to landscape grids only: header ``p,entropy,magnitude``, one
    row per feasible cell sorted by (p, entropy), 9 significant digits, LF
    line endings. JSON applies to grids, run records, and property-report
    lists, using each record's documented schema.
    """
    if fmt == "csv":
        if not isinstance(artifact, LandscapeGrid):
            raise DomainError("csv output is defined for landscape grids only")
        lines = ["p,entropy,magnitude"]
        lines.extend(f"{p:.9g},{h:.9g},{m:.9g}" for p, h, m in _grid_rows(artifact))
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        if isinstance(artifact, LandscapeGrid):
            body = _grid_to_dict(artifact)
        elif isinstance(artifact, RunRecord):
            body = artifact.to_dict()
        elif isinstance(artifact, Sequence) and all(
            isinstance(item, PropertyReport) for item in artifact
        ):
            body = [item.to_dict() for item in artifact]
        else:
            raise DomainError(f"cannot serialize {type(artifact).__name__} to json")
        payload = json.dumps(body, indent=2) + "\n"
    else:
        raise DomainError(f"unknown format {fmt!r}, expected 'csv' or 'json'")

    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(payload)
