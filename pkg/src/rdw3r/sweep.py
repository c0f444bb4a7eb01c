"""Scans of eta over the 2-D parameter space of each manipulator type, and isocontours."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kinematics import GeometryError, ManipulatorType
from .rdw import DEFAULT_K_MIN_INV, SWEEP_CONFIG, RdwConfig, compute_rdw

# swept axes and fixed lengths; G and H are normalised by r3 = 1
SWEEP_AXES: dict[ManipulatorType, tuple[str, str, dict[str, float]]] = {
    ManipulatorType.B1: ("d3", "d4", {}),
    ManipulatorType.C: ("r2", "d4", {}),
    ManipulatorType.E: ("d2", "d4", {}),
    ManipulatorType.G: ("d3", "d4", {"r3": 1.0}),
    ManipulatorType.H: ("r2", "d4", {"r3": 1.0}),
}

B2_REGION = "type-B2 region"


def _axis_values(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


@dataclass(frozen=True)
class GridSpec:
    p1: str
    p2: str
    p1_min: float
    p1_max: float
    p1_step: float
    p2_min: float
    p2_max: float
    p2_step: float
    fixed: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for lo, hi, step, name in (
            (self.p1_min, self.p1_max, self.p1_step, self.p1),
            (self.p2_min, self.p2_max, self.p2_step, self.p2),
        ):
            if not lo > 0:
                raise ValueError(f"{name} range must start above 0 (got {lo:g})")
            if not hi > lo:
                raise ValueError(f"{name} range max must exceed min (got {lo:g}..{hi:g})")
            if not step > 0:
                raise ValueError(f"{name} step must be > 0")

    @classmethod
    def for_type(
        cls, mtype: ManipulatorType, lo: float = 0.25, hi: float = 4.0, step: float = 0.25
    ) -> GridSpec:
        if mtype not in SWEEP_AXES:
            raise ValueError(f"type {mtype.tag} has no 2-D parameter space")
        p1, p2, fixed = SWEEP_AXES[mtype]
        return cls(p1, p2, lo, hi, step, lo, hi, step, dict(fixed))

    @property
    def values1(self) -> np.ndarray:
        return _axis_values(self.p1_min, self.p1_max, self.p1_step)

    @property
    def values2(self) -> np.ndarray:
        return _axis_values(self.p2_min, self.p2_max, self.p2_step)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values1.size, self.values2.size

    def params(self, i: int, j: int) -> dict[str, float]:
        out = dict(self.fixed)
        out[self.p1] = float(self.values1[i])
        out[self.p2] = float(self.values2[j])
        return out


@dataclass
class EtaField:
    """Per-node sweep results, indexed ``[i, j]`` over (values1, values2)."""

    grid: GridSpec
    eta: np.ndarray
    a_rdw: np.ndarray
    rho_max: np.ndarray
    center_rho: np.ndarray
    center_z: np.ndarray
    mask_reason: np.ndarray  # str per node, "" for valid nodes

    @property
    def valid(self) -> np.ndarray:
        return self.mask_reason == ""

    def argmax(self) -> tuple[dict[str, float], float]:
        eta = np.where(self.valid, self.eta, -np.inf)
        i, j = np.unravel_index(np.argmax(eta), eta.shape)
        return self.grid.params(i, j), float(eta[i, j])

    def max(self) -> float:
        return self.argmax()[1]


def _eval_cell(args) -> tuple[float, float, float, float, float, str]:
    mtype, params, k_min_inv, config = args
    nan = math.nan
    try:
        geom = mtype.geometry(**params)
    except GeometryError:
        if mtype is ManipulatorType.B1 and params["d3"] <= params["d4"]:
            return nan, nan, nan, nan, nan, B2_REGION
        return nan, nan, nan, nan, nan, "invalid-geometry"
    try:
        r = compute_rdw(geom, k_min_inv, config)
    except Exception as exc:  # recorded per cell, never aborts the sweep
        return nan, nan, nan, nan, nan, type(exc).__name__
    sq = r.rdw_square
    return r.eta, sq.edge, r.rho_max, sq.center.rho, sq.center.z, ""


def sweep_eta(
    mtype: ManipulatorType,
    grid: GridSpec | None = None,
    k_min_inv: float = DEFAULT_K_MIN_INV,
    config: RdwConfig | None = None,
    jobs: int | None = 1,
    progress: Callable[[int, int], None] | None = None,
) -> EtaField:
    """eta at every node of ``grid``; per-node failures land in ``mask_reason``.

    ``jobs`` > 1 evaluates nodes in worker processes (``None`` uses every
    core); results do not depend on the worker count.
    """
    grid = grid or GridSpec.for_type(mtype)
    config = config or SWEEP_CONFIG
    n1, n2 = grid.shape
    tasks = [(mtype, grid.params(i, j), k_min_inv, config) for i in range(n1) for j in range(n2)]
    jobs = (os.cpu_count() or 1) if jobs is None else max(1, jobs)

    results = []
    if jobs == 1:
        for done, task in enumerate(tasks, 1):
            results.append(_eval_cell(task))
            if progress:
                progress(done, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for done, res in enumerate(pool.map(_eval_cell, tasks, chunksize=4), 1):
                results.append(res)
                if progress:
                    progress(done, len(tasks))

    cols = list(zip(*results))
    arr = [np.array(c, dtype=float).reshape(n1, n2) for c in cols[:5]]
    reasons = np.array(cols[5], dtype=object).reshape(n1, n2)
    return EtaField(grid, *arr, mask_reason=reasons)


@dataclass
class ContourLevel:
    level: float
    polylines: list[np.ndarray]  # each (k, 2) in (p1, p2) coordinates


# corner order: 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1)
# edge order:   0 = bottom (0-1), 1 = right (1-2), 2 = top (3-2), 3 = left (0-3)
_EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))


def _edge_key(i: int, j: int, e: int) -> tuple[int, int, int]:
    # 0: edge from node (i, j) along p1; 1: edge from node (i, j) along p2
    return ((i, j, 0), (i + 1, j, 1), (i, j + 1, 0), (i, j, 1))[e]


def _cell_segments(above: tuple[bool, ...], center_above: bool) -> list[tuple[int, int]]:
    crossing = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if above[a] != above[b]]
    if len(crossing) == 2:
        return [tuple(crossing)]
    if len(crossing) == 4:
        # saddle: cut off the corners on the opposite side of the centre value
        cut = [c for c in range(4) if above[c] != center_above]
        return [_CORNER_EDGES[c] for c in cut]
    return []


def _chain(segments: list[tuple[tuple, tuple]]) -> list[list[tuple]]:
    """Join segments sharing an edge key into polylines (open chains first)."""
    touching: dict[tuple, list[int]] = {}
    for s, (a, b) in enumerate(segments):
        touching.setdefault(a, []).append(s)
        touching.setdefault(b, []).append(s)
    used = [False] * len(segments)

    def walk(start_seg: int, start_key: tuple) -> list[tuple]:
        path = [start_key]
        seg, key = start_seg, start_key
        while True:
            used[seg] = True
            a, b = segments[seg]
            key = b if a == key else a
            path.append(key)
            nxt = [s for s in touching[key] if not used[s]]
            if not nxt:
                return path
            seg = nxt[0]

    lines = []
    for s, (a, b) in enumerate(segments):
        if used[s]:
            continue
        ends = [k for k in (a, b) if len(touching[k]) == 1]
        if ends:
            lines.append(walk(s, ends[0]))
    for s, (a, b) in enumerate(segments):
        if not used[s]:
            lines.append(walk(s, a))
    return lines


def extract_contours(field: EtaField, levels) -> list[ContourLevel]:
    """Marching-squares isocontours of eta; masked nodes count as 0 (below every level)."""
    x = field.grid.values1
    y = field.grid.values2
    v = np.where(field.valid & np.isfinite(field.eta), field.eta, 0.0)
    n1, n2 = v.shape
    out = []
    for level in levels:
        level = float(level)
        if not 0.0 < level < 1.0:
            raise ValueError(f"contour level {level:g} outside (0, 1)")
        above = v >= level
        segments = []
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                corners = (above[i, j], above[i + 1, j], above[i + 1, j + 1], above[i, j + 1])
                if all(corners) or not any(corners):
                    continue
                center = 0.25 * (v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1])
                for e1, e2 in _cell_segments(corners, center >= level):
                    segments.append((_edge_key(i, j, e1), _edge_key(i, j, e2)))

        def vertex(key: tuple) -> tuple[float, float]:
            i, j, along = key
            i2, j2 = (i + 1, j) if along == 0 else (i, j + 1)
            va, vb = v[i, j], v[i2, j2]
            t = (level - va) / (vb - va)
            return (x[i] + t * (x[i2] - x[i]), y[j] + t * (y[j2] - y[j]))

        lines = [np.array([vertex(k) for k in keys]) for keys in _chain(segments)]
        out.append(ContourLevel(level, lines))
    return out


def region_area(field: EtaField, level: float) -> float:
    """Fraction of valid nodes with eta >= level."""
    valid = field.valid
    n = np.count_nonzero(valid)
    if n == 0:
        return 0.0
    return float(np.count_nonzero(field.eta[valid] >= level)) / n
