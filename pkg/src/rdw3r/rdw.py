"""Largest singularity-free square and regular dextrous workspace (RDW) square.

Both squares live in the (rho, z) half-plane and are axis aligned; revolving
them about the base axis gives the 3-D regions.  The free square is bounded
by the Chebyshev clearance to the singular samples; the RDW square is grown
on a lattice until a lattice point is unreachable or falls below the
conditioning threshold.  Both centres are optimised by Hooke-Jeeves.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .kinematics import CrossSectionPoint, GeometryParams, arm_conditioning, planar_ik
from .optimize import HjOptions, hooke_jeeves
from .singularity import SingularSampleSet, axis_crossings, max_reach, singular_set

log = logging.getLogger(__name__)

Aggregate = Literal["min", "max", "first"]
DEFAULT_K_MIN_INV = 0.25


class NoFreeSegment(RuntimeError):
    pass


class Unreachable(ValueError):
    pass


class ZeroEdge(RuntimeError):
    pass


@dataclass(frozen=True)
class Square:
    center: CrossSectionPoint
    half_edge: float

    @property
    def edge(self) -> float:
        return 2.0 * self.half_edge

    def as_dict(self) -> dict[str, float]:
        return {"rho": float(self.center.rho), "z": float(self.center.z), "edge": self.edge}


@dataclass(frozen=True)
class RdwConfig:
    """Resolution knobs of :func:`compute_rdw`.

    ``spacing`` defaults to max_reach / 500 and ``min_step`` to
    1e-5 * geom.scale.
    """

    grid_n: int = 1024
    spacing: float | None = None
    n_scan: int = 100
    aggregate: Aggregate = "min"
    reach_grid_n: int = 256
    shrink_factor: float = 0.5
    min_step: float | None = None
    max_evals: int = 10_000

    def refined(self, factor: int = 2) -> RdwConfig:
        """Same settings with every resolution multiplied by ``factor``."""
        return RdwConfig(
            grid_n=self.grid_n * factor,
            spacing=None if self.spacing is None else self.spacing / factor,
            n_scan=self.n_scan * factor,
            aggregate=self.aggregate,
            reach_grid_n=self.reach_grid_n * factor,
            shrink_factor=self.shrink_factor,
            min_step=None if self.min_step is None else self.min_step / factor,
            max_evals=self.max_evals * factor,
        )


SWEEP_CONFIG = RdwConfig(grid_n=512, n_scan=60)


@dataclass
class RdwResult:
    geom: GeometryParams
    free_square: Square
    rdw_square: Square
    k_min_inv: float
    rho_max: float
    eta: float
    scan_step: float
    singular_samples: int
    evals: dict[str, int] = field(default_factory=dict)


def chebyshev_distance(p, q):
    """max(|rho_p - rho_q|, |z_p - z_q|); broadcasts over stacked points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.maximum(np.abs(p[..., 0] - q[..., 0]), np.abs(p[..., 1] - q[..., 1]))
    return float(d) if d.ndim == 0 else d


def clearance(center, s: SingularSampleSet) -> float:
    """Chebyshev distance from ``center`` to the nearest singular sample."""
    c = np.asarray(center, dtype=float)
    return float(np.min(np.maximum(np.abs(s.rho - c[0]), np.abs(s.z - c[1]))))


def reachable(geom: GeometryParams, rho, z) -> np.ndarray:
    *_, valid = planar_ik(geom, rho, z)
    return valid.any(axis=-1)


def conditioning_field(geom: GeometryParams, rho, z, aggregate: Aggregate = "min"):
    """Aggregated k^-1 over the IK branches of many (rho, z) points.

    Returns ``(k, reachable)``; ``k`` is NaN where no IK solution exists.
    """
    t2, t3, _, _, valid = planar_ik(geom, rho, z)
    k = np.full(t2.shape, np.nan)
    if valid.any():
        k[valid] = arm_conditioning(geom, t2[valid], t3[valid])
    ok = valid.any(axis=-1)
    out = np.full(ok.shape, np.nan)
    if aggregate == "min":
        out[ok] = np.nanmin(k[ok], axis=-1)
    elif aggregate == "max":
        out[ok] = np.nanmax(k[ok], axis=-1)
    elif aggregate == "first":
        first = np.argmax(valid, axis=-1)
        out[ok] = k[ok, first[ok]]
    else:
        raise ValueError(f"unknown aggregate policy {aggregate!r}")
    return out, ok


def conditioning_at(geom: GeometryParams, p, aggregate: Aggregate = "min") -> float:
    """k^-1 at a cross-section point, aggregated over its IK solutions."""
    k, ok = conditioning_field(geom, [p[0]], [p[1]], aggregate)
    if not ok[0]:
        raise Unreachable(f"no IK solution at (rho, z) = ({p[0]:g}, {p[1]:g})")
    return float(k[0])


def initial_center(geom: GeometryParams, s: SingularSampleSet) -> CrossSectionPoint:
    """Midpoint of the widest reachable gap between consecutive z = 0 crossings."""
    xs = axis_crossings(s)
    pairs = sorted(zip(xs[:-1], xs[1:]), key=lambda ab: ab[0] - ab[1])
    for a, b in pairs:
        mid = 0.5 * (a + b)
        if reachable(geom, mid, 0.0)[0]:
            return CrossSectionPoint(mid, 0.0)
    raise NoFreeSegment(f"no reachable interval between the z = 0 crossings {xs}")


def _segment_half_length(s: SingularSampleSet, m0: CrossSectionPoint) -> float:
    xs = np.asarray(axis_crossings(s))
    return float(np.min(np.abs(xs - m0.rho)))


def max_free_square(
    geom: GeometryParams, s: SingularSampleSet, opts: HjOptions | None = None
) -> Square:
    """Largest square centred anywhere reachable that contains no singular sample."""
    m0 = initial_center(geom, s)
    if opts is None:
        half = _segment_half_length(s, m0)
        opts = HjOptions(0.1 * half, 0.5, min(1e-5 * geom.scale, 0.05 * half), 10_000)

    def objective(c: np.ndarray) -> float:
        if not reachable(geom, c[0], c[1])[0]:
            return -math.inf
        return clearance(c, sym)

    sym = s.mirrored()
    res = hooke_jeeves(objective, [m0.rho, m0.z], opts)
    return Square(CrossSectionPoint(float(res.x[0]), float(res.x[1])), float(res.f))


def _ring_offsets(r0: int, r1: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer lattice offsets with Chebyshev ring index in [r0, r1)."""
    n = r1 - 1
    i, j = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    ring = np.maximum(np.abs(i), np.abs(j))
    sel = (ring >= r0) & (ring < r1)
    return np.column_stack([i[sel], j[sel]]), ring[sel]


def _admissible_rings(
    geom: GeometryParams,
    center,
    k_min_inv: float,
    scan_step: float,
    aggregate: Aggregate,
    max_rings: int,
    hint: int = 0,
) -> tuple[int, float]:
    """Count lattice rings around ``center`` that pass (0 if the centre fails).

    Also returns the fraction of points failing on the first failing ring.
    Rings are evaluated in chunks; ``hint`` sizes the first chunk.
    """
    r0 = 0
    chunk = max(4, hint + 2)
    while r0 < max_rings:
        r1 = min(r0 + chunk, max_rings)
        offs, ring = _ring_offsets(r0, r1)
        k, ok = conditioning_field(
            geom, center[0] + scan_step * offs[:, 0], center[1] + scan_step * offs[:, 1], aggregate
        )
        bad = ~ok | ~(k >= k_min_inv)
        if bad.any():
            first = int(ring[bad].min())
            on_ring = ring == first
            return first, float(np.count_nonzero(bad & on_ring)) / np.count_nonzero(on_ring)
        r0, chunk = r1, max(4, chunk // 2)
    return max_rings, 0.0


def grow_square(
    geom: GeometryParams,
    center,
    k_min_inv: float,
    scan_step: float,
    aggregate: Aggregate = "min",
    max_rings: int = 10_000,
) -> float:
    """Edge of the largest centred square whose lattice points all pass.

    The lattice has pitch ``scan_step`` and contains ``center``.  A square of
    edge ``a`` holds the points within Chebyshev distance ``a / 2``, so with
    rings 0..R admissible and ring R + 1 failing the returned edge is
    ``(2 R + 1) * scan_step``.
    """
    if not 0.0 < k_min_inv <= 1.0:
        raise ValueError("k_min_inv must lie in (0, 1]")
    if not scan_step > 0:
        raise ValueError("scan_step must be > 0")
    rings, _ = _admissible_rings(geom, center, k_min_inv, scan_step, aggregate, max_rings)
    if rings == 0:
        raise ZeroEdge(
            f"centre ({center[0]:g}, {center[1]:g}) is unreachable or below k^-1 = {k_min_inv:g}"
        )
    return (2 * rings - 1) * scan_step


def max_rdw_square(
    geom: GeometryParams,
    start,
    k_min_inv: float,
    scan_step: float,
    aggregate: Aggregate = "min",
    opts: HjOptions | None = None,
) -> tuple[Square, int]:
    """Hooke-Jeeves over the RDW centre; returns the square and evaluation count.

    The edge is a staircase in the centre position, so the search objective
    adds a tie-breaker below one ring: the share of passing points on the
    first failing ring.  The reported edge is the plain lattice edge.
    """
    if opts is None:
        opts = HjOptions(5.0 * scan_step, 0.5, 1e-5 * geom.scale, 10_000)
    hint = 0

    def objective(c: np.ndarray) -> float:
        nonlocal hint
        rings, fail = _admissible_rings(geom, c, k_min_inv, scan_step, aggregate, 10_000, hint)
        if rings == 0:
            return 0.0 if reachable(geom, c[0], c[1])[0] else -math.inf
        hint = rings
        return rings + 0.5 * (1.0 - fail)

    res = hooke_jeeves(objective, np.asarray(start, dtype=float), opts)
    center = CrossSectionPoint(float(res.x[0]), float(res.x[1]))
    rings, _ = _admissible_rings(geom, center, k_min_inv, scan_step, aggregate, 10_000, hint)
    rings = _confirm_rings(geom, center, k_min_inv, scan_step, aggregate, rings)
    half = 0.5 * (2 * rings - 1) * scan_step if rings > 0 else 0.0
    return Square(center, half), res.evals


def _confirm_rings(
    geom: GeometryParams, center, k_min_inv: float, scan_step: float, aggregate: Aggregate, rings: int
) -> int:
    """Re-check a grown square on the half-pitch lattice and drop rings until it passes.

    The square of ``rings`` rings reaches half a pitch beyond the outermost
    tested ring; the centre search can exploit that untested band.  The
    half-pitch lattice covers the band, so the confirmed square has no
    failing point at twice the scan resolution.
    """
    if rings == 0:
        return 0
    fine, _ = _admissible_rings(geom, center, k_min_inv, 0.5 * scan_step, aggregate, 2 * rings, 2 * rings)
    return min(rings, fine // 2)


def compute_rdw(
    geom: GeometryParams,
    k_min_inv: float = DEFAULT_K_MIN_INV,
    config: RdwConfig | None = None,
) -> RdwResult:
    """Free square, RDW square, reach and eta = a_RDW / rho_max for one manipulator."""
    if not 0.0 < k_min_inv < 1.0:
        raise ValueError("k_min_inv must lie in (0, 1)")
    config = config or RdwConfig()
    rho_max = max_reach(geom, config.reach_grid_n)
    spacing = config.spacing if config.spacing is not None else rho_max / 500.0
    s = singular_set(geom, config.grid_n, spacing)

    m0 = initial_center(geom, s)
    half = _segment_half_length(s, m0)
    min_step = config.min_step if config.min_step is not None else 1e-5 * geom.scale
    free_opts = HjOptions(0.1 * half, config.shrink_factor, min(min_step, 0.05 * half), config.max_evals)
    free = max_free_square(geom, s, free_opts)

    scan_step = free.edge / config.n_scan
    rdw_opts = HjOptions(
        0.1 * free.half_edge, config.shrink_factor, min(min_step, 0.05 * free.half_edge), config.max_evals
    )
    rdw_sq, evals = max_rdw_square(geom, free.center, k_min_inv, scan_step, config.aggregate, rdw_opts)
    eta = rdw_sq.edge / rho_max
    return RdwResult(
        geom=geom,
        free_square=free,
        rdw_square=rdw_sq,
        k_min_inv=k_min_inv,
        rho_max=rho_max,
        eta=eta,
        scan_step=scan_step,
        singular_samples=len(s),
        evals={"rdw_objective": evals},
    )
