"""Singularity locus of the arm and its image in the (rho, z) cross-section.

det J does not depend on theta1, so the locus is a set of curves on the
(theta2, theta3) torus.  The torus is scanned on a periodic grid; sign
changes along grid edges are bisected to the curve, and cells whose samples
land too far apart in the cross-section are subdivided until the image
spacing meets the requested bound.  Even-multiplicity zeros (det J touching
zero without changing sign, e.g. the cos(theta3)^2 factor of type C) are
caught separately as local minima of |det J| along grid lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import GeometryParams, _arm_point, arm_det
from .optimize import HjOptions, hooke_jeeves

_BISECT_ITERS = 60
_MAX_DEPTH = 8
_NOISE = 1e-14
# keeps grid nodes off special angles (0, pi/2, pi) where det J is pure rounding noise
_GRID_OFFSET = 0.5 * (math.sqrt(5.0) - 1.0)


class EmptySingularSet(RuntimeError):
    pass


class EmptyCrossings(RuntimeError):
    pass


@dataclass
class SingularSampleSet:
    """Point cloud sampling the image of det J = 0 in the cross-section."""

    rho: np.ndarray
    z: np.ndarray
    theta2: np.ndarray
    theta3: np.ndarray
    resolution: int
    spacing: float
    max_gap: float

    def __len__(self) -> int:
        return self.rho.size

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.rho, self.z])

    @property
    def preimages(self) -> np.ndarray:
        return np.column_stack([self.theta2, self.theta3])

    def mirrored(self) -> SingularSampleSet:
        """Union with the z -> -z reflection (the workspace is z-symmetric)."""
        return SingularSampleSet(
            rho=np.concatenate([self.rho, self.rho]),
            z=np.concatenate([self.z, -self.z]),
            theta2=np.concatenate([self.theta2, self.theta2]),
            theta3=np.concatenate([self.theta3, self.theta3]),
            resolution=self.resolution,
            spacing=self.spacing,
            max_gap=self.max_gap,
        )


def _image(geom: GeometryParams, t2, t3):
    x, y, z, _ = _arm_point(geom, t2, t3)
    return np.hypot(x, y), z


def _det(geom: GeometryParams, t2, t3):
    """det J with rounding noise flushed to exact zero.

    Degenerate geometries (e.g. a lone d4 link) have det J identically zero;
    without the floor its noise would look like sign changes in every cell.
    """
    D = arm_det(geom, t2, t3)
    return np.where(np.abs(D) <= _NOISE * geom.scale**3, 0.0, D)


def _bisect(geom, a2, a3, b2, b3, fa):
    """Vectorised bisection of det J along segments a -> b with sign change."""
    lo = np.zeros_like(a2)
    hi = np.ones_like(a2)
    flo = fa
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        fm = _det(geom, a2 + mid * (b2 - a2), a3 + mid * (b3 - a3))
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    return a2 + t * (b2 - a2), a3 + t * (b3 - a3)


def _cell_pass(geom, lo2, lo3, h, f00, f10, f01, f11):
    """Edge roots of a batch of cells as (n, 4) arrays, NaN where an edge has none."""
    # edges: bottom (00-10), top (01-11), left (00-01), right (10-11); axis 0 is theta2
    edges = [
        (lo2, lo3, lo2 + h, lo3, f00, f10),
        (lo2, lo3 + h, lo2 + h, lo3 + h, f01, f11),
        (lo2, lo3, lo2, lo3 + h, f00, f01),
        (lo2 + h, lo3, lo2 + h, lo3 + h, f10, f11),
    ]
    r2 = np.full((lo2.size, 4), np.nan)
    r3 = np.full((lo2.size, 4), np.nan)
    for k, (a2, a3, b2, b3, fa, fb) in enumerate(edges):
        hit = np.flatnonzero(np.sign(fa) != np.sign(fb))
        if hit.size:
            r2[hit, k], r3[hit, k] = _bisect(geom, a2[hit], a3[hit], b2[hit], b3[hit], fa[hit])
    return r2, r3


def _cell_spread(rho, z):
    """Largest distance between two roots of the same cell, (n, 4) -> (n,)."""
    spread = np.zeros(rho.shape[0])
    for i in range(4):
        for j in range(i + 1, 4):
            d = np.hypot(rho[:, i] - rho[:, j], z[:, i] - z[:, j])
            spread = np.fmax(spread, d)
    return np.nan_to_num(spread)


def _sign_change_samples(geom, grid_n, spacing, theta, D):
    h0 = theta[1] - theta[0]
    i = np.arange(grid_n)
    ip = (i + 1) % grid_n
    f00 = D
    f10 = D[ip, :]
    f01 = D[:, ip]
    f11 = D[ip][:, ip]
    active = (np.sign(f00) != np.sign(f10)) | (np.sign(f00) != np.sign(f01)) | (
        np.sign(f11) != np.sign(f10)) | (np.sign(f11) != np.sign(f01))
    ci, cj = np.nonzero(active)
    lo2 = theta[ci]
    lo3 = theta[cj]
    h = np.full(ci.size, h0)
    vals = (f00[ci, cj], f10[ci, cj], f01[ci, cj], f11[ci, cj])

    out2, out3 = [np.empty(0)], [np.empty(0)]
    max_gap = 0.0
    depth = 0
    while lo2.size:
        r2, r3 = _cell_pass(geom, lo2, lo3, h, *vals)
        rho, z = _image(geom, r2, r3)
        spread = _cell_spread(rho, z)
        split = spread > spacing if depth < _MAX_DEPTH else np.zeros(lo2.size, bool)
        done = ~split[:, None] & np.isfinite(r2)
        out2.append(r2[done])
        out3.append(r3[done])
        if np.any(~split):
            max_gap = max(max_gap, float(spread[~split].max()))
        if not np.any(split):
            break
        # children of split cells; corner values computed on a 3x3 sub-lattice
        p2, p3, ph = lo2[split], lo3[split], h[split] / 2.0
        offs = np.array([0.0, 1.0, 2.0])
        n2 = p2[:, None, None] + offs[None, :, None] * ph[:, None, None]
        n3 = p3[:, None, None] + offs[None, None, :] * ph[:, None, None]
        F = _det(geom, n2, n3)
        c2, c3, ch, cv = [], [], [], [[], [], [], []]
        for a in (0, 1):
            for b in (0, 1):
                c2.append(n2[:, a, 0])
                c3.append(n3[:, 0, b])
                ch.append(ph)
                cv[0].append(F[:, a, b])
                cv[1].append(F[:, a + 1, b])
                cv[2].append(F[:, a, b + 1])
                cv[3].append(F[:, a + 1, b + 1])
        lo2 = np.concatenate(c2)
        lo3 = np.concatenate(c3)
        h = np.concatenate(ch)
        vals = tuple(np.concatenate(v) for v in cv)
        depth += 1
    return np.concatenate(out2), np.concatenate(out3), max_gap


def _tangential_samples(geom, theta, D, tol):
    """Zeros of det J where it does not change sign, searched along grid lines."""
    out2, out3 = [], []
    absD = np.abs(D)
    h = theta[1] - theta[0]
    for axis in (0, 1):
        prev = np.roll(D, 1, axis=axis)
        nxt = np.roll(D, -1, axis=axis)
        cand = (
            (np.sign(prev) == np.sign(D))
            & (np.sign(nxt) == np.sign(D))
            & (absD <= np.abs(prev))
            & (absD <= np.abs(nxt))
            # near a double root the larger neighbour is >= 9x the node value
            & (4.0 * absD <= np.maximum(np.abs(prev), np.abs(nxt)))
            & (D != 0.0)
        )
        ci, cj = np.nonzero(cand)
        if ci.size == 0:
            continue
        base2, base3 = theta[ci], theta[cj]
        e2, e3 = (1.0, 0.0) if axis == 0 else (0.0, 1.0)

        def g(t):
            return np.abs(arm_det(geom, base2 + t * e2, base3 + t * e3))

        # golden-section search for the minimum of |det| on [-h, h]
        a = np.full(ci.size, -h)
        b = np.full(ci.size, h)
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        gc, gd = g(c), g(d)
        for _ in range(80):
            left = gc < gd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            fresh = np.where(left, b - invphi * (b - a), a + invphi * (b - a))
            gf = g(fresh)
            c, d = np.where(left, fresh, d), np.where(left, c, fresh)
            gc, gd = np.where(left, gf, gd), np.where(left, gc, gf)
        t = 0.5 * (a + b)
        ok = g(t) <= tol
        out2.append((base2 + t * e2)[ok])
        out3.append((base3 + t * e3)[ok])
    if not out2:
        return np.empty(0), np.empty(0)
    return np.concatenate(out2), np.concatenate(out3)


def singular_set(
    geom: GeometryParams,
    grid_n: int = 1024,
    spacing: float | None = None,
) -> SingularSampleSet:
    """Sample the singular curves and map them into the (rho, z) cross-section.

    ``spacing`` bounds the distance between neighbouring samples along a
    curve (default: max_reach / 500).
    """
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    if spacing is None:
        spacing = max_reach(geom) / 500.0
    if not spacing > 0:
        raise ValueError("spacing must be > 0")

    theta = -math.pi + 2.0 * math.pi * (np.arange(grid_n) + _GRID_OFFSET) / grid_n
    T2, T3 = np.meshgrid(theta, theta, indexing="ij")
    D = _det(geom, T2, T3)
    tol = 1e-9 * geom.scale**3
    if not np.any(D):
        raise EmptySingularSet(f"det J vanishes identically for {geom}; every posture is singular")

    s2, s3, max_gap = _sign_change_samples(geom, grid_n, spacing, theta, D)
    k2, k3 = _tangential_samples(geom, theta, D, tol)
    z2, z3 = np.nonzero(D == 0.0)
    t2 = np.concatenate([s2, k2, theta[z2]])
    t3 = np.concatenate([s3, k3, theta[z3]])
    if t2.size == 0:
        raise EmptySingularSet(f"no singular configuration found for {geom}")
    t2 = (t2 + math.pi) % (2.0 * math.pi) - math.pi
    t3 = (t3 + math.pi) % (2.0 * math.pi) - math.pi

    pre = np.unique(np.round(np.column_stack([t2, t3]), 12), axis=0)
    t2, t3 = pre[:, 0], pre[:, 1]
    rho, z = _image(geom, t2, t3)
    order = np.lexsort((z, rho))
    return SingularSampleSet(
        rho=rho[order], z=z[order], theta2=t2[order], theta3=t3[order],
        resolution=grid_n, spacing=float(spacing), max_gap=float(max_gap),
    )


def axis_crossings(s: SingularSampleSet, band: float | None = None) -> list[float]:
    """rho values where the singular curves meet z = 0, one per cluster, ascending."""
    if band is None:
        band = 2.0 * max(s.max_gap, 1e-12)
    near = np.abs(s.z) <= band
    if not np.any(near):
        raise EmptyCrossings("no singular sample within the z = 0 band")
    rho = s.rho[near]
    z = np.abs(s.z[near])
    order = np.argsort(rho, kind="stable")
    rho, z = rho[order], z[order]
    breaks = np.flatnonzero(np.diff(rho) > band) + 1
    out = []
    for chunk_r, chunk_z in zip(np.split(rho, breaks), np.split(z, breaks)):
        out.append(float(chunk_r[np.argmin(chunk_z)]))
    return out


def max_reach(geom: GeometryParams, grid_n: int = 256) -> float:
    """Largest distance from the base origin to the end-tip."""
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    theta = -math.pi + 2.0 * math.pi * np.arange(grid_n) / grid_n
    T2, T3 = np.meshgrid(theta, theta, indexing="ij")
    x, y, z, _ = _arm_point(geom, T2, T3)
    r2 = x * x + y * y + z * z
    i, j = np.unravel_index(np.argmax(r2), r2.shape)

    def dist2(q: np.ndarray) -> float:
        x, y, z, _ = _arm_point(geom, q[0], q[1])
        return x * x + y * y + z * z

    step = 2.0 * math.pi / grid_n
    res = hooke_jeeves(dist2, [theta[i], theta[j]], HjOptions(step, 0.5, 1e-9, 10_000))
    return math.sqrt(max(res.f, float(r2[i, j])))
