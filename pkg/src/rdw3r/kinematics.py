"""Kinematics of 3R orthogonal positioning manipulators.

Geometry follows the modified DH chain

    T_i = RotX(alpha_i) . TransX(d_i) . RotZ(theta_i) . TransZ(r_i)

with (alpha1, d1, r1) = (0, 0, 0), alpha2 = -90 deg, alpha3 = +90 deg and the
operation point at (d4, 0, 0) in frame 3.  With theta1 = 0 the end-tip is

    x = d2 + cos(t2) (d3 + d4 cos(t3)) + r3 sin(t2)
    y = r2 + d4 sin(t3)
    z = r3 cos(t2) - sin(t2) (d3 + d4 cos(t3))

and theta1 rotates (x, y) about the base axis.  Every function here accepts
stacked inputs (leading axes are broadcast) so the workspace scans in
:mod:`rdw3r.singularity` and :mod:`rdw3r.rdw` stay vectorised.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_PARAM_NAMES = ("d2", "d3", "d4", "r2", "r3")


class GeometryError(ValueError):
    """Invalid DH lengths or lengths inconsistent with a manipulator type."""


@dataclass(frozen=True)
class GeometryParams:
    """The five DH lengths of an orthogonal 3R manipulator."""

    d2: float = 0.0
    d3: float = 0.0
    d4: float = 1.0
    r2: float = 0.0
    r3: float = 0.0

    def __post_init__(self) -> None:
        for name in _PARAM_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise GeometryError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        if self.d4 <= 0.0:
            raise GeometryError("d4 must be > 0 (a zero d4 manipulator is always singular)")

    @property
    def scale(self) -> float:
        """Sum of all lengths; the natural unit for absolute tolerances."""
        return self.d2 + self.d3 + self.d4 + self.r2 + self.r3

    def scaled(self, factor: float) -> GeometryParams:
        return GeometryParams(**{k: v * factor for k, v in self.as_dict().items()})

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


class ManipulatorType(enum.Enum):
    """Manipulator types with a well-connected workspace, plus ``GENERIC``.

    Each value stores the parameters that must be nonzero; all other lengths
    must be exactly zero.  B1 additionally requires d3 > d4.
    """

    B1 = ("d3", "d4")
    C = ("r2", "d4")
    E = ("d2", "d4")
    G = ("d3", "d4", "r3")
    H = ("r2", "d4", "r3")
    GENERIC = ()

    @property
    def nonzero(self) -> tuple[str, ...]:
        return self.value

    @classmethod
    def from_tag(cls, tag: str) -> ManipulatorType:
        key = tag.strip().upper()
        if key in cls.__members__:
            return cls[key]
        raise GeometryError(
            f"unknown manipulator type {tag!r}; choose one of B1, C, E, G, H, GENERIC"
        )

    @property
    def tag(self) -> str:
        return "Generic" if self is ManipulatorType.GENERIC else self.name

    def check(self, geom: GeometryParams) -> None:
        """Raise :class:`GeometryError` naming the first violated constraint."""
        if self is ManipulatorType.GENERIC:
            return
        params = geom.as_dict()
        for name in _PARAM_NAMES:
            if name in self.nonzero and params[name] == 0.0:
                raise GeometryError(f"type {self.tag} requires {name} != 0")
            if name not in self.nonzero and params[name] != 0.0:
                raise GeometryError(
                    f"type {self.tag} requires {name} = 0 (got {name}={params[name]:g})"
                )
        if self is ManipulatorType.B1 and not geom.d3 > geom.d4:
            raise GeometryError(
                f"type B1 requires d3 > d4 (got d3={geom.d3:g}, d4={geom.d4:g})"
            )

    def geometry(self, **lengths: float) -> GeometryParams:
        """Build and validate a geometry of this type; omitted lengths are zero."""
        unknown = set(lengths) - set(_PARAM_NAMES)
        if unknown:
            raise GeometryError(f"unknown length parameter(s): {', '.join(sorted(unknown))}")
        values = {name: 0.0 for name in _PARAM_NAMES}
        values.update({k: float(v) for k, v in lengths.items() if v is not None})
        geom = GeometryParams(**values)
        self.check(geom)
        return geom


def wrap_angle(a):
    """Canonical representative of an angle in [-pi, pi)."""
    return (np.asarray(a, dtype=float) + math.pi) % TWO_PI - math.pi


class JointConfig(NamedTuple):
    theta1: float
    theta2: float
    theta3: float

    def canonical(self) -> JointConfig:
        return JointConfig(*(float(wrap_angle(t)) for t in self))


class CrossSectionPoint(NamedTuple):
    rho: float
    z: float


def _arm_point(geom: GeometryParams, t2, t3):
    """End-tip (x, y, z) at theta1 = 0, plus the reused partial terms."""
    c2, s2 = np.cos(t2), np.sin(t2)
    c3, s3 = np.cos(t3), np.sin(t3)
    reach = geom.d3 + geom.d4 * c3
    x = geom.d2 + c2 * reach + geom.r3 * s2
    y = geom.r2 + geom.d4 * s3
    z = geom.r3 * c2 - s2 * reach
    return x, y, z, (c2, s2, c3, s3, reach)


def forward_kinematics(geom: GeometryParams, q) -> np.ndarray:
    """End-tip position for joint angles ``q`` of shape (..., 3)."""
    q = np.asarray(q, dtype=float)
    x1, y1, z, _ = _arm_point(geom, q[..., 1], q[..., 2])
    c1, s1 = np.cos(q[..., 0]), np.sin(q[..., 0])
    return np.stack([c1 * x1 - s1 * y1, s1 * x1 + c1 * y1, z], axis=-1)


def cross_section(p) -> CrossSectionPoint:
    """Map Cartesian point(s) (..., 3) to the (rho, z) half-plane."""
    p = np.asarray(p, dtype=float)
    rho = np.hypot(p[..., 0], p[..., 1])
    z = p[..., 2]
    if rho.ndim == 0:
        return CrossSectionPoint(float(rho), float(z))
    return CrossSectionPoint(rho, z)


def _arm_jacobian(geom: GeometryParams, t2, t3) -> np.ndarray:
    """Positional Jacobian at theta1 = 0, shape (..., 3, 3)."""
    t2, t3 = np.broadcast_arrays(np.asarray(t2, dtype=float), np.asarray(t3, dtype=float))
    x, y, z, (c2, s2, c3, s3, reach) = _arm_point(geom, t2, t3)
    zero = np.zeros_like(x)
    dreach = -geom.d4 * s3
    col1 = (-y, x, zero)
    col2 = (-s2 * reach + geom.r3 * c2, zero, -c2 * reach - geom.r3 * s2)
    col3 = (c2 * dreach, geom.d4 * c3, -s2 * dreach)
    return np.stack(
        [np.stack(col1, axis=-1), np.stack(col2, axis=-1), np.stack(col3, axis=-1)],
        axis=-1,
    )


def jacobian(geom: GeometryParams, q) -> np.ndarray:
    """Analytic positional Jacobian dP/dq, shape (..., 3, 3)."""
    q = np.asarray(q, dtype=float)
    J = _arm_jacobian(geom, q[..., 1], q[..., 2])
    c1, s1 = np.cos(q[..., 0]), np.sin(q[..., 0])
    rot = np.zeros(q.shape[:-1] + (3, 3))
    rot[..., 0, 0] = c1
    rot[..., 0, 1] = -s1
    rot[..., 1, 0] = s1
    rot[..., 1, 1] = c1
    rot[..., 2, 2] = 1.0
    return rot @ J


def arm_det(geom: GeometryParams, t2, t3):
    """det J as a function of (theta2, theta3) only; det J does not depend on theta1."""
    x, y, z, (c2, s2, c3, s3, reach) = _arm_point(geom, t2, t3)
    dreach = -geom.d4 * s3
    # columns: (-y, x, 0), (a1, 0, a3), (b1, b2, b3)
    a1 = -s2 * reach + geom.r3 * c2
    a3 = -c2 * reach - geom.r3 * s2
    b1, b2, b3 = c2 * dreach, geom.d4 * c3, -s2 * dreach
    return -y * (-a3 * b2) + x * (a3 * b1 - a1 * b3)


def det_jacobian(geom: GeometryParams, q):
    q = np.asarray(q, dtype=float)
    d = arm_det(geom, q[..., 1], q[..., 2])
    return float(d) if np.ndim(d) == 0 else d


def conditioning_index(J):
    """Inverse condition number sigma_min / sigma_max of J (0 when J vanishes)."""
    J = np.asarray(J, dtype=float)
    sv = np.linalg.svd(J, compute_uv=False)
    smax = sv[..., 0]
    smin = sv[..., -1]
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(smax > 0.0, smin / np.where(smax > 0.0, smax, 1.0), 0.0)
    k = np.clip(k, 0.0, 1.0)
    return float(k) if k.ndim == 0 else k


def _gram_extreme_eigs(g00, g11, g22, g01, g12, g02):
    """Smallest and largest eigenvalue of symmetric 3x3 matrices (closed form)."""
    q = (g00 + g11 + g22) / 3.0
    off = g01 * g01 + g12 * g12 + g02 * g02
    p = np.sqrt(((g00 - q) ** 2 + (g11 - q) ** 2 + (g22 - q) ** 2 + 2.0 * off) / 6.0)
    pz = np.where(p > 0.0, p, 1.0)
    b00, b11, b22 = (g00 - q) / pz, (g11 - q) / pz, (g22 - q) / pz
    b01, b12, b02 = g01 / pz, g12 / pz, g02 / pz
    det_b = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02)
    phi = np.arccos(np.clip(0.5 * det_b, -1.0, 1.0)) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * math.pi / 3.0)
    return lo, hi


def arm_conditioning(geom: GeometryParams, t2, t3):
    """k^-1 at (theta2, theta3) from the closed-form spectrum of J^T J.

    Agrees with :func:`conditioning_index` to ~1e-8 near singularities and
    to rounding elsewhere; used by the batched workspace scans.
    """
    x, y, z, (c2, s2, c3, s3, reach) = _arm_point(geom, t2, t3)
    dreach = -geom.d4 * s3
    a1 = -s2 * reach + geom.r3 * c2
    a3 = -c2 * reach - geom.r3 * s2
    b1, b2, b3 = c2 * dreach, geom.d4 * c3, -s2 * dreach
    g00 = x * x + y * y
    g11 = a1 * a1 + a3 * a3
    g22 = b1 * b1 + b2 * b2 + b3 * b3
    g01 = -y * a1
    g02 = -y * b1 + x * b2
    g12 = a1 * b1 + a3 * b3
    lo, hi = _gram_extreme_eigs(g00, g11, g22, g01, g12, g02)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.sqrt(np.clip(lo, 0.0, None) / np.where(hi > 0.0, hi, 1.0))
    return np.where(hi > 0.0, np.clip(k, 0.0, 1.0), 0.0)


# ---------------------------------------------------------------------------
# Inverse kinematics
# ---------------------------------------------------------------------------


def _polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise product of coefficient arrays (highest degree first)."""
    n, m = a.shape[-1], b.shape[-1]
    out = np.zeros(a.shape[:-1] + (n + m - 1,))
    for i in range(n):
        out[..., i : i + m] += a[..., i : i + 1] * b
    return out


def _quartic_theta3(geom: GeometryParams, Q: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    """theta3 roots of K^2 = 4 d2^2 (rho^2 - (r2 + d4 s3)^2), shape (n, 4), NaN-padded.

    K = Q - 2 r2 d4 s3 - 2 d3 d4 c3; substituting t = tan(theta3 / 2) gives a
    quartic in t.
    """
    alpha = 2.0 * geom.d3 * geom.d4
    beta = 2.0 * geom.r2 * geom.d4
    n = Q.shape[0]
    kp = np.stack([Q + alpha, np.full(n, -2.0 * beta), Q - alpha], axis=-1)
    vp = np.tile([geom.r2, 2.0 * geom.d4, geom.r2], (n, 1))
    w = rho2[:, None] * np.array([1.0, 0.0, 2.0, 0.0, 1.0])
    coeffs = _polymul(kp, kp) - 4.0 * geom.d2**2 * (w - _polymul(vp, vp))

    out = np.full((n, 4), np.nan)
    size = np.max(np.abs(coeffs), axis=-1)
    regular = np.abs(coeffs[:, 0]) > 1e-12 * np.where(size > 0, size, 1.0)
    if np.any(regular):
        c = coeffs[regular]
        comp = np.zeros((c.shape[0], 4, 4))
        comp[:, 0, :] = -c[:, 1:] / c[:, :1]
        comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
        roots = np.linalg.eigvals(comp)
        real = np.abs(roots.imag) <= 1e-6 * (1.0 + np.abs(roots.real))
        out[regular] = np.where(real, 2.0 * np.arctan(roots.real), np.nan)
    for i in np.flatnonzero(~regular):
        # leading coefficient vanishes: theta3 = pi is a root, deflate the rest
        found = [math.pi] if size[i] > 0 else []
        trimmed = np.trim_zeros(np.where(np.abs(coeffs[i]) > 1e-12 * size[i], coeffs[i], 0.0), "f")
        if trimmed.size > 1:
            r = np.roots(trimmed)
            r = r[np.abs(r.imag) <= 1e-6 * (1.0 + np.abs(r.real))].real
            found.extend(2.0 * np.arctan(r))
        out[i, : min(4, len(found))] = found[:4]
    return out


def planar_ik(geom: GeometryParams, rho, z, tol: float | None = None):
    """Candidate (theta2, theta3) pairs reaching cross-section points.

    Returns ``(t2, t3, u, v, valid)``, each of shape (n, 4).  ``u, v`` are the
    end-tip coordinates in the arm plane at theta1 = 0, so theta1 for a
    Cartesian target is ``atan2(y, x) - atan2(v, u)``.  Candidates are
    checked against the target with tolerance ``tol`` (default
    1e-6 * scale); duplicates are not merged.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float)).ravel()
    z = np.atleast_1d(np.asarray(z, dtype=float)).ravel()
    rho, z = np.broadcast_arrays(rho, z)
    n = rho.shape[0]
    tol = 1e-6 * geom.scale if tol is None else tol
    rho2 = rho * rho
    Q = rho2 + z * z + geom.d2**2 - geom.r2**2 - geom.d3**2 - geom.d4**2 - geom.r3**2

    if geom.d2 == 0.0:
        # K = 0 is linear in (c3, s3); each theta3 carries two signs of u
        alpha = 2.0 * geom.d3 * geom.d4
        beta = 2.0 * geom.r2 * geom.d4
        R = math.hypot(alpha, beta)
        t3 = np.full((n, 4), np.nan)
        if R > 0.0:
            ratio = Q / R
            ok = np.abs(ratio) <= 1.0 + 1e-12
            phase = math.atan2(beta, alpha)
            spread = np.arccos(np.clip(ratio, -1.0, 1.0))
            lo = np.where(ok, phase - spread, np.nan)
            hi = np.where(ok, phase + spread, np.nan)
            t3 = np.stack([lo, lo, hi, hi], axis=-1)
        v = geom.r2 + geom.d4 * np.sin(t3)
        root = np.sqrt(np.clip(rho2[:, None] - v * v, 0.0, None))
        u = root * np.array([1.0, -1.0, 1.0, -1.0])
    else:
        t3 = _quartic_theta3(geom, Q, rho2)
        s3 = np.sin(t3)
        c3 = np.cos(t3)
        v = geom.r2 + geom.d4 * s3
        K = Q[:, None] - 2.0 * geom.r2 * geom.d4 * s3 - 2.0 * geom.d3 * geom.d4 * c3
        u = K / (2.0 * geom.d2)

    reach = geom.d3 + geom.d4 * np.cos(t3)
    norm2 = reach * reach + geom.r3**2
    du = u - geom.d2
    zz = z[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        c2 = (du * reach + zz * geom.r3) / norm2
        s2 = (du * geom.r3 - zz * reach) / norm2
    t2 = np.arctan2(s2, c2)

    x1, y1, z1, _ = _arm_point(geom, t2, t3)
    err = np.hypot(np.hypot(x1, y1) - rho[:, None], z1 - zz)
    valid = np.isfinite(err) & (err <= tol) & (norm2 > 0.0)
    return t2, t3, u, v, valid


@dataclass
class IkResult:
    solutions: list[JointConfig]
    # roots that satisfied the polynomial but failed the FK round trip
    rejected: int = 0
    residuals: list[float] = field(default_factory=list)


def _angle_gap(a: Sequence[float], b: Sequence[float]) -> float:
    d = wrap_angle(np.subtract(a, b))
    return float(np.max(np.abs(d)))


def solve_ik(geom: GeometryParams, target, tol: float | None = None) -> IkResult:
    """All distinct inverse kinematic solutions of a Cartesian target."""
    target = np.asarray(target, dtype=float)
    tol = 1e-9 * geom.scale if tol is None else tol
    rho = math.hypot(target[0], target[1])
    phi = math.atan2(target[1], target[0])
    # loose in-plane test first; the FK round trip below is the binding check
    t2, t3, u, v, valid = planar_ik(geom, rho, target[2], tol=max(1e-6 * geom.scale, tol))

    cands = []
    rejected = 0
    for k in np.flatnonzero(valid[0]):
        q = np.array([phi - math.atan2(v[0, k], u[0, k]), t2[0, k], t3[0, k]])
        q = _newton_polish(geom, q, target)
        res = float(np.linalg.norm(forward_kinematics(geom, q) - target))
        if res > tol:
            rejected += 1
            log.debug("IK root rejected: residual %.3g > tol %.3g", res, tol)
            continue
        cands.append((JointConfig(*q).canonical(), res))

    sols: list[JointConfig] = []
    residuals: list[float] = []
    for q, res in sorted(cands, key=lambda c: c[1]):
        if all(_angle_gap(q, s) > 1e-6 for s in sols):
            sols.append(q)
            residuals.append(res)
    order = sorted(range(len(sols)), key=lambda i: tuple(sols[i]))
    return IkResult([sols[i] for i in order], rejected, [residuals[i] for i in order])


def _newton_polish(geom: GeometryParams, q: np.ndarray, target: np.ndarray) -> np.ndarray:
    r = target - forward_kinematics(geom, q)
    dq, *_ = np.linalg.lstsq(jacobian(geom, q), r, rcond=1e-12)
    q_new = q + dq
    if np.linalg.norm(target - forward_kinematics(geom, q_new)) < np.linalg.norm(r):
        return q_new
    return q


def inverse_kinematics(geom: GeometryParams, target, tol: float | None = None) -> list[JointConfig]:
    """Distinct IK solutions (0 to 4), sorted by canonical (theta1, theta2, theta3).

    Unreachable targets give an empty list.
    """
    return solve_ik(geom, target, tol).solutions
