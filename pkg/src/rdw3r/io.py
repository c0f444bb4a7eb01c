"""File formats: RDW JSON, singular-sample CSV, sweep CSV, contour CSV and SVG.

All writers are deterministic (fixed column order and number formatting) so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import IO, Iterable

import numpy as np

from .kinematics import ManipulatorType
from .rdw import RdwResult
from .singularity import SingularSampleSet
from .sweep import ContourLevel, EtaField, GridSpec

SWEEP_HEADER = ("p1", "p2", "eta", "a_rdw", "rho_max", "center_rho", "center_z", "mask_reason")
CONTOUR_HEADER = ("level", "poly_id", "p1", "p2")
SINGULAR_HEADER = ("rho", "z", "theta2", "theta3")
SVG_SIZE = 800


def _g(value: float, digits: int) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        return "0"
    return f"{value:.{digits}g}"


def rdw_to_dict(result: RdwResult, mtype: ManipulatorType) -> dict:
    return {
        "type": mtype.tag,
        "params": result.geom.as_dict(),
        "free_square": result.free_square.as_dict(),
        "rdw_square": result.rdw_square.as_dict(),
        "k_min_inv": result.k_min_inv,
        "rho_max": result.rho_max,
        "eta": result.eta,
        "scan_step": result.scan_step,
        "singular_samples": result.singular_samples,
    }


def write_rdw_json(result: RdwResult, mtype: ManipulatorType, out: IO[str]) -> None:
    json.dump(rdw_to_dict(result, mtype), out, indent=2)
    out.write("\n")


def write_singular_csv(s: SingularSampleSet, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SINGULAR_HEADER)
    for row in zip(s.rho, s.z, s.theta2, s.theta3):
        w.writerow([_g(v, 9) for v in row])


def write_sweep_csv(field: EtaField, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    x, y = field.grid.values1, field.grid.values2
    for i in range(x.size):
        for j in range(y.size):
            nums = (x[i], y[j], field.eta[i, j], field.a_rdw[i, j], field.rho_max[i, j],
                    field.center_rho[i, j], field.center_z[i, j])
            w.writerow([_g(v, 6) for v in nums] + [field.mask_reason[i, j]])


def _regular_axis(values: list[float], name: str) -> tuple[float, float, float]:
    vals = sorted(set(values))
    if len(vals) < 2:
        raise ValueError(f"sweep CSV needs at least two distinct {name} values")
    steps = np.diff(vals)
    if not np.allclose(steps, steps[0], rtol=1e-4, atol=0.0):
        raise ValueError(f"sweep CSV {name} values are not evenly spaced")
    return vals[0], vals[-1], float(steps[0])


def read_sweep_csv(src: IO[str]) -> EtaField:
    """Parse a sweep CSV back into an :class:`EtaField` (axes named p1, p2)."""
    reader = csv.reader(src)
    header = next(reader, None)
    if header is None or tuple(header) != SWEEP_HEADER:
        raise ValueError(f"not a sweep CSV: expected header {','.join(SWEEP_HEADER)}")
    rows = [r for r in reader if r]
    if not rows:
        raise ValueError("sweep CSV has no data rows")
    p1 = [float(r[0]) for r in rows]
    p2 = [float(r[1]) for r in rows]
    lo1, hi1, st1 = _regular_axis(p1, "p1")
    lo2, hi2, st2 = _regular_axis(p2, "p2")
    grid = GridSpec("p1", "p2", lo1, hi1, st1, lo2, hi2, st2)
    x, y = grid.values1, grid.values2
    if x.size * y.size != len(rows):
        raise ValueError("sweep CSV rows do not form a complete grid")
    cols = np.full((5, x.size, y.size), np.nan)
    reasons = np.full((x.size, y.size), "", dtype=object)
    for r in rows:
        i = int(np.argmin(np.abs(x - float(r[0]))))
        j = int(np.argmin(np.abs(y - float(r[1]))))
        cols[:, i, j] = [float(v) for v in r[2:7]]
        reasons[i, j] = r[7] if len(r) > 7 else ""
    return EtaField(grid, cols[0], cols[1], cols[2], cols[3], cols[4], reasons)


def write_contour_csv(contours: Iterable[ContourLevel], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CONTOUR_HEADER)
    poly_id = 0
    for c in contours:
        for line in c.polylines:
            for p1, p2 in line:
                w.writerow([_g(c.level, 6), poly_id, _g(p1, 6), _g(p2, 6)])
            poly_id += 1


def contour_svg(contours: list[ContourLevel], grid: GridSpec) -> str:
    """SVG with one path per polyline on a fixed 800x800 viewport."""
    x0, x1 = grid.p1_min, grid.values1[-1]
    y0, y1 = grid.p2_min, grid.values2[-1]

    def px(p1: float, p2: float) -> tuple[float, float]:
        return ((p1 - x0) / (x1 - x0) * SVG_SIZE, (1.0 - (p2 - y0) / (y1 - y0)) * SVG_SIZE)

    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">\n'
    )
    buf.write(f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white" stroke="black"/>\n')
    for c in contours:
        for line in c.polylines:
            pts = [px(a, b) for a, b in line]
            d = "M " + " L ".join(f"{u:.2f} {v:.2f}" for u, v in pts)
            buf.write(f'<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>\n')
            u, v = pts[len(pts) // 2]
            buf.write(f'<text x="{u:.2f}" y="{v:.2f}" font-size="12">{_g(c.level, 6)}</text>\n')
    buf.write("</svg>\n")
    return buf.getvalue()
