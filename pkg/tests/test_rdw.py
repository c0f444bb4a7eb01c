import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdw3r.kinematics import CrossSectionPoint, arm_det, planar_ik
from rdw3r.optimize import HjOptions
from rdw3r.rdw import (
    RdwConfig,
    Square,
    Unreachable,
    ZeroEdge,
    chebyshev_distance,
    clearance,
    compute_rdw,
    conditioning_at,
    conditioning_field,
    grow_square,
    initial_center,
    max_free_square,
)
from rdw3r.singularity import singular_set

from conftest import DESIGNS, WORKED

FAST = RdwConfig(grid_n=512, n_scan=60)
CLEAR_M0 = (math.sqrt(17.0) - 1.0) / 4.0
FREE_CENTER = (28.0 + math.sqrt(704.0)) / 40.0
_SMALL_SET = singular_set(WORKED, 256)


@pytest.fixture(scope="module")
def worked_set():
    return singular_set(WORKED, 1024)


@pytest.fixture(scope="module")
def worked_result():
    return compute_rdw(WORKED, 0.25, FAST)


coords = st.floats(-10, 10)


def test_chebyshev_examples():
    assert chebyshev_distance((0, 0), (1, 2)) == 2
    assert chebyshev_distance((1.5, 0), (2.5, 0)) == 1


@given(coords, coords, coords, coords)
def test_chebyshev_symmetric(a, b, c, d):
    assert chebyshev_distance((a, b), (c, d)) == chebyshev_distance((c, d), (a, b))


def test_clearance_oracle(worked_set):
    # brute-force oracle: dense sampling of the singular circle plus the two axis points
    phi = np.linspace(-math.pi, math.pi, 200_001)
    circle = np.column_stack([np.abs(1.0 + 1.5 * np.cos(phi)), 1.5 * np.sin(phi)])
    dense = np.min(chebyshev_distance(circle, (1.5, 0.0)))
    assert dense == pytest.approx(CLEAR_M0, abs=1e-4)
    assert clearance((1.5, 0.0), worked_set) == pytest.approx(CLEAR_M0, abs=0.005)


def test_clearance_on_sample_is_zero(worked_set):
    assert clearance(worked_set.points[17], worked_set) == 0.0


@given(st.floats(0.5, 2.5), st.floats(-1, 1), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_clearance_lipschitz(r, z, dr, dz):
    s = _SMALL_SET
    a = clearance((r, z), s)
    b = clearance((r + dr, z + dz), s)
    assert abs(a - b) <= max(abs(dr), abs(dz)) + 1e-12


def test_initial_center(worked_set):
    m0 = initial_center(WORKED, worked_set)
    assert m0.rho == pytest.approx(1.5, abs=0.01)
    assert m0.z == 0.0


def test_initial_center_b1():
    g = DESIGNS["B1"]
    m0 = initial_center(g, singular_set(g, 512))
    assert m0 == pytest.approx((4.0, 0.0), abs=0.01)


def test_max_free_square(worked_set):
    sq = max_free_square(WORKED, worked_set)
    assert sq.center.rho == pytest.approx(FREE_CENTER, abs=0.01)
    assert sq.center.z == pytest.approx(0.0, abs=1e-9)
    assert sq.edge == pytest.approx(2.0 * (FREE_CENTER - 0.5), abs=0.02)
    assert sq.half_edge >= clearance((1.5, 0.0), worked_set)
    d = chebyshev_distance(worked_set.points, tuple(sq.center))
    assert np.all(d >= sq.half_edge - 1e-12)


def test_free_square_brute_force(worked_set):
    # dense grid of candidate centres against the analytic singular set
    phi = np.linspace(-math.pi, math.pi, 4001)
    circle = np.column_stack([np.abs(1.0 + 1.5 * np.cos(phi)), 1.5 * np.sin(phi)])
    sing = np.vstack([circle, [[0.5, 0.0], [2.5, 0.0]]])
    cr = np.linspace(1.2, 1.6, 161)
    best = max((np.min(chebyshev_distance(sing, (c, 0.0))), c) for c in cr)
    assert best[1] == pytest.approx(FREE_CENTER, abs=0.005)
    assert 2 * best[0] == pytest.approx(max_free_square(WORKED, worked_set).edge, abs=0.01)


def test_conditioning_at_singular_point():
    # the circle point straight above rho = r2 is singular for every branch
    for agg in ("min", "max", "first"):
        assert conditioning_at(WORKED, (1.0, 1.5), agg) == pytest.approx(0.0, abs=1e-6)


def test_conditioning_at_branch_agreement_type_c():
    lo = conditioning_at(WORKED, (1.4, 0.3), "min")
    hi = conditioning_at(WORKED, (1.4, 0.3), "max")
    assert abs(lo - hi) <= 1e-6
    assert 0.0 <= lo <= 1.0


def test_conditioning_at_unreachable():
    with pytest.raises(Unreachable):
        conditioning_at(WORKED, (3.0, 0.0))


def test_conditioning_field_rejects_policy():
    with pytest.raises(ValueError):
        conditioning_field(WORKED, [1.4], [0.0], "mean")


def test_grow_square_unattainable_threshold():
    with pytest.raises(ZeroEdge):
        grow_square(WORKED, (1.4, 0.0), 1.0, 0.01)


def test_grow_square_edge_is_lattice_multiple():
    h = 0.0173
    a = grow_square(WORKED, (1.4, 0.0), 0.25, h)
    assert a / h == pytest.approx(round(a / h), abs=1e-9)
    assert a > 0


def test_grow_square_threshold_monotone():
    loose = grow_square(WORKED, (1.4, 0.0), 0.05, 0.02)
    strict = grow_square(WORKED, (1.4, 0.0), 0.3, 0.02)
    assert strict <= loose


def test_compute_rdw_worked(worked_result):
    r = worked_result
    assert r.free_square.edge == pytest.approx(1.727, abs=0.02)
    assert 0 < r.rdw_square.edge < r.free_square.edge
    assert r.eta == 2 * r.rdw_square.half_edge / r.rho_max
    assert r.rho_max == pytest.approx(2.5, rel=1e-9)
    assert r.scan_step == pytest.approx(r.free_square.edge / FAST.n_scan)


def test_rdw_square_meets_threshold(worked_result):
    r = worked_result
    c, h = r.rdw_square.center, r.rdw_square.half_edge
    u = np.linspace(-h, h, 81)
    R, Z = np.meshgrid(c.rho + u, c.z + u, indexing="ij")
    k, ok = conditioning_field(WORKED, R.ravel(), Z.ravel())
    assert ok.all()
    assert np.min(k) >= 0.25 - 0.01


def test_free_square_is_nonsingular(worked_result):
    sq = worked_result.free_square
    c, h = sq.center, sq.half_edge
    u = np.linspace(-h, h, 83)[1:-1]
    R, Z = np.meshgrid(c.rho + u, c.z + u, indexing="ij")
    t2, t3, _, _, valid = planar_ik(WORKED, R.ravel(), Z.ravel())
    assert valid.all(axis=-1).all()
    assert np.min(np.abs(arm_det(WORKED, t2, t3))) > 0


def test_threshold_monotonicity(worked_result):
    strict = compute_rdw(WORKED, 0.30, FAST)
    assert strict.eta <= worked_result.eta + worked_result.scan_step / worked_result.rho_max


def test_compute_rdw_deterministic(worked_result):
    again = compute_rdw(WORKED, 0.25, FAST)
    assert again.eta == worked_result.eta
    assert again.rdw_square == worked_result.rdw_square


def test_compute_rdw_rejects_threshold():
    with pytest.raises(ValueError):
        compute_rdw(WORKED, 1.0, FAST)


def test_square_dict():
    assert Square(CrossSectionPoint(1.0, 0.5), 0.25).as_dict() == {"rho": 1.0, "z": 0.5, "edge": 0.5}


def test_refined_config():
    cfg = RdwConfig().refined()
    assert (cfg.grid_n, cfg.n_scan, cfg.max_evals) == (2048, 200, 20_000)


@pytest.mark.parametrize("name", list(DESIGNS))
def test_free_center_on_axis(name):
    g = DESIGNS[name]
    sq = max_free_square(g, singular_set(g, 512))
    assert abs(sq.center.z) <= 2e-5 * g.scale
