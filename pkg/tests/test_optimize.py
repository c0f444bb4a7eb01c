import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdw3r.optimize import HjOptions, hooke_jeeves


def test_parabola():
    res = hooke_jeeves(lambda x: -(x[0] - 1.0) ** 2, [0.0], HjOptions(0.5, 0.5, 1e-6, 10_000))
    assert res.x[0] == pytest.approx(1.0, abs=1e-5)
    assert not res.budget_exhausted


def test_nonsmooth_two_dimensional():
    f = lambda x: -abs(x[0] - 2.0) - abs(x[1] + 3.0)
    res = hooke_jeeves(f, [0.0, 0.0], HjOptions(0.5, 0.5, 1e-6, 10_000))
    np.testing.assert_allclose(res.x, [2.0, -3.0], atol=1e-5)


def test_history_nondecreasing():
    f = lambda x: -((x[0] - 0.3) ** 2) - 4 * (x[1] + 0.7) ** 2 + 0.5 * x[0] * x[1]
    res = hooke_jeeves(f, [2.0, 2.0], HjOptions(0.4, 0.5, 1e-7, 10_000))
    assert res.history[0] == f(np.array([2.0, 2.0]))
    assert all(b >= a for a, b in zip(res.history, res.history[1:]))
    assert res.f == res.history[-1]


def test_budget_flag():
    res = hooke_jeeves(lambda x: -np.sum(x**2), [5.0, 5.0], HjOptions(1e-3, 0.5, 1e-9, 25))
    assert res.budget_exhausted
    assert res.evals == 25
    assert res.f >= -50.0


def test_infeasible_points_are_skipped():
    f = lambda x: -np.inf if x[0] > 0.5 else -((x[0] - 1.0) ** 2)
    res = hooke_jeeves(f, [0.0], HjOptions(0.2, 0.5, 1e-8, 10_000))
    assert res.x[0] == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(initial_step=0.0),
        dict(shrink_factor=1.0),
        dict(min_step=0.5, initial_step=0.1),
        dict(max_evals=0),
    ],
)
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        HjOptions(**kwargs)


@given(st.integers(-10**6, 10**6), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_translation_invariance_and_determinism(c, x0, y0):
    # integer-valued objective so that adding c is exact in floating point
    f = lambda x: -float(round(1e6 * (abs(x[0] - 1.3) + 2 * (x[1] - 0.2) ** 2)))
    opts = HjOptions(0.3, 0.5, 1e-6, 5_000)
    a = hooke_jeeves(f, [x0, y0], opts)
    b = hooke_jeeves(lambda x: f(x) + c, [x0, y0], opts)
    again = hooke_jeeves(f, [x0, y0], opts)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.x, again.x)
    assert a.evals == b.evals
    assert a.f >= f(np.array([x0, y0]))
