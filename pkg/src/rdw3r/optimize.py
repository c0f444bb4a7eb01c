"""Hooke-Jeeves direct search (maximisation).

Exploratory moves try +step then -step on each coordinate in a fixed order,
keeping the first improvement.  After a successful exploration a pattern move
jumps along the last displacement; after a failed one the step shrinks.
Only comparisons of objective values are used, so adding a constant to the
objective leaves the iterates unchanged.  Infeasible points should return
``-inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class HjOptions:
    initial_step: float = 0.1
    shrink_factor: float = 0.5
    min_step: float = 1e-5
    max_evals: int = 10_000

    def __post_init__(self) -> None:
        if not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if not 0.0 < self.min_step < self.initial_step:
            raise ValueError("min_step must satisfy 0 < min_step < initial_step")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")


@dataclass
class HjResult:
    x: np.ndarray
    f: float
    evals: int
    budget_exhausted: bool = False
    # objective value after every accepted base-point move, starting with f(x0)
    history: list[float] = field(default_factory=list)


class _Budget(Exception):
    pass


def hooke_jeeves(
    objective: Callable[[np.ndarray], float],
    x0,
    opts: HjOptions | None = None,
) -> HjResult:
    """Maximise ``objective`` from ``x0``; never returns a point worse than ``x0``."""
    opts = opts or HjOptions()
    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        if evals >= opts.max_evals:
            raise _Budget
        evals += 1
        return float(objective(x))

    def explore(x: np.ndarray, fx: float, step: float) -> tuple[np.ndarray, float]:
        x = x.copy()
        for i in range(x.size):
            for delta in (step, -step):
                trial = x.copy()
                trial[i] += delta
                ft = f(trial)
                if ft > fx:
                    x, fx = trial, ft
                    break
        return x, fx

    base = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    fbase = float(objective(base))
    evals = 1
    history = [fbase]
    step = opts.initial_step
    exhausted = False
    try:
        while step >= opts.min_step:
            x_new, f_new = explore(base, fbase, step)
            if not f_new > fbase:
                step *= opts.shrink_factor
                continue
            while f_new > fbase:
                prev, base, fbase = base, x_new, f_new
                history.append(fbase)
                pattern = base + (base - prev)
                x_new, f_new = explore(pattern, f(pattern), step)
    except _Budget:
        exhausted = True
    return HjResult(base, fbase, evals, exhausted, history)
