"""Derivative-free Nelder-Mead simplex minimizer.

Self-contained so callers can cap evaluation counts exactly and audit the
per-iteration best objective value (which must never increase).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Classic reflection/expansion/contraction/shrink coefficients.
_ALPHA, _GAMMA, _RHO, _SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass
class SimplexResult:
    x: np.ndarray
    fx: float
    n_evals: int
    n_iter: int
    converged: bool
    best_history: list[float] = field(default_factory=list)  # best f after each iteration


class _BudgetExhausted(Exception):
    pass


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    initial_step: float = 0.25,
    max_evals: int = 2000,
    ftol: float = 1e-8,
    xtol: float = 1e-8,
) -> SimplexResult:
    """Minimize f from x0; converged when the simplex collapses in both
    objective spread (< ftol) and coordinate spread (< xtol).

    The evaluation cap is hard: f is called at most max_evals times, even
    mid-iteration.  max_evals must cover at least the initial simplex
    (dim + 1 evaluations).  Non-finite objective values are treated as
    +inf, so f may signal invalid regions that way.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    if max_evals < dim + 1:
        raise ValueError(f"max_evals={max_evals} cannot cover the initial simplex ({dim + 1} evals)")
    evals = 0

    def call(x: np.ndarray) -> float:
        nonlocal evals
        if evals >= max_evals:
            raise _BudgetExhausted
        evals += 1
        v = f(x)
        return float(v) if np.isfinite(v) else np.inf

    # Initial simplex: x0 plus a step along each axis.
    verts = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        v[i] += initial_step if v[i] == 0 else initial_step * max(1.0, abs(v[i]))
        verts.append(v)
    fvals = [call(v) for v in verts]

    best_history: list[float] = []
    converged = False
    n_iter = 0
    try:
        while evals < max_evals:
            n_iter += 1
            order = np.argsort(fvals, kind="stable")
            verts = [verts[i] for i in order]
            fvals = [fvals[i] for i in order]
            best_history.append(fvals[0])

            f_spread = fvals[-1] - fvals[0]
            x_spread = max(np.max(np.abs(v - verts[0])) for v in verts[1:]) if dim else 0.0
            if f_spread < ftol and x_spread < xtol:
                converged = True
                break

            centroid = np.mean(verts[:-1], axis=0)
            reflected = centroid + _ALPHA * (centroid - verts[-1])
            f_r = call(reflected)
            if fvals[0] <= f_r < fvals[-2]:
                verts[-1], fvals[-1] = reflected, f_r
                continue
            if f_r < fvals[0]:
                expanded = centroid + _GAMMA * (centroid - verts[-1])
                f_e = call(expanded)
                if f_e < f_r:
                    verts[-1], fvals[-1] = expanded, f_e
                else:
                    verts[-1], fvals[-1] = reflected, f_r
                continue
            contracted = centroid + _RHO * (verts[-1] - centroid)
            f_c = call(contracted)
            if f_c < fvals[-1]:
                verts[-1], fvals[-1] = contracted, f_c
                continue
            # Shrink toward the best vertex; assign vertex and value together
            # so a mid-shrink budget stop cannot leave a stale pair.
            for i in range(1, len(verts)):
                shrunk = verts[0] + _SIGMA * (verts[i] - verts[0])
                f_s = call(shrunk)
                verts[i], fvals[i] = shrunk, f_s
    except _BudgetExhausted:
        pass

    order = np.argsort(fvals, kind="stable")
    best = int(order[0])
    if best_history:
        best_history.append(min(best_history[-1], fvals[best]))
    return SimplexResult(
        x=verts[best].copy(),
        fx=fvals[best],
        n_evals=evals,
        n_iter=n_iter,
        converged=converged,
        best_history=best_history,
    )
