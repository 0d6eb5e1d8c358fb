"""Derivative-free simplex descent with perturbed restarts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_iters: int
    n_evals: int
    n_restarts: int


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    rng: np.random.Generator,
    *,
    step: float = 0.5,
    max_iters: int = 5000,
    tol: float = 1e-10,
    max_restarts: int = 20,
) -> SimplexResult:
    """Minimise ``f`` with the Nelder-Mead simplex method.

    Uses dimension-adaptive coefficients (Gao and Han, 2012), which keep the
    method usable for a few hundred parameters. When the spread of function
    values over the simplex drops below ``tol`` and iterations remain, a fresh
    simplex with randomly perturbed edge lengths is built around the best
    vertex; a restart that fails to improve by more than ``tol`` ends the run.
    ``max_iters`` bounds the total iteration count across restarts.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    alpha, beta, gamma, delta = 1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n
    n_evals = 0

    def fe(x: np.ndarray) -> float:
        nonlocal n_evals
        n_evals += 1
        return float(f(x))

    def build(center: np.ndarray, scale: float, perturb: bool) -> tuple[np.ndarray, np.ndarray]:
        sim = np.tile(center, (n + 1, 1))
        edges = np.full(n, scale)
        if perturb:
            edges *= rng.uniform(0.5, 1.5, size=n) * rng.choice([-1.0, 1.0], size=n)
        sim[1:] += np.diag(edges)
        return sim, np.array([fe(v) for v in sim])

    sim, fs = build(x0, step, perturb=False)
    it = restarts = 0
    scale = step
    best_at_restart = np.inf
    while it < max_iters:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if fs[-1] - fs[0] <= tol:
            if restarts >= max_restarts or best_at_restart - fs[0] <= tol:
                break
            best_at_restart = fs[0]
            restarts += 1
            scale = max(scale * 0.5, 1e-6)
            sim, fs = build(sim[0], scale, perturb=True)
            continue
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - sim[-1])
        fr = fe(xr)
        if fr < fs[0]:
            xe = centroid + beta * (xr - centroid)
            fe_ = fe(xe)
            sim[-1], fs[-1] = (xe, fe_) if fe_ < fr else (xr, fr)
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            outside = fr < fs[-1]
            xc = centroid + gamma * ((xr if outside else sim[-1]) - centroid)
            fc = fe(xc)
            if fc < (fr if outside else fs[-1]):
                sim[-1], fs[-1] = xc, fc
            else:
                sim[1:] = sim[0] + delta * (sim[1:] - sim[0])
                fs[1:] = [fe(v) for v in sim[1:]]
    k = int(np.argmin(fs))
    return SimplexResult(sim[k].copy(), float(fs[k]), it, n_evals, restarts)
