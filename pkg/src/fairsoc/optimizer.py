"""Gradient-free maximization: Nelder-Mead simplex with seeded restarts.

The simplex follows the classic reflect / expand / contract / shrink cycle,
run here as a maximizer. The initial simplex is deterministic (axis steps of
``initial_step`` around the start point); restarts rebuild it around the best
point found so far displaced by Gaussian noise of scale ``restart_scale``
drawn from the caller's stream, and the best evaluation ever seen is what is
returned, so extra restarts can only help. Above ``block_threshold``
coordinates the search runs as cyclic block-coordinate sweeps (a simplex per
block) because one simplex degrades badly past a few dozen dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import OptimizerError
from .stochastics import RngStream, _stream


@dataclass(frozen=True)
class Objective:
    """A real-vector objective of fixed arity; higher values are better."""

    arity: int
    evaluate: Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SimplexOptions:
    max_iterations: int = 2000
    tolerance: float = 1e-8
    restarts: int = 4
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.25
    restart_scale: float = 0.5
    block_threshold: int = 40
    block_size: int = 10
    min_sweeps: int = 2
    max_sweeps: int = 8
    sweep_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise OptimizerError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.tolerance > 0.0:
            raise OptimizerError(f"tolerance must be > 0, got {self.tolerance}")
        if self.restarts < 0:
            raise OptimizerError(f"restarts must be >= 0, got {self.restarts}")
        if not self.reflection > 0.0:
            raise OptimizerError(f"reflection must be > 0, got {self.reflection}")
        if not self.expansion > 1.0:
            raise OptimizerError(f"expansion must be > 1, got {self.expansion}")
        if not 0.0 < self.contraction < 1.0:
            raise OptimizerError(f"contraction must lie in (0, 1), got {self.contraction}")
        if not 0.0 < self.shrink < 1.0:
            raise OptimizerError(f"shrink must lie in (0, 1), got {self.shrink}")
        if not self.initial_step > 0.0:
            raise OptimizerError(f"initial_step must be > 0, got {self.initial_step}")
        if not self.restart_scale > 0.0:
            raise OptimizerError(f"restart_scale must be > 0, got {self.restart_scale}")
        if self.block_threshold < 1:
            raise OptimizerError(f"block_threshold must be >= 1, got {self.block_threshold}")
        if self.block_size < 2:
            raise OptimizerError(f"block_size must be >= 2, got {self.block_size}")
        if self.min_sweeps < 1 or self.max_sweeps < self.min_sweeps:
            raise OptimizerError("sweep counts must satisfy 1 <= min_sweeps <= max_sweeps")
        if not self.sweep_tolerance > 0.0:
            raise OptimizerError(f"sweep_tolerance must be > 0, got {self.sweep_tolerance}")


def bounded_transform(u, lower: float = 0.0, upper: float = 24.0) -> np.ndarray:
    """Map unconstrained reals through a logistic into (lower, upper), strictly inside."""
    if not upper > lower:
        raise OptimizerError(f"need upper > lower, got ({lower}, {upper})")
    u = np.asarray(u, dtype=float)
    out = lower + (upper - lower) * _logistic(u)
    # exp underflow can land exactly on a bound; pull back to the nearest interior double
    return np.clip(out, np.nextafter(lower, upper), np.nextafter(upper, lower))


def inverse_transform(x, lower: float = 0.0, upper: float = 24.0) -> np.ndarray:
    """Left inverse of bounded_transform for strictly interior points."""
    if not upper > lower:
        raise OptimizerError(f"need upper > lower, got ({lower}, {upper})")
    x = np.asarray(x, dtype=float)
    if np.any(x <= lower) or np.any(x >= upper):
        raise OptimizerError("inverse_transform needs strictly interior values")
    ratio = (x - lower) / (upper - lower)
    return np.log(ratio) - np.log1p(-ratio)


def _logistic(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    pos = u >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _evaluate_soft(evaluate, x: np.ndarray) -> float:
    """Objective value with non-finite results demoted to -inf (rejected)."""
    value = evaluate(x)
    value = float(value)
    if not np.isfinite(value):
        return -np.inf
    return value


def _simplex_run(
    evaluate, center: np.ndarray, options: SimplexOptions
) -> tuple[np.ndarray, float]:
    """One restart-free Nelder-Mead maximization from a deterministic simplex."""
    n = center.size
    points = [center.astype(float, copy=True)]
    for i in range(n):
        vertex = center.astype(float, copy=True)
        vertex[i] += options.initial_step
        points.append(vertex)
    values = [_evaluate_soft(evaluate, p) for p in points]

    rho = options.reflection
    chi = options.expansion
    psi = options.contraction
    shr = options.shrink

    for _ in range(options.max_iterations):
        order = sorted(range(n + 1), key=lambda i: values[i], reverse=True)
        points = [points[i] for i in order]
        values = [values[i] for i in order]
        spread = values[0] - values[-1]
        if np.isfinite(spread) and spread < options.tolerance:
            # also require the simplex itself to have collapsed, so flat
            # objectives do not stop us far from a vertex-accurate optimum
            extent = max(float(np.max(np.abs(p - points[0]))) for p in points[1:])
            if extent < options.tolerance ** 0.5:
                break

        centroid = np.mean(points[:-1], axis=0)
        worst = points[-1]
        reflected = centroid + rho * (centroid - worst)
        f_reflected = _evaluate_soft(evaluate, reflected)

        if f_reflected > values[0]:
            expanded = centroid + chi * (reflected - centroid)
            f_expanded = _evaluate_soft(evaluate, expanded)
            if f_expanded > f_reflected:
                points[-1], values[-1] = expanded, f_expanded
            else:
                points[-1], values[-1] = reflected, f_reflected
        elif f_reflected > values[-2]:
            points[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected > values[-1]:
                contracted = centroid + psi * (reflected - centroid)
            else:
                contracted = centroid + psi * (worst - centroid)
            f_contracted = _evaluate_soft(evaluate, contracted)
            if f_contracted > max(f_reflected, values[-1]):
                points[-1], values[-1] = contracted, f_contracted
            else:
                best = points[0]
                for i in range(1, n + 1):
                    points[i] = best + shr * (points[i] - best)
                    values[i] = _evaluate_soft(evaluate, points[i])

    top = max(range(n + 1), key=lambda i: values[i])
    return points[top], values[top]


def nelder_mead_max(
    objective,
    start,
    options: SimplexOptions | None = None,
    stream: RngStream | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize a low-arity objective; returns (argmax, value).

    The start point itself is always a candidate, so the returned value is
    never below the objective at the start. A non-finite value at the start
    point is an initialization error.
    """
    options = options or SimplexOptions()
    evaluate = objective.evaluate if isinstance(objective, Objective) else objective
    x0 = np.atleast_1d(np.asarray(start, dtype=float)).copy()
    if x0.ndim != 1 or x0.size == 0:
        raise OptimizerError("start must be a non-empty 1-d vector")
    if isinstance(objective, Objective) and objective.arity != x0.size:
        raise OptimizerError(f"start has size {x0.size}, objective arity {objective.arity}")
    f0 = float(evaluate(x0))
    if not np.isfinite(f0):
        raise OptimizerError("objective is non-finite at the start point")
    if stream is None:
        stream = _stream((0,))

    best_x, best_f = x0.copy(), f0
    for round_index in range(options.restarts + 1):
        if round_index == 0:
            center = x0
        else:
            noise = stream.generator.standard_normal(x0.size) * options.restart_scale
            center = best_x + noise
        x, f = _simplex_run(evaluate, center, options)
        if f > best_f:
            best_x, best_f = x, f
    return best_x, best_f


def maximize(
    objective,
    start,
    options: SimplexOptions | None = None,
    stream: RngStream | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize at any arity: plain simplex up to block_threshold, block sweeps above."""
    options = options or SimplexOptions()
    x0 = np.atleast_1d(np.asarray(start, dtype=float))
    if x0.size <= options.block_threshold:
        return nelder_mead_max(objective, x0, options, stream)

    evaluate = objective.evaluate if isinstance(objective, Objective) else objective
    f0 = float(evaluate(x0))
    if not np.isfinite(f0):
        raise OptimizerError("objective is non-finite at the start point")
    if stream is None:
        stream = _stream((0,))

    blocks = [
        np.arange(lo, min(lo + options.block_size, x0.size))
        for lo in range(0, x0.size, options.block_size)
    ]
    # block runs never restart internally; restart rounds perturb the full vector
    block_options = _replace_restarts(options, 0)

    best_x, best_f = x0.copy(), f0
    for round_index in range(options.restarts + 1):
        if round_index == 0:
            x = x0.copy()
            f = f0
        else:
            noise = stream.generator.standard_normal(x0.size) * options.restart_scale
            x = best_x + noise
            f = _evaluate_soft(evaluate, x)
        sweeps = 0
        while True:
            before = f
            for block in blocks:
                frozen = x

                def block_eval(u, _frozen=frozen, _block=block):
                    candidate = _frozen.copy()
                    candidate[_block] = u
                    return evaluate(candidate)

                xb, fb = _simplex_run(block_eval, x[block], block_options)
                if fb > f:
                    x = x.copy()
                    x[block] = xb
                    f = fb
            sweeps += 1
            if sweeps >= options.max_sweeps:
                break
            if sweeps >= options.min_sweeps:
                reference = max(1.0, abs(before))
                if not f > before + options.sweep_tolerance * reference:
                    break
        if f > best_f:
            best_x, best_f = x.copy(), f
    return best_x, best_f


def _replace_restarts(options: SimplexOptions, restarts: int) -> SimplexOptions:
    from dataclasses import replace

    return replace(options, restarts=restarts)
