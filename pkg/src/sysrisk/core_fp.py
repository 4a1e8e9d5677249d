"""Generic random fixed-point machinery.

The finite system couples n small nodes through their weighted aggregates and a
single big node through the mean of what small nodes send it. The limit system
collapses that to the pair (aggregate of a small node, aggregate of the big
node), which `solve_limit` iterates directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NoConvergence

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class SystemMaps:
    """Bounded node maps for one realization.

    ``f_small(draws, x_bar, b_in)`` is vectorised over banks: ``x_bar`` holds
    every bank's aggregate and ``b_in`` the big-node input ``eta_bs_i * x_b``.
    ``f_big`` maps the big-node aggregate to the big node's value.
    """

    f_small: Callable
    f_big: Callable
    bound_y: float
    bound_big: float | None = None

    @property
    def big_bound(self):
        return self.bound_y if self.bound_big is None else self.bound_big


@dataclass(frozen=True)
class LimitMaps:
    """Reduced maps of the limit system.

    ``xi_mean(x_bar, x_b)`` is E[f_small] at a constant aggregate; ``f_big``
    turns the big-node aggregate into the big node's value.
    """

    xi_mean: Callable[[float, float], float]
    f_big: Callable[[float], float]
    bound_y: float


@dataclass(frozen=True)
class ClearingVector:
    x_small: np.ndarray
    x_big: float
    agg_small: np.ndarray
    agg_big: float
    iterations: int
    residual: float
    defaulted: np.ndarray | None = None

    @property
    def default_fraction(self):
        if self.defaulted is None:
            return None
        return float(np.mean(self.defaulted))


@dataclass(frozen=True)
class LimitSolution:
    xbar_s: float
    xbar_b: float
    x_big: float
    iterations: int = 0
    residual: float = 0.0
    history: tuple = ()


def apply_finite_operator(x, x_b, net, maps):
    """One synchronous application of the finite operator."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise DimensionMismatch(f"expected a vector of length {net.n}, got shape {x.shape}")
    agg = net.aggregate_small(x)
    new_x = np.asarray(maps.f_small(net, agg, net.eta_bs_draws * x_b), dtype=float)
    new_b = float(maps.f_big(net.aggregate_big(x)))
    return new_x, new_b


def _initial(init, net, maps):
    if isinstance(init, str):
        if init == "upper":
            return np.full(net.n, maps.bound_y, dtype=float), float(maps.big_bound)
        if init == "zero":
            return np.zeros(net.n), 0.0
        raise ValueError(f"unknown init policy {init!r}")
    x0, b0 = init
    x0 = np.array(x0, dtype=float)
    if x0.shape != (net.n,):
        raise DimensionMismatch(f"initial vector must have length {net.n}")
    return x0, float(b0)


def solve_finite(net, maps, init="upper", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, on_iterate=None):
    """Picard iteration of the finite operator until the sup-norm step is <= tol.

    ``init`` is ``"upper"`` (every node at its bound), ``"zero"`` or a pair
    ``(x0, x_b0)``. For monotone maps ``"upper"`` reaches the greatest fixed
    point and ``"zero"`` the least. ``on_iterate(x, x_b)`` is called on each
    new iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, x_b = _initial(init, net, maps)
    residual = np.inf
    for it in range(1, max_iter + 1):
        new_x, new_b = apply_finite_operator(x, x_b, net, maps)
        residual = max(float(np.max(np.abs(new_x - x), initial=0.0)), abs(new_b - x_b))
        x, x_b = new_x, new_b
        if on_iterate is not None:
            on_iterate(x, x_b)
        if residual <= tol:
            return ClearingVector(
                x_small=x,
                x_big=x_b,
                agg_small=np.asarray(net.aggregate_small(x)),
                agg_big=net.aggregate_big(x),
                iterations=it,
                residual=residual,
            )
    raise NoConvergence(residual, max_iter)


def limit_step(limit_maps, p_sb, xbar, xbar_b):
    """Apply the reduced limit operator once."""
    x_b = limit_maps.f_big(xbar_b)
    m = limit_maps.xi_mean(xbar, x_b)
    return m * (1.0 - p_sb), m * p_sb


def solve_limit(limit_maps, p_sb, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, init=None, record=False):
    """Solve the two-dimensional limit fixed point by iteration.

    Starts from the top of the box by default, so for monotone maps the
    iterates decrease to the greatest solution. With ``record=True`` the
    sup-norm step of every iteration is kept in ``history``.
    """
    if not 0 < p_sb < 1:
        raise ValueError(f"p_sb must lie in (0, 1), got {p_sb}")
    if init is None:
        xbar, xbar_b = limit_maps.bound_y * (1.0 - p_sb), limit_maps.bound_y * p_sb
    else:
        xbar, xbar_b = map(float, init)
    steps = []
    residual = np.inf
    for it in range(1, max_iter + 1):
        new, new_b = limit_step(limit_maps, p_sb, xbar, xbar_b)
        residual = max(abs(new - xbar), abs(new_b - xbar_b))
        xbar, xbar_b = new, new_b
        if record:
            steps.append(residual)
        if residual <= tol:
            return LimitSolution(
                xbar_s=xbar,
                xbar_b=xbar_b,
                x_big=float(limit_maps.f_big(xbar_b)),
                iterations=it,
                residual=residual,
                history=tuple(steps),
            )
    raise NoConvergence(residual, max_iter)


def limit_residual(limit_maps, p_sb, sol):
    """Sup-norm distance between a solution and its image under the limit map."""
    new, new_b = limit_step(limit_maps, p_sb, sol.xbar_s, sol.xbar_b)
    return max(abs(new - sol.xbar_s), abs(new_b - sol.xbar_b))
