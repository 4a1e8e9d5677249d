"""Clearing vectors of the one-big-bank / n-small-banks network."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .core_fp import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    LimitMaps,
    SystemMaps,
    limit_residual,
    solve_finite,
    solve_limit,
)
from .errors import MissingRecoveryParams, RequiresDeterministicY
from .model import DiscreteDist, validate_params

TIE_TOL = 1e-12


def phi_small(k, z_c, z_i, xbar, eta_bs_i, x_b, v_s):
    """Payment capacity of a small bank before the liability cap."""
    return np.maximum(np.maximum(k - z_c - z_i, 0.0) + xbar + eta_bs_i * x_b - v_s, 0.0)


def phi_big(k_b, delta, z_c, z_b, xbar_b, v_b):
    """Payment capacity of the big bank, per small bank."""
    return np.maximum(np.maximum(k_b - delta * z_c - z_b, 0.0) - v_b + xbar_b, 0.0)


@dataclass(frozen=True)
class DefaultMetrics:
    p_d_small: float
    big_defaults: bool


@dataclass(frozen=True)
class SurplusReport:
    es1: float
    es2: float | None
    psi_small_dist: DiscreteDist
    psi_big: float


def financial_maps(net, vp, scenario):
    """Node maps of the finite clearing system for one realization."""
    n = net.n
    kz = np.maximum(net.k_draws - scenario.z_c - net.shock_draws, 0.0)
    y = net.y_draws
    v_s = vp.v_small

    def f_small(_net, agg, b_in):
        return np.minimum(np.maximum(kz + agg + b_in - v_s, 0.0), y)

    def f_big(xbar_b):
        cap = phi_big(vp.k_big, vp.delta, scenario.z_c, scenario.z_b, xbar_b, vp.v_big)
        return min(n * float(cap), n * vp.y_big) / net.eta_bar

    return SystemMaps(
        f_small=f_small,
        f_big=f_big,
        bound_y=float(np.max(y)),
        bound_big=n * vp.y_big / net.eta_bar,
    )


def solve_clearing(net, vp, scenario, init="upper", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, default_tol=1e-9):
    """Finite-n clearing vector (greatest fixed point unless ``init`` says otherwise)."""
    maps = financial_maps(net, vp, scenario)
    cv = solve_finite(net, maps, init=init, tol=tol, max_iter=max_iter)
    return replace(cv, defaulted=cv.x_small < net.y_draws - default_tol)


def _product_atoms(vp, scenario):
    """Exact joint atoms of (K, Z, Y, eta_bs) as flat arrays."""
    rows = [
        (max(k - scenario.z_c - z, 0.0), y, e, pk * pz * py * pe)
        for (k, pk), (z, pz), (y, py), (e, pe) in itertools.product(
            zip(vp.k_small.values, vp.k_small.probs),
            zip(vp.shock_small.values, vp.shock_small.probs),
            zip(vp.y_small.values, vp.y_small.probs),
            zip(vp.eta_bs.values, vp.eta_bs.probs),
        )
        if pk * pz * py * pe > 0
    ]
    kz, y, eta, prob = (np.array(col) for col in zip(*rows))
    return kz, y, eta, prob


def limit_maps(vp, scenario):
    kz, y, eta, prob = _product_atoms(vp, scenario)
    v_s = vp.v_small
    p_bs = vp.p_bs_mean
    y_max = float(y.max())

    def xi_mean(xbar, x_b):
        pay = np.minimum(np.maximum(kz + xbar + eta * x_b - v_s, 0.0), y)
        # atom probabilities sum to 1 only up to rounding; keep the mean in [0, max Y]
        return min(float(np.dot(prob, pay)), y_max)

    def f_big(xbar_b):
        if p_bs <= 0:
            return 0.0
        cap = phi_big(vp.k_big, vp.delta, scenario.z_c, scenario.z_b, xbar_b, vp.v_big)
        return min(float(cap), vp.y_big) / p_bs

    return LimitMaps(xi_mean=xi_mean, f_big=f_big, bound_y=y_max)


def solve_limit_clearing(vp, scenario, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, record=False):
    """Limit clearing aggregates for one scenario (greatest solution)."""
    return solve_limit(limit_maps(vp, scenario), vp.p_sb, tol=tol, max_iter=max_iter, record=record)


def limit_clearing_residual(vp, scenario, sol):
    """Largest violation of the three limit equations at ``sol``."""
    lm = limit_maps(vp, scenario)
    step = limit_residual(lm, vp.p_sb, sol)
    ratio = abs(sol.xbar_b - sol.xbar_s * vp.p_sb / (1.0 - vp.p_sb))
    big = abs(sol.x_big - lm.f_big(sol.xbar_b))
    return max(step, ratio, big)


def default_metrics(sol, vp, scenario):
    """Limit fraction of small-bank defaults and the big-bank default indicator."""
    kz, y, eta, prob = _product_atoms(vp, scenario)
    phi = np.maximum(kz + sol.xbar_s + eta * sol.x_big - vp.v_small, 0.0)
    p_d = float(np.sum(prob[phi < y - TIE_TOL]))
    cap_b = float(phi_big(vp.k_big, vp.delta, scenario.z_c, scenario.z_b, sol.xbar_b, vp.v_big))
    return DefaultMetrics(p_d_small=min(p_d, 1.0), big_defaults=cap_b < vp.y_big - TIE_TOL)


def expected_surplus(sol, vp, scenario, need_es2=False):
    """Per-small-bank expected surplus at T=1 and, with recovery data, at T=2."""
    rec = vp.recovery
    if need_es2 and rec is None:
        raise MissingRecoveryParams("es2 needs recovery parameters")
    rho_s, rho_b, a_s, a_b = (rec.rho_s, rec.rho_b, rec.a_s, rec.a_b) if rec else (0.0, 0.0, 0.0, 0.0)
    kz, y, eta, prob = _product_atoms(vp, scenario)
    psi = kz + sol.xbar_s + sol.x_big * eta - vp.v_small - y
    small = np.where(psi >= 0, psi, np.maximum(psi + rho_s * a_s, 0.0))
    psi_b = (
        max(vp.k_big - scenario.z_c * vp.delta - scenario.z_b, 0.0)
        + sol.xbar_s * vp.p_sb / (1.0 - vp.p_sb)
        - vp.v_big
        - vp.y_big
    )
    big = psi_b if psi_b >= 0 else max(psi_b + rho_b * a_b, 0.0)
    es1 = float(np.dot(prob, small)) + big
    es2 = None
    if rec is not None:
        m = default_metrics(sol, vp, scenario)
        es2 = es1 + (1.0 - m.p_d_small) * a_s + (0.0 if m.big_defaults else 1.0) * a_b
    return SurplusReport(
        es1=es1,
        es2=es2,
        psi_small_dist=DiscreteDist(tuple(psi), tuple(prob / prob.sum())).compact(),
        psi_big=psi_b,
    )


def with_connectivity(vp, p_bs):
    """Regular economy whose eta laws are both indicator(p_bs), y_big = y * p_bs."""
    if not vp.y_small.is_point_mass:
        raise RequiresDeterministicY("connectivity sweeps need a deterministic small-bank liability")
    y = vp.y_small.support()[0]
    eta = DiscreteDist.indicator(p_bs)
    params = replace(vp.params, eta_sb=eta, eta_bs=eta, y_big=y * p_bs)
    return validate_params(params, regular=True)


def result_record(scenario, sol, metrics, surplus=None):
    """JSON-ready summary of one limit solve."""
    return {
        "scenario": {"z_c": scenario.z_c, "z_b": scenario.z_b},
        "xbar_s": sol.xbar_s,
        "xbar_b": sol.xbar_b,
        "x_big": sol.x_big,
        "p_d_small": metrics.p_d_small,
        "big_defaults": bool(metrics.big_defaults),
        "es1": None if surplus is None else surplus.es1,
        "es2": None if surplus is None else surplus.es2,
    }
