"""Economy parameters, finite discrete laws and their JSON form."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateEtaSB,
    InvalidDistribution,
    MissingField,
    NonPositiveLiability,
    ValidationError,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDist:
    """Finite law given by atoms ``values[k]`` with weights ``probs[k]``."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if not values or len(values) != len(probs):
            raise InvalidDistribution("need a non-empty, equal-length list of atoms")
        if not all(math.isfinite(v) for v in values):
            raise InvalidDistribution(f"non-finite atom in {values}")
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise InvalidDistribution(f"negative or non-finite probability in {probs}")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise InvalidDistribution(f"probabilities sum to {math.fsum(probs)!r}, not 1")

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        if not pairs:
            raise InvalidDistribution("empty atom list")
        try:
            values, probs = zip(*((v, p) for v, p in pairs))
        except (TypeError, ValueError) as exc:
            raise InvalidDistribution(f"atoms must be [value, prob] pairs: {pairs!r}") from exc
        return cls(values, probs)

    @classmethod
    def point(cls, value):
        return cls((value,), (1.0,))

    @classmethod
    def binary(cls, w, eps):
        """Shock law ``Bin(w, eps)``: ``eps`` with probability ``w``, else 0."""
        return cls((0.0, eps), (1.0 - w, w))

    @classmethod
    def indicator(cls, p):
        return cls((0.0, 1.0), (1.0 - p, p))

    def pairs(self):
        return [[v, p] for v, p in zip(self.values, self.probs)]

    def mean(self):
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def expect(self, fn):
        return math.fsum(fn(v) * p for v, p in zip(self.values, self.probs))

    def min(self):
        return min(v for v, p in zip(self.values, self.probs) if p > 0)

    def max(self):
        return max(v for v, p in zip(self.values, self.probs) if p > 0)

    @property
    def is_point_mass(self):
        return len({v for v, p in zip(self.values, self.probs) if p > 0}) == 1

    def support(self):
        return sorted({v for v, p in zip(self.values, self.probs) if p > 0})

    def sample(self, rng, size):
        probs = np.asarray(self.probs)
        idx = rng.choice(len(probs), size=size, p=probs / probs.sum())
        return np.asarray(self.values)[idx]

    def compact(self):
        """Merge repeated values and drop zero-probability atoms."""
        acc = {}
        for v, p in zip(self.values, self.probs):
            if p > 0:
                acc[v] = acc.get(v, 0.0) + p
        keys = sorted(acc)
        return DiscreteDist(tuple(keys), tuple(acc[k] for k in keys))


@dataclass(frozen=True)
class Recovery:
    rho_s: float
    rho_b: float
    a_s: float
    a_b: float


@dataclass(frozen=True)
class Scenario:
    z_c: float = 0.0
    z_b: float = 0.0

    def __post_init__(self):
        for name in ("z_c", "z_b"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"scenario {name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ModelParams:
    n: int
    p_ss: float
    eta_sb: DiscreteDist
    eta_bs: DiscreteDist
    shock_small: DiscreteDist
    k_small: DiscreteDist
    y_small: DiscreteDist
    y_big: float
    k_big: float
    v_small: float
    v_big: float
    delta: float
    recovery: Recovery | None = None


@dataclass(frozen=True)
class ValidatedParams:
    """`ModelParams` that passed `validate_params`, with cached moments."""

    params: ModelParams
    p_sb: float
    p_bs_mean: float
    mean_y: float
    regular: bool = field(default=False)

    def __getattr__(self, name):
        # forward parameter access (vp.n, vp.eta_bs, ...)
        if name == "params":
            raise AttributeError(name)
        return getattr(self.params, name)

    def k_bar_z(self, z_c):
        """E[(K - z_c - Z)^+] over the independent laws of K and Z."""
        return math.fsum(
            pk * pz * max(k - z_c - z, 0.0)
            for k, pk in zip(self.k_small.values, self.k_small.probs)
            for z, pz in zip(self.shock_small.values, self.shock_small.probs)
        )

    def with_params(self, **changes):
        return validate_params(replace(self.params, **changes), regular=self.regular)


def validate_params(params, regular=False):
    if not isinstance(params.n, (int, np.integer)) or params.n < 1:
        raise ValidationError(f"n must be a positive integer, got {params.n!r}")
    if not 0 < params.p_ss <= 1:
        raise ValidationError(f"p_ss must lie in (0, 1], got {params.p_ss}")
    for name in ("eta_sb", "eta_bs"):
        dist = getattr(params, name)
        if not isinstance(dist, DiscreteDist):
            raise InvalidDistribution(f"{name} must be a DiscreteDist")
        if dist.min() < 0 or dist.max() > 1:
            raise InvalidDistribution(f"{name} support must lie in [0, 1]")
    for name in ("shock_small", "k_small"):
        if getattr(params, name).min() < 0:
            raise InvalidDistribution(f"{name} must be non-negative")
    if params.y_small.min() <= 0:
        raise NonPositiveLiability("every atom of y_small must be > 0")
    if not params.y_big > 0:
        raise NonPositiveLiability(f"y_big must be > 0, got {params.y_big}")
    for name in ("k_big", "v_small", "v_big", "delta"):
        v = getattr(params, name)
        if not math.isfinite(v) or v < 0:
            raise ValidationError(f"{name} must be finite and >= 0, got {v}")
    if params.recovery is not None:
        for name in ("rho_s", "rho_b", "a_s", "a_b"):
            if getattr(params.recovery, name) < 0:
                raise ValidationError(f"recovery.{name} must be >= 0")
    p_sb = params.eta_sb.mean()
    if not 0 < p_sb < 1:
        raise DegenerateEtaSB(f"E[eta_sb] = {p_sb} must lie strictly inside (0, 1)")
    return ValidatedParams(
        params=params,
        p_sb=p_sb,
        p_bs_mean=params.eta_bs.mean(),
        mean_y=params.y_small.mean(),
        regular=regular,
    )


# -- JSON config -------------------------------------------------------------

DIST_FIELDS = ("eta_sb", "eta_bs", "shock_small", "k_small", "y_small")
SCALAR_FIELDS = ("y_big", "k_big", "v_small", "v_big", "delta")
REQUIRED_FIELDS = ("n", "p_ss") + DIST_FIELDS + SCALAR_FIELDS


def params_to_dict(params):
    out = {"n": int(params.n), "p_ss": params.p_ss}
    for name in DIST_FIELDS:
        out[name] = getattr(params, name).pairs()
    for name in SCALAR_FIELDS:
        out[name] = getattr(params, name)
    if params.recovery is not None:
        r = params.recovery
        out["recovery"] = {"rho_s": r.rho_s, "rho_b": r.rho_b, "A_s": r.a_s, "A_b": r.a_b}
    return out


def params_from_dict(data):
    for name in REQUIRED_FIELDS:
        if name not in data:
            raise MissingField(name)
    kwargs = {"n": data["n"], "p_ss": float(data["p_ss"])}
    if isinstance(kwargs["n"], float) and kwargs["n"].is_integer():
        kwargs["n"] = int(kwargs["n"])
    for name in DIST_FIELDS:
        kwargs[name] = DiscreteDist.from_pairs(data[name])
    for name in SCALAR_FIELDS:
        kwargs[name] = float(data[name])
    rec = data.get("recovery")
    if rec is not None:
        try:
            kwargs["recovery"] = Recovery(
                float(rec["rho_s"]), float(rec["rho_b"]), float(rec["A_s"]), float(rec["A_b"])
            )
        except KeyError as exc:
            raise MissingField(f"recovery.{exc.args[0]}") from None
    return ModelParams(**kwargs)


def load_params(path):
    with open(Path(path)) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return params_from_dict(data)


def save_params(params, path):
    Path(path).write_text(json.dumps(params_to_dict(params), indent=2) + "\n")
