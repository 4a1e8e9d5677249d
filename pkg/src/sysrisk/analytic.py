"""Closed-form default fractions for indicator connectivity and binary shocks."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

from .errors import (
    EpsilonExceedsY,
    HypothesisViolated,
    MissingRecoveryParams,
    NoConsistentRegime,
    RequiresDeterministicY,
    RequiresIndicatorEta,
    ValidationError,
)

TIE_TOL = 1e-12
# slack for float noise in the case-consistency test; lower regime wins ties
CONSISTENCY_TOL = 1e-11


class Classification(enum.Enum):
    NO_DEFAULTS = "NoDefaults"
    ALL_DEFAULTS = "AllDefaults"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class BinaryEconomy:
    """Scalars of a deterministic-liability, binary-shock economy at one z_c."""

    y: float
    k_s: float
    v_s: float
    w: float
    eps: float
    z_c: float

    @property
    def k_lower(self):
        return max(self.k_s - self.z_c - self.eps, 0.0)

    @property
    def k_upper(self):
        return max(self.k_s - self.z_c, 0.0)

    @property
    def k_bar_z(self):
        return self.w * self.k_lower + (1.0 - self.w) * self.k_upper


@dataclass(frozen=True)
class RegimeResult:
    regime: int
    p_d_small: float
    xbar: float
    barriers: tuple
    constants: dict
    big_bank_solvent_check: bool
    k_lower: float
    k_upper: float
    k_bar_z: float
    clamp_active: bool = False

    @property
    def applicable(self):
        """Whether the closed form describes the limit system at this point."""
        return self.big_bank_solvent_check and not self.clamp_active

    def to_dict(self):
        out = asdict(self)
        out["barriers"] = dict(zip(("b1", "b2", "b3", "b4", "b5"), self.barriers))
        out["applicable"] = self.applicable
        return out


@dataclass(frozen=True)
class RecoveryResult:
    p_d_small: float
    p_d_star: float
    es2: float


def _is_indicator(dist):
    return set(dist.support()) <= {0.0, 1.0}


def binary_economy(vp, scenario):
    """Extract (y, k^s, v^s, w, eps) or raise if the economy is not binary."""
    if not vp.y_small.is_point_mass:
        raise RequiresDeterministicY("closed forms need a deterministic small-bank liability")
    if not vp.k_small.is_point_mass:
        raise ValidationError("closed forms need a deterministic small-bank return k^s")
    support = vp.shock_small.support()
    if len(support) > 2 or (len(support) == 2 and support[0] != 0.0):
        raise ValidationError(f"shock law must be binary (0, eps), got support {support}")
    eps = support[-1]
    w = vp.shock_small.compact().probs[-1] if eps > 0 else 0.0
    return BinaryEconomy(
        y=vp.y_small.support()[0],
        k_s=vp.k_small.support()[0],
        v_s=vp.v_small,
        w=w,
        eps=eps,
        z_c=scenario.z_c,
    )


def lemma_first_classify(vp, scenario, x_b_bound=None):
    """Sufficient conditions for no small-bank default or for total default.

    ``x_b_bound`` bounds the big bank's per-claim payment; it defaults to y.
    """
    if not _is_indicator(vp.eta_bs):
        raise RequiresIndicatorEta("eta_bs must take values in {0, 1}")
    if not vp.y_small.is_point_mass:
        raise RequiresDeterministicY("classification needs a deterministic small-bank liability")
    y = vp.y_small.support()[0]
    kz = sorted(
        max(k - scenario.z_c - z, 0.0) for k in vp.k_small.support() for z in vp.shock_small.support()
    )
    k_lower, k_upper = kz[0], kz[-1]
    x_b = y if x_b_bound is None else x_b_bound
    load = y * vp.p_bs_mean
    if load <= k_lower - vp.v_small:
        return Classification.NO_DEFAULTS
    if load > k_upper + x_b - vp.v_small:
        return Classification.ALL_DEFAULTS
    return Classification.INDETERMINATE


def _regime_constants(e, p):
    """P_Di, c_i, d_i and b_i for the five regimes at connectivity p."""
    y, v, w = e.y, e.v_s, e.w
    kl, ku, kbar = e.k_lower, e.k_upper, e.k_bar_z
    pd = (0.0, w * (1 - p), 1 - p, 1 - p * (1 - w), 1.0)
    denom4 = 1 - p * (1 - w)
    c4 = (kbar * (1 - p) + (kl + y) * w * p) / denom4 - v if denom4 > 0 else kl + y - v
    c = (0.0, kl - v, kbar - v, c4, kbar - v + y * p)
    d = (kl - v, ku - v, kl - v + y, ku - v + y)
    b = tuple(c[i] * (1 - p) * pd[i] + d[i] * (1 - (1 - p) * pd[i]) for i in range(4)) + (y,)
    return pd, c, d, b


def _xbar(e, p, pd_i, c_i):
    return e.y * (1 - p) - (e.y * p - c_i) * (1 - p) * pd_i / (1 - (1 - p) * pd_i)


def _terms(e, xbar):
    """The four uncapped payments, ordered worst to best scenario."""
    return (
        e.k_lower - e.v_s + xbar,
        e.k_upper - e.v_s + xbar,
        e.k_lower - e.v_s + xbar + e.y,
        e.k_upper - e.v_s + xbar + e.y,
    )


def binary_regime_solve(vp, scenario, p_bs):
    """Closed-form regime, default fraction and aggregate for connectivity p_bs.

    The big bank is assumed to pay in full (x_b = y). The active regime is the
    lowest one whose candidate aggregate reproduces its own default pattern:
    the first ``regime - 1`` payment terms fall short of y and the rest do not.

    ``clamp_active`` flags a defaulting term whose uncapped payment is
    negative. The closed form lets such a bank pay a negative amount while the
    limit equations floor it at zero, so the two disagree there.
    """
    e = binary_economy(vp, scenario)
    if not e.eps < e.y:
        raise EpsilonExceedsY(f"shock size {e.eps} must be below the liability {e.y}")
    if not 0 < p_bs < 1:
        raise ValidationError(f"p_bs must lie in (0, 1), got {p_bs}")
    pd, c, d, b = _regime_constants(e, p_bs)
    found = None
    for i in range(5):
        if 1 - (1 - p_bs) * pd[i] <= 0:
            continue
        xbar = _xbar(e, p_bs, pd[i], c[i])
        terms = _terms(e, xbar)
        tol = CONSISTENCY_TOL * max(1.0, e.y)
        if all(t < e.y + tol for t in terms[:i]) and all(t >= e.y - tol for t in terms[i:]):
            found = (i, xbar, terms)
            break
    if found is None:
        raise NoConsistentRegime(f"no regime reproduces itself at p_bs={p_bs}")
    i, xbar, terms = found
    clamp = any(t < 0 for t in terms[:i])
    solvent = (
        max(vp.k_big - vp.delta * scenario.z_c - scenario.z_b, 0.0)
        - vp.v_big
        + xbar * p_bs / (1 - p_bs)
        > e.y * p_bs
    )
    constants = {f"c{j + 1}": c[j] for j in range(5)}
    constants.update({f"d{j + 1}": d[j] for j in range(4)})
    return RegimeResult(
        regime=i + 1,
        p_d_small=pd[i],
        xbar=xbar,
        barriers=b,
        constants=constants,
        big_bank_solvent_check=solvent,
        k_lower=e.k_lower,
        k_upper=e.k_upper,
        k_bar_z=e.k_bar_z,
        clamp_active=clamp,
    )


def binary_recovery_pd(e, p_bs):
    """Default fraction when every small bank clears through breaking bonds."""
    load = e.y * p_bs
    if load <= e.k_lower - e.v_s:
        return 0.0
    if load <= e.k_upper - e.v_s:
        return e.w * (1 - p_bs)
    if load <= e.k_lower + e.y - e.v_s:
        return 1 - p_bs
    if load <= e.k_upper + e.y - e.v_s:
        return 1 - p_bs + e.w * p_bs
    return 1.0


def min_expected_defaults(e):
    """Smallest default fraction attainable over the connectivity parameter.

    The w(1 - p) branch is bounded by p <= 1, so its infimum is floored at 0
    when k_upper - v exceeds y.
    """
    y, v, w, kl, ku = e.y, e.v_s, e.w, e.k_lower, e.k_upper
    if v < ku:
        return min(w * (1 - min((ku - v) / y, 1.0)), max(v - kl, 0.0) / y)
    return min(w + (1 - w) * (v - ku) / y, (v - kl) / y, 1.0)


def binary_recovery_solve(vp, scenario, p_bs):
    """Default fraction, its infimum over p_bs, and T=2 surplus with recovery."""
    rec = vp.recovery
    if rec is None:
        raise MissingRecoveryParams("recovery parameters are required")
    e = binary_economy(vp, scenario)
    big_margin = vp.k_big - vp.delta * scenario.z_c - scenario.z_b - vp.v_big
    if not big_margin > 0:
        raise HypothesisViolated("k^b > delta*z_c + z_b + v^b")
    if not e.eps < e.y:
        raise HypothesisViolated("eps < y")
    if not e.k_lower + rec.rho_s * rec.a_s > e.v_s + e.y * p_bs:
        raise HypothesisViolated("k_lower + rho^s A^s > v^s + y p_bs")
    pd = binary_recovery_pd(e, p_bs)
    es2 = e.k_bar_z - e.v_s + rec.a_s - (1 - rec.rho_s) * rec.a_s * pd + big_margin + rec.a_b
    return RecoveryResult(p_d_small=pd, p_d_star=min_expected_defaults(e), es2=es2)
