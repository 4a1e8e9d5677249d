import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sysrisk.analytic import (
    BinaryEconomy,
    Classification,
    binary_economy,
    binary_recovery_pd,
    binary_recovery_solve,
    binary_regime_solve,
    lemma_first_classify,
    min_expected_defaults,
)
from sysrisk.core_fp import LimitSolution
from sysrisk.errors import (
    EpsilonExceedsY,
    HypothesisViolated,
    MissingRecoveryParams,
    RequiresDeterministicY,
    RequiresIndicatorEta,
    ValidationError,
)
from sysrisk.finance import default_metrics, expected_surplus, solve_limit_clearing, with_connectivity
from sysrisk.model import DiscreteDist, Recovery, Scenario

from conftest import FIG_XBAR, binary_params


def classify(k_s, v, y, p, eps=0.0):
    vp = binary_params(y=y, k_s=k_s, v_s=v, w=0.5, eps=eps, p_bs=p, k_big=100)
    return lemma_first_classify(vp, Scenario())


def test_first_classification_examples():
    assert classify(5, 2, 10, 0.2) is Classification.NO_DEFAULTS
    assert classify(5, 2, 10, 0.999999) is Classification.INDETERMINATE
    assert classify(1, 2, 3, 0.999999) is Classification.ALL_DEFAULTS


def test_first_classification_requires_indicator(fig):
    with pytest.raises(RequiresIndicatorEta):
        lemma_first_classify(fig.with_params(eta_bs=DiscreteDist.point(0.5)), Scenario())
    with pytest.raises(RequiresDeterministicY):
        lemma_first_classify(fig.with_params(y_small=DiscreteDist.from_pairs([(1, 0.5), (2, 0.5)])), Scenario())


def test_reference_regime(fig):
    r = binary_regime_solve(fig, Scenario(), 0.9)
    assert r.regime == 3
    assert r.p_d_small == pytest.approx(0.1, abs=1e-12)
    assert r.xbar == pytest.approx(FIG_XBAR, abs=1e-10)
    assert r.barriers[1] == pytest.approx(12.92) and r.barriers[2] == pytest.approx(72.32)
    assert r.big_bank_solvent_check and r.applicable
    assert (r.k_lower, r.k_upper, r.k_bar_z) == (5.0, 25.0, 17.0)


def test_regime_one_below_first_barrier(fig):
    vp = fig.with_params(shock_small=DiscreteDist.binary(0.4, 5.0))
    p = 0.9 * (20 - 12) / 80
    r = binary_regime_solve(vp, Scenario(), p)
    assert r.regime == 1 and r.p_d_small == 0.0
    assert r.xbar == pytest.approx(80 * (1 - p))


def test_first_jump_size(fig):
    vp = fig.with_params(shock_small=DiscreteDist.binary(0.4, 5.0))
    p_star = (20 - 12) / 80
    below = binary_regime_solve(vp, Scenario(), p_star - 1e-9)
    above = binary_regime_solve(vp, Scenario(), p_star + 1e-9)
    assert (below.regime, above.regime) == (1, 2)
    assert above.p_d_small - below.p_d_small == pytest.approx(0.4 * (1 - p_star), abs=1e-8)


def test_epsilon_must_be_below_y(fig):
    with pytest.raises(EpsilonExceedsY):
        binary_regime_solve(fig.with_params(shock_small=DiscreteDist.binary(0.4, 90.0)), Scenario(), 0.5)


def test_recovery_branches():
    e = BinaryEconomy(y=10, k_s=8, v_s=2, w=0.3, eps=4, z_c=0)  # k_lower 4, k_upper 8
    assert binary_recovery_pd(e, 0.1) == 0.0
    assert binary_recovery_pd(e, 0.5) == pytest.approx(0.3 * 0.5)
    assert binary_recovery_pd(e, 0.99) == pytest.approx(0.01)
    e = BinaryEconomy(y=10, k_s=1, v_s=9, w=0.3, eps=1, z_c=0)
    assert binary_recovery_pd(e, 0.5) == 1.0


def test_min_expected_defaults_display():
    e = BinaryEconomy(y=10, k_s=8, v_s=5, w=0.3, eps=4, z_c=0)
    assert min_expected_defaults(e) == pytest.approx(min(0.3 * (1 - 0.3), 1 / 10))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_min_expected_defaults_is_infimum(seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(5, 50)
    e = BinaryEconomy(y, rng.uniform(0, 60), rng.uniform(0, 40), rng.uniform(0, 1), rng.uniform(0, y), rng.uniform(0, 5))
    scan = min(binary_recovery_pd(e, p) for p in np.linspace(1e-7, 1 - 1e-7, 4001))
    assert min_expected_defaults(e) <= scan + 1e-12
    assert scan - min_expected_defaults(e) < 2e-3 * max(1.0, e.w + 1)


def test_recovery_needs_parameters_and_hypotheses(fig):
    with pytest.raises(MissingRecoveryParams):
        binary_recovery_solve(fig, Scenario(), 0.5)
    vp = fig.with_params(recovery=Recovery(0.5, 0.5, 1.0, 1.0))
    with pytest.raises(HypothesisViolated, match="k_lower"):
        binary_recovery_solve(vp, Scenario(), 0.9)
    with pytest.raises(HypothesisViolated, match="k\\^b"):
        binary_recovery_solve(vp, Scenario(z_b=60), 0.1)


def random_recovery_economy(rng):
    y = float(rng.uniform(5, 50))
    eps = float(rng.uniform(0, 0.9 * y))
    k_s = float(rng.uniform(eps, eps + 60))
    v = float(rng.uniform(0, 30))
    p = float(rng.uniform(0.01, 0.99))
    rho, a_s = float(rng.uniform(0.1, 1)), float(rng.uniform(0, 80))
    # enforce k_lower + rho A_s > v + y p by raising A_s
    need = v + y * p - (k_s - eps)
    if need >= rho * a_s:
        a_s = need / rho + 1.0
    rec = Recovery(rho, float(rng.uniform(0, 1)), a_s, float(rng.uniform(0, 20)))
    vp = binary_params(y, k_s, v, float(rng.uniform(0, 1)), eps, p, k_big=200, v_big=5, delta=0.5, recovery=rec)
    return vp, p


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_recovery_closed_form_matches_surplus(seed):
    rng = np.random.default_rng(seed)
    vp, p = random_recovery_economy(rng)
    sc = Scenario(z_c=0.0, z_b=float(rng.uniform(0, 10)))
    y = vp.y_small.support()[0]
    # every bank pays in full at T=1 after breaking bonds
    sol = LimitSolution(xbar_s=y * (1 - p), xbar_b=y * p, x_big=y)
    rep = expected_surplus(sol, vp, sc)
    res = binary_recovery_solve(vp, sc, p)
    assert res.p_d_small == pytest.approx(default_metrics(sol, vp, sc).p_d_small, abs=1e-12)
    assert res.es2 == pytest.approx(rep.es2, abs=1e-8)


def random_binary(rng):
    y = float(rng.uniform(10, 100))
    eps = float(rng.uniform(0.5, 0.95 * y))
    return binary_params(
        y=y,
        k_s=float(rng.uniform(0, 80)),
        v_s=float(rng.uniform(0, 40)),
        w=float(rng.uniform(0.05, 0.95)),
        eps=eps,
        p_bs=0.5,
        k_big=1000.0,
    )


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_closed_form_agrees_with_numerics_when_applicable(seed):
    rng = np.random.default_rng(seed)
    vp = random_binary(rng)
    sc = Scenario(z_c=float(rng.uniform(0, 10)))
    p = float(rng.uniform(0.01, 0.99))
    r = binary_regime_solve(vp, sc, p)
    if not r.applicable:
        return
    v = with_connectivity(vp, p)
    sol = solve_limit_clearing(v, sc)
    assert default_metrics(sol, v, sc).p_d_small == pytest.approx(r.p_d_small, abs=1e-10)
    assert sol.xbar_s == pytest.approx(r.xbar, abs=1e-8)


def test_binary_economy_rejects_non_binary(fig):
    with pytest.raises(ValidationError):
        binary_economy(fig.with_params(shock_small=DiscreteDist.from_pairs([(1, 0.5), (2, 0.5)])), Scenario())
