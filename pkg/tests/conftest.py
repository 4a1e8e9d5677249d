import numpy as np
import pytest

from sysrisk.model import DiscreteDist, ModelParams, Recovery, validate_params

FIG_XBAR = 7.323232323232323


def fig_params(n=500, p_ss=1.0, p_bs=0.9, k_big=55.0, recovery=None):
    """The reference economy: y=80, k=(55, 25), v=12, Z~Bin(0.4, 20), delta=0.4."""
    eta = DiscreteDist.indicator(p_bs)
    return validate_params(
        ModelParams(
            n=n,
            p_ss=p_ss,
            eta_sb=eta,
            eta_bs=eta,
            shock_small=DiscreteDist.binary(0.4, 20.0),
            k_small=DiscreteDist.point(25.0),
            y_small=DiscreteDist.point(80.0),
            y_big=80.0 * p_bs,
            k_big=k_big,
            v_small=12.0,
            v_big=12.0,
            delta=0.4,
            recovery=recovery,
        ),
        regular=True,
    )


def binary_params(y, k_s, v_s, w, eps, p_bs, k_big, v_big=0.0, delta=0.0, recovery=None):
    eta = DiscreteDist.indicator(p_bs)
    return validate_params(
        ModelParams(
            n=100,
            p_ss=1.0,
            eta_sb=eta,
            eta_bs=eta,
            shock_small=DiscreteDist.binary(w, eps),
            k_small=DiscreteDist.point(k_s),
            y_small=DiscreteDist.point(y),
            y_big=y * p_bs,
            k_big=k_big,
            v_small=v_s,
            v_big=v_big,
            delta=delta,
            recovery=recovery,
        ),
        regular=True,
    )


def _random_law(rng, low, high, atoms, integer=False):
    vals = rng.integers(low, high + 1, size=atoms) if integer else rng.uniform(low, high, size=atoms)
    probs = rng.dirichlet(np.ones(atoms))
    return DiscreteDist.from_pairs(list(zip(vals.tolist(), probs.tolist())))


def random_params(rng, n=None, integer=False, with_recovery=True):
    """A random valid economy with small discrete laws."""
    n = int(rng.integers(2, 7)) if n is None else n
    while True:
        eta_sb = _random_law(rng, 0.0, 1.0, int(rng.integers(1, 3)))
        if 0.02 < eta_sb.mean() < 0.98:
            break
    p = float(rng.uniform(0.05, 1.0))
    eta_bs = DiscreteDist.from_pairs([(1.0, p), (0.0, 1.0 - p)]) if rng.random() < 0.5 else _random_law(
        rng, 0.0, 1.0, 2
    )
    recovery = None
    if with_recovery:
        recovery = Recovery(*rng.uniform(0, 1, 2).tolist(), *rng.uniform(0, 20, 2).tolist())
    return validate_params(
        ModelParams(
            n=n,
            p_ss=float(rng.uniform(0.3, 1.0)),
            eta_sb=eta_sb,
            eta_bs=eta_bs,
            shock_small=_random_law(rng, 0, 15, int(rng.integers(1, 3)), integer),
            k_small=_random_law(rng, 0, 30, int(rng.integers(1, 3)), integer),
            y_small=_random_law(rng, 1, 20, int(rng.integers(1, 3)), integer),
            y_big=float(rng.integers(1, 20)) if integer else float(rng.uniform(1, 20)),
            k_big=float(rng.integers(0, 40)) if integer else float(rng.uniform(0, 40)),
            v_small=float(rng.integers(0, 15)) if integer else float(rng.uniform(0, 15)),
            v_big=float(rng.integers(0, 15)) if integer else float(rng.uniform(0, 15)),
            delta=float(rng.uniform(0, 1)),
            recovery=recovery,
        )
    )


@pytest.fixture
def fig():
    return fig_params()


ACCEPTANCE_LINES = []


def record_acceptance(cid, ok, detail):
    line = f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
