"""Random liability graphs: sampling, weight construction, regular networks."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import RequiresDeterministicY, ZeroEtaBar
from .model import validate_params

DENSE_MAX_N = 4096
_MASK64 = (1 << 64) - 1


def splitmix64(state):
    """One splitmix64 step; returns ``(next_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def derive_seeds(root_seed, count):
    """Derive ``count`` child seeds from a root seed with splitmix64."""
    state = int(root_seed) & _MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64(state)
        out.append(z)
    return out


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled finite world.

    ``weights_ss[j, i]`` is the fraction of bank j's liability owed to bank i,
    so the aggregate received by bank i is ``weights_ss.T @ x``. Dense for
    ``n <= DENSE_MAX_N``, CSR above.
    """

    indicators: object
    eta_sb_draws: np.ndarray
    eta_bs_draws: np.ndarray
    shock_draws: np.ndarray
    k_draws: np.ndarray
    y_draws: np.ndarray
    weights_ss: object
    weights_sb: np.ndarray
    weights_bs: np.ndarray
    eta_bar: float
    seed: int | None
    resampled_rows: int = 0

    @property
    def n(self):
        return len(self.eta_sb_draws)

    @property
    def sparse(self):
        return sp.issparse(self.weights_ss)

    def aggregate_small(self, x):
        """X̄_i = sum_j x_j W_{j,i}."""
        return self.weights_ss.T @ x

    def aggregate_big(self, x):
        """X̄^b = (1/n) sum_j x_j W_{j,b}."""
        return float(np.dot(x, self.weights_sb)) / self.n


def build_network(indicators, eta_sb, eta_bs, shocks, k, y, seed=None, resampled_rows=0):
    """Construct the liability weights from explicit indicators and draws."""
    eta_sb = np.asarray(eta_sb, dtype=float)
    eta_bs = np.asarray(eta_bs, dtype=float)
    n = len(eta_sb)
    if sp.issparse(indicators):
        ind = sp.csr_matrix(indicators, dtype=float)
        ind.setdiag(0)
        ind.eliminate_zeros()
        deg = np.asarray(ind.sum(axis=1)).ravel()
    else:
        ind = np.array(indicators, dtype=bool)
        np.fill_diagonal(ind, False)
        deg = ind.sum(axis=1).astype(float)
    if ind.shape != (n, n):
        raise ValueError(f"indicator matrix must be {n}x{n}, got {ind.shape}")
    if np.any(deg == 0):
        raise ValueError("every bank needs at least one small-bank creditor")
    scale = (1.0 - eta_sb) / deg
    if sp.issparse(ind):
        weights = sp.diags(scale) @ ind
        weights = sp.csr_matrix(weights)
    else:
        weights = ind * scale[:, None]
    eta_bar = float(eta_bs.sum())
    if eta_bar <= 0:
        raise ZeroEtaBar("all eta_bs draws are zero; big-bank weights undefined")
    return NetworkRealization(
        indicators=ind,
        eta_sb_draws=eta_sb,
        eta_bs_draws=eta_bs,
        shock_draws=np.asarray(shocks, dtype=float),
        k_draws=np.asarray(k, dtype=float),
        y_draws=np.asarray(y, dtype=float),
        weights_ss=weights,
        weights_sb=eta_sb.copy(),
        weights_bs=eta_bs / eta_bar,
        eta_bar=eta_bar,
        seed=seed,
        resampled_rows=resampled_rows,
    )


def _dense_indicators(rng, n, p):
    ind = rng.random((n, n)) < p
    np.fill_diagonal(ind, False)
    resampled = 0
    if n > 1:
        empty = np.flatnonzero(~ind.any(axis=1))
        for j in empty:
            while not ind[j].any():
                row = rng.random(n) < p
                row[j] = False
                ind[j] = row
                resampled += 1
    return ind, resampled


def _sparse_indicators(rng, n, p):
    rows, cols = [], []
    resampled = 0
    for j in range(n):
        deg = rng.binomial(n - 1, p)
        while deg == 0:
            resampled += 1
            deg = rng.binomial(n - 1, p)
        nbrs = rng.choice(n - 1, size=deg, replace=False)
        nbrs[nbrs >= j] += 1
        rows.append(np.full(deg, j))
        cols.append(nbrs)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    ind = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return ind, resampled


def sample_network(vp, seed):
    """Sample indicators and per-bank draws, then build weights.

    Rows with no small-bank creditor are redrawn until non-empty; the number
    of redraws is kept in ``resampled_rows``.
    """
    n = vp.n
    if n < 2:
        raise ValueError("sampling a network needs n >= 2")
    rng = np.random.default_rng(int(seed))
    if n <= DENSE_MAX_N:
        ind, resampled = _dense_indicators(rng, n, vp.p_ss)
    else:
        ind, resampled = _sparse_indicators(rng, n, vp.p_ss)
    eta_sb = vp.eta_sb.sample(rng, n)
    eta_bs = vp.eta_bs.sample(rng, n)
    shocks = vp.shock_small.sample(rng, n)
    k = vp.k_small.sample(rng, n)
    y = vp.y_small.sample(rng, n)
    return build_network(ind, eta_sb, eta_bs, shocks, k, y, seed=int(seed), resampled_rows=resampled)


def make_regular(vp):
    """Set eta_bs equal in law to eta_sb and y_big = y * E[eta_bs]."""
    if not vp.y_small.is_point_mass:
        raise RequiresDeterministicY("regular networks need a deterministic small-bank liability")
    y = vp.y_small.support()[0]
    params = replace(vp.params, eta_bs=vp.eta_sb, y_big=y * vp.eta_sb.mean())
    return validate_params(params, regular=True)


def regularity_mismatch(net, y_big):
    """Mean over small banks of |claims_i - liabilities_i|."""
    n = net.n
    liab_ss = net.weights_ss.multiply(net.y_draws[:, None]) if net.sparse else net.weights_ss * net.y_draws[:, None]
    claims = np.asarray(liab_ss.sum(axis=0)).ravel()
    claims = claims + net.eta_bs_draws * n * y_big / net.eta_bar
    return float(np.mean(np.abs(claims - net.y_draws)))


def row_sums(net):
    """Total outgoing weight per small bank (should be 1) and for the big bank."""
    small = np.asarray(net.weights_ss.sum(axis=1)).ravel() + net.weights_sb
    return small, float(net.weights_bs.sum())


def dump_network(net, out_dir):
    """Write ``edges.csv`` (j, i, W_ji) and ``network.json`` (draws, seed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    coo = sp.coo_matrix(net.weights_ss)
    with open(out / "edges.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "i", "w"])
        for j, i, w in zip(coo.row, coo.col, coo.data):
            writer.writerow([int(j), int(i), repr(float(w))])
    header = {
        "n": net.n,
        "seed": net.seed,
        "eta_bar": net.eta_bar,
        "resampled_rows": net.resampled_rows,
        "eta_sb": net.eta_sb_draws.tolist(),
        "eta_bs": net.eta_bs_draws.tolist(),
        "shock": net.shock_draws.tolist(),
        "k": net.k_draws.tolist(),
        "y": net.y_draws.tolist(),
    }
    (out / "network.json").write_text(json.dumps(header, indent=1) + "\n")
