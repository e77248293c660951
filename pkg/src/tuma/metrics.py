"""
Distances between discrete measures and decoding-quality metrics.

wasserstein solves the exact optimal-transport linear program.  When both
measures carry integer counts, the marginals are brought to the least common
multiple of the two totals and the LP is solved in integer units (exact
rational marginals; one division at the end), with a dual-simplex method so
the solution is a basic (vertex) one.

total_variation compares normalized multiplicity vectors directly, and
quantization_distortion is the transport cost of quantization alone (true
type against the error-free type at cell centroids).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .scenario import _require
from .decoders import estimated_type

MARGINAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Optimal coupling between two discrete measures.

    plan      -- (p, q) nonnegative matrix; row sums / column sums equal the
                 two weight vectors within MARGINAL_TOL
    objective -- sum(plan * cost) = W_p distance raised to the p-th power
    """

    plan: np.ndarray
    objective: float

    def row_marginals(self):
        return self.plan.sum(axis=1)

    def col_marginals(self):
        return self.plan.sum(axis=0)


def _lp_marginals(mu, nu):
    """Marginal vectors on a common scale; integer-exact when counts exist."""
    if mu.counts is not None and nu.counts is not None:
        ta = int(mu.counts.sum())
        tb = int(nu.counts.sum())
        common = math.lcm(ta, tb)
        a = mu.counts.astype(float) * (common // ta)
        b = nu.counts.astype(float) * (common // tb)
        return a, b, float(common)
    a = mu.weights / mu.weights.sum()
    b = nu.weights / nu.weights.sum()
    return a, b, 1.0


def wasserstein(mu, nu, p=2.0):
    """Exact p-Wasserstein distance between two discrete measures.

    Returns (distance, TransportPlan).  The transport LP
        min sum_ij e_ij ||s_i - q_j||^p  s.t.  e >= 0, marginals fixed
    is solved exactly; distance = objective ** (1/p).
    """
    _require(p >= 1.0, "order p must be >= 1")
    cost = cdist(mu.locations, nu.locations)
    if p != 1.0:
        cost = cost**p
    rows, cols = cost.shape
    a, b, scale = _lp_marginals(mu, nu)

    # equality constraints: all row sums, then all column sums but the last
    # (redundant once the problem is balanced)
    row_block = sparse.kron(sparse.eye(rows), np.ones((1, cols))).tocsr()
    col_block = sparse.kron(np.ones((1, rows)), sparse.eye(cols)).tocsr()
    a_eq = sparse.vstack([row_block, col_block[:-1]], format="csr")
    b_eq = np.concatenate([a, b[:-1]])

    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs-ds")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(rows, cols) / scale
    plan = np.where(plan > 0, plan, 0.0)  # simplex roundoff only

    row_err = np.abs(plan.sum(axis=1) - mu.weights).max()
    col_err = np.abs(plan.sum(axis=0) - nu.weights).max()
    if max(row_err, col_err) > MARGINAL_TOL:
        raise RuntimeError("transport plan marginals out of tolerance")

    objective = float((plan * cost).sum())
    distance = objective ** (1.0 / p)
    return distance, TransportPlan(plan=plan, objective=objective)


def total_variation(k, k_hat):
    """TV distance between normalized multiplicity vectors, 0.5 sum |.-.|."""
    k = np.asarray(k, dtype=float)
    k_hat = np.asarray(k_hat, dtype=float)
    _require(k.shape == k_hat.shape and k.ndim == 1,
             "multiplicity vectors must share a 1-d shape")
    _require(np.all(k >= 0) and np.all(k_hat >= 0), "counts must be nonnegative")
    ts, te = k.sum(), k_hat.sum()
    _require(ts > 0 and te > 0, "multiplicity vectors must not be all-zero")
    return 0.5 * float(np.abs(k / ts - k_hat / te).sum())


def quantization_distortion(true_type_measure, k, quantizer, p=2.0):
    """W_p cost of quantization alone: true type vs the type at centroids.

    k is the true multiplicity vector, i.e. the channel-error-free decoder
    output; the returned value is the distortion floor any decoder inherits.
    """
    est = estimated_type(np.asarray(k), quantizer)
    distance, _ = wasserstein(true_type_measure, est, p)
    return distance
