"""
Marginal multiplicity prior and scalar posterior computations.

The number of targets quantizing to a given cell is Bin(ma, 1/m); given m'
targets there, each of the ka sensors reports the cell with probability
m'/ma, so the per-message multiplicity follows the binomial mixture

    p(k) = sum_{m'=0}^{ma} Bin(m'; ma, 1/m) Bin(k; ka, m'/ma).

The decoders see each coordinate through an effective scalar observation
r = k + N(0, xi).  posterior_mean / posterior_var are the tilted mean f and
variance g of that model; both are evaluated in the log domain with a
max-shift so small xi does not overflow, and the variance is the centered
second moment (no cancellation).  The derivative of the tilted mean obeys
the exponential-family identity f'(r) = g(r) / xi.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .scenario import _require

XI_FLOOR = 1e-12  # effective noise variances are clamped below at this


@dataclass(frozen=True, eq=False)
class CountPrior:
    """Distribution of one multiplicity K on {0, ..., ka}."""

    pmf: np.ndarray
    ka: int
    log_pmf: np.ndarray = field(init=False, repr=False, compare=False)
    ks: np.ndarray = field(init=False, repr=False, compare=False)
    mean: float = field(init=False, compare=False)
    var: float = field(init=False, compare=False)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        _require(pmf.ndim == 1 and pmf.size == self.ka + 1,
                 "pmf must have ka + 1 entries")
        _require(np.all(pmf >= 0) and np.all(np.isfinite(pmf)),
                 "pmf must be finite and nonnegative")
        _require(abs(pmf.sum() - 1.0) <= 1e-10, "pmf must sum to one")
        pmf = pmf.copy()
        pmf.setflags(write=False)
        ks = np.arange(self.ka + 1, dtype=float)
        with np.errstate(divide="ignore"):
            log_pmf = np.where(pmf > 0, np.log(np.where(pmf > 0, pmf, 1.0)), -np.inf)
        mean = float(pmf @ ks)
        var = float(pmf @ (ks - mean) ** 2)
        for name, val in (("pmf", pmf), ("log_pmf", log_pmf), ("ks", ks),
                          ("mean", mean), ("var", var)):
            object.__setattr__(self, name, val)


def _binom_log_table(n_trials, log_p, log_1mp):
    """log Bin(k; n_trials, p) for k = 0..n_trials, given log p and log(1-p)."""
    k = np.arange(n_trials + 1)
    log_comb = gammaln(n_trials + 1) - gammaln(k + 1) - gammaln(n_trials - k + 1)
    return log_comb + k * log_p + (n_trials - k) * log_1mp


def multiplicity_prior(ka, ma, m):
    """Marginal prior of one multiplicity for a (ka, ma, m) system."""
    _require(ka >= 1 and ma >= 1 and m >= 2, "need ka >= 1, ma >= 1, m >= 2")
    mm = np.arange(ma + 1)
    # mixture weights: log Bin(m'; ma, 1/m)
    log_w = _binom_log_table(ma, np.log(1.0 / m), np.log1p(-1.0 / m))
    # conditional: log Bin(k; ka, m'/ma), endpoint rows set exactly
    kk = np.arange(ka + 1)
    log_comb = gammaln(ka + 1) - gammaln(kk + 1) - gammaln(ka - kk + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_frac = np.log(mm / ma)
        log_1mfrac = np.log1p(-mm / ma)
        log_cond = (log_comb[None, :]
                    + kk[None, :] * log_frac[:, None]
                    + (ka - kk)[None, :] * log_1mfrac[:, None])
    log_cond[0, :] = -np.inf
    log_cond[0, 0] = 0.0  # no targets in the cell -> K = 0 surely
    log_cond[ma, :] = -np.inf
    log_cond[ma, ka] = 0.0  # every target in the cell -> K = ka surely
    pmf = np.exp(logsumexp(log_w[:, None] + log_cond, axis=0))
    return CountPrior(pmf=pmf, ka=ka)


def _tilted(r, xi, prior):
    """Posterior mean and centered variance arrays for r = K + N(0, xi)."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    xi_arr = np.broadcast_to(np.asarray(xi, dtype=float), r_arr.shape)
    _require(np.all(np.isfinite(r_arr)), "observations must be finite")
    _require(np.all(xi_arr > 0) and np.all(np.isfinite(xi_arr)),
             "noise variance must be positive and finite")
    xi_arr = np.maximum(xi_arr, XI_FLOOR)
    ks = prior.ks
    a = prior.log_pmf[None, :] - 0.5 * (r_arr[:, None] - ks[None, :]) ** 2 / xi_arr[:, None]
    a -= a.max(axis=1, keepdims=True)
    w = np.exp(a)
    w /= w.sum(axis=1, keepdims=True)
    mean = w @ ks
    dev = ks[None, :] - mean[:, None]
    var = np.einsum("ij,ij->i", w, dev * dev)
    return mean, var


def posterior_moments(r, xi, prior):
    """Tilted mean f and variance g in one pass; shapes follow r."""
    mean, var = _tilted(r, xi, prior)
    if np.ndim(r) == 0:
        return float(mean[0]), float(var[0])
    return mean, var


def posterior_mean(r, xi, prior):
    """f(r, xi): E[K | r], the decoders' soft estimate of one coordinate."""
    return posterior_moments(r, xi, prior)[0]


def posterior_var(r, xi, prior):
    """g(r, xi): Var[K | r]."""
    return posterior_moments(r, xi, prior)[1]


def posterior_mean_deriv(r, xi, prior):
    """df/dr = g / xi (xi clamped below at XI_FLOOR, like f and g)."""
    xi_c = np.maximum(np.asarray(xi, dtype=float), XI_FLOOR)
    var = posterior_var(r, xi_c, prior)
    out = var / xi_c
    return float(out) if np.ndim(r) == 0 else out
