"""
Iterative Bayesian decoders for multiplicity recovery.

All three decoders estimate the multiplicity vector k from
y = sqrt(nP) C k + z using the same scalar count posterior (denoiser) and
differ in how they track the effective observation and its uncertainty:

  amp        -- approximate message passing: matched-filter statistic with an
                Onsager-corrected residual and one scalar noise-variance track
                xi = ||z||^2 / (n nP);
  scalar_amp -- generalized AMP with per-coordinate variance tracks, using
                only elementwise-squared codebook products;
  ep         -- expectation propagation: Gaussian sites per coordinate, an
                exact multivariate Gaussian projection of the full likelihood,
                and moment matching against the count prior.

Every decoder reports the soft posterior-mean estimate, the rounded and
clamped integer estimate, and per-iteration diagnostics.  Iterations stop
early once the rounded estimate repeats (disable via options.early_stop to
run the full iteration budget); non-finite state raises DecoderDiverged
carrying a report built from the last finite estimate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .scenario import _require
from .codebooks import adjoint, apply, sq_adjoint, sq_apply
from .denoiser import posterior_moments

ALGORITHMS = ("amp", "scalar_amp", "ep")


@dataclass(frozen=True)
class DecoderOptions:
    """Knobs shared by all decoders.

    algorithm      -- one of "amp", "scalar_amp", "ep"
    max_iters      -- iteration cap (early exit on a repeated rounded estimate)
    ep_damping     -- EP site update damping in [0, 1); 0 is undamped
    variance_clamp -- (floor, ceiling) applied to every variance-like quantity
    early_stop     -- exit once the rounded estimate repeats (default).  The
                      repeat heuristic can fire while dense systems are still
                      converging slowly, so property tests that need the
                      iteration's actual fixed point turn it off.
    """

    algorithm: str = "amp"
    max_iters: int = 10
    ep_damping: float = 0.3
    variance_clamp: tuple = (1e-12, 1e12)
    early_stop: bool = True

    def __post_init__(self):
        _require(self.algorithm in ALGORITHMS,
                 f"algorithm must be one of {ALGORITHMS}")
        _require(self.max_iters >= 1, "max_iters must be positive")
        _require(0.0 <= self.ep_damping < 1.0, "ep_damping must be in [0, 1)")
        lo, hi = self.variance_clamp
        _require(0 < lo < hi, "variance_clamp must be increasing and positive")
        _require(isinstance(self.early_stop, bool),
                 "early_stop must be a bool")


@dataclass(frozen=True, eq=False)
class DecoderReport:
    """Outcome of one decode.

    k_hat          -- rounded integer estimate, clamped to [0, ka], sum >= 1
    k_soft         -- posterior-mean estimate the rounding was applied to
    iterations_run -- iterations actually executed
    xi_track       -- mean effective noise variance per iteration
    residual_track -- residual norm per iteration
    fallback_used  -- True if the all-zero rounding fallback fired
    diverged       -- True if the run was cut short by non-finite values
    """

    algorithm: str
    k_hat: np.ndarray
    k_soft: np.ndarray
    iterations_run: int
    xi_track: tuple
    residual_track: tuple
    fallback_used: bool = False
    diverged: bool = False


class DecoderDiverged(RuntimeError):
    """Decoder state left the finite range; carries the last finite report."""

    def __init__(self, report):
        super().__init__(f"{report.algorithm} decoder diverged at iteration "
                         f"{report.iterations_run}")
        self.report = report


def round_estimate(k_soft, ka):
    """Round half away from zero, then clamp into [0, ka]."""
    k_soft = np.asarray(k_soft, dtype=float)
    rounded = np.sign(k_soft) * np.floor(np.abs(k_soft) + 0.5)
    return np.clip(rounded, 0, ka).astype(np.int64)


def estimated_type(k_hat, quantizer, k_soft=None):
    """Normalized discrete measure at cell centroids with masses k_hat.

    If k_hat is all zero the message with the largest soft score receives
    count one (k_soft required in that case), so the result is always a
    probability measure.
    """
    from .scenario import DiscreteMeasure

    k = np.asarray(k_hat)
    _require(k.ndim == 1 and k.size == quantizer.m, "k_hat must have m entries")
    _require(np.issubdtype(k.dtype, np.integer) and np.all(k >= 0),
             "k_hat must be nonnegative integers")
    if k.sum() == 0:
        _require(k_soft is not None,
                 "all-zero estimate needs soft scores for the fallback")
        k = k.copy()
        k[int(np.argmax(k_soft))] = 1
    keep = k > 0
    return DiscreteMeasure.from_counts(k[keep], quantizer.centroids[keep])


def _finalize(k_soft, ka):
    """Rounded estimate with the all-zero fallback; returns (k_hat, fallback)."""
    k_hat = round_estimate(k_soft, ka)
    fallback = k_hat.sum() == 0
    if fallback:
        k_hat[int(np.argmax(k_soft))] = 1
    return k_hat, fallback


class _Loop:
    """Shared bookkeeping: early stopping, diagnostics, divergence reports."""

    def __init__(self, algorithm, ka, init_soft, early_stop=True):
        self.algorithm = algorithm
        self.ka = ka
        self.k_soft = np.asarray(init_soft, dtype=float)
        self.early_stop = early_stop
        self.prev_rounded = None
        self.xi_track = []
        self.residual_track = []
        self.iterations = 0

    def diverged(self):
        report = self.report(diverged=True)
        return DecoderDiverged(report)

    def finite_or_raise(self, *arrays):
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise self.diverged()

    def record(self, k_soft, xi_mean, residual):
        """Accept the iteration's estimate; True once rounding has settled.

        Settled means the rounded estimates of two consecutive iterations
        coincide.  With early stopping disabled the loop always runs to the
        iteration cap and this never returns True.
        """
        self.k_soft = k_soft
        self.xi_track.append(float(xi_mean))
        self.residual_track.append(float(residual))
        rounded = round_estimate(k_soft, self.ka)
        repeated = self.prev_rounded is not None and np.array_equal(
            rounded, self.prev_rounded)
        self.prev_rounded = rounded
        return repeated and self.early_stop

    def report(self, diverged=False):
        k_hat, fallback = _finalize(self.k_soft, self.ka)
        return DecoderReport(algorithm=self.algorithm, k_hat=k_hat,
                             k_soft=self.k_soft,
                             iterations_run=self.iterations,
                             xi_track=tuple(self.xi_track),
                             residual_track=tuple(self.residual_track),
                             fallback_used=bool(fallback), diverged=diverged)


def amp_decode(received, cb, prior, options=None):
    """AMP with a scalar effective-noise track.

    Per iteration: r = (C^T z + sqrt(nP) k_hat) / sqrt(nP) is treated as
    k + N(0, xi) with xi = ||z||^2 / (n nP); the denoised estimate feeds the
    next residual z = y - sqrt(nP) C k_hat + (m/n) <f'> z_prev, whose last
    term is the Onsager correction with <f'> the mean denoiser derivative
    g / xi.
    """
    opts = options or DecoderOptions(algorithm="amp")
    n, m = cb.n, cb.m
    npw = n * received.power
    snp = np.sqrt(npw)
    lo, _ = opts.variance_clamp

    loop = _Loop("amp", prior.ka, np.full(m, prior.mean), opts.early_stop)
    z = received.y - snp * apply(cb, loop.k_soft)
    for _ in range(opts.max_iters):
        loop.iterations += 1
        xi = float(z @ z) / (n * npw)
        r = adjoint(cb, z) / snp + loop.k_soft
        loop.finite_or_raise(r, [xi])
        xi = max(xi, lo)
        k_new, v_new = posterior_moments(r, xi, prior)
        onsager = (m / n) * float(np.mean(v_new)) / xi
        z = received.y - snp * apply(cb, k_new) + onsager * z
        loop.finite_or_raise(k_new, z)
        if loop.record(k_new, xi, np.linalg.norm(z)):
            break
    return loop.report()


def scalar_amp_decode(received, cb, prior, options=None):
    """Generalized AMP with per-coordinate variance tracks.

    Works on the rescaled model y' = y/sqrt(nP) = C k + N(0, sigma2 I) with
    sigma2 = 1/(nP).  Per iteration: output variances v = |C|^2 v_hat,
    corrected output mean z = C k_hat - v (y' - z_prev)/(sigma2 + v_prev),
    input variances xi = 1 / ((|C|^2)^T (sigma2 + v)^{-1}), pseudo-
    observations r = k_hat + xi C^T ((y' - z)/(sigma2 + v)), then moment
    matching against the count prior.
    """
    opts = options or DecoderOptions(algorithm="scalar_amp")
    n, m = cb.n, cb.m
    npw = n * received.power
    snp = np.sqrt(npw)
    sigma2 = 1.0 / npw
    lo, hi = opts.variance_clamp

    ys = received.y / snp
    loop = _Loop("scalar_amp", prior.ka, np.full(m, prior.mean),
                 opts.early_stop)
    v_soft = np.full(m, prior.var)
    z = ys.copy()  # zero first-iteration correction term
    v = sq_apply(cb, v_soft)
    for _ in range(opts.max_iters):
        loop.iterations += 1
        v_new = sq_apply(cb, v_soft)
        z = apply(cb, loop.k_soft) - v_new * (ys - z) / (sigma2 + v)
        v = v_new
        scaled = (ys - z) / (sigma2 + v)
        with np.errstate(over="ignore"):
            xi = 1.0 / sq_adjoint(cb, 1.0 / (sigma2 + v))
        r = loop.k_soft + xi * adjoint(cb, scaled)
        loop.finite_or_raise(r, xi)
        xi = np.clip(xi, lo, hi)
        k_new, v_soft = posterior_moments(r, xi, prior)
        loop.finite_or_raise(k_new, v_soft)
        residual = np.linalg.norm(received.y - snp * apply(cb, k_new))
        if loop.record(k_new, np.mean(xi), residual):
            break
    return loop.report()


def _ep_projection(cb, xi1, eta1, lin, sigma2):
    """Marginal variances/means of N(mu1, Xi1) x N(y'; C k, sigma2 I).

    lin is the likelihood's linear natural parameter C^T y' / sigma2.  Uses
    the Woodbury identity
    (Xi1^{-1} + C^T C / sigma2)^{-1}
        = Xi1 - Xi1 C^T (sigma2 I + C Xi1 C^T)^{-1} C Xi1,
    Cholesky-factored on the n side; when the columns of C are exactly
    orthonormal (n >= m) the posterior covariance is diagonal and everything
    is elementwise.
    """
    if cb.orthonormal_columns:
        xi0_hat = 1.0 / (1.0 / xi1 + 1.0 / sigma2)
        mu0_hat = xi0_hat * (eta1 + lin)
        return xi0_hat, mu0_hat
    dense = cb.dense()
    s_mat = (dense * xi1) @ dense.T
    s_mat[np.diag_indices_from(s_mat)] += sigma2
    chol = cholesky(s_mat, lower=True)
    half = solve_triangular(chol, dense, lower=True)
    xi0_hat = xi1 - xi1**2 * np.einsum("ji,ji->i", half, half)
    w = xi1 * (eta1 + lin)
    u = cho_solve((chol, True), dense @ w)
    mu0_hat = w - xi1 * (dense.T @ u)
    return xi0_hat, mu0_hat


def ep_decode(received, cb, prior, options=None):
    """Expectation propagation with Gaussian sites.

    Sites start at the prior-matched Gaussian N(prior.mean, prior.var), so
    the first Gaussian projection is already the Gaussian approximation of
    the full posterior.  Per iteration: exact Gaussian projection of sites
    times likelihood, cavity update by natural-parameter subtraction, tilted
    moments of the cavity-tilted count prior, then the site update, damped
    in natural parameters.  Two safeguards keep the natural parameters in
    range: a site update whose precision would be non-positive resets that
    site to (near-)flat, and a cavity precision that comes out non-positive
    (possible only through roundoff, since the projected variance never
    exceeds the site variance) is clamped to near-flat as well.  Clamping
    either to a near-delta spike instead is an absorbing state that pins
    the coordinate at zero, so the floor is reserved for true spikes coming
    out of the moment match.
    """
    opts = options or DecoderOptions(algorithm="ep")
    npw = cb.n * received.power
    snp = np.sqrt(npw)
    sigma2 = 1.0 / npw  # noise variance of the y' = y/sqrt(nP) model
    lo, hi = opts.variance_clamp
    damp = opts.ep_damping

    lin = snp * adjoint(cb, received.y)  # C^T y' / sigma2 = sqrt(nP) C^T y
    var0 = np.clip(prior.var, lo, hi)
    lam1 = np.full(cb.m, 1.0 / var0)
    eta1 = np.full(cb.m, prior.mean / var0)
    loop = _Loop("ep", prior.ka, np.full(cb.m, prior.mean), opts.early_stop)
    for _ in range(opts.max_iters):
        loop.iterations += 1
        # Gaussian projection of sites x likelihood
        xi1 = np.clip(1.0 / lam1, lo, hi)
        xi0_hat, mu0_hat = _ep_projection(cb, xi1, eta1, lin, sigma2)
        loop.finite_or_raise(xi0_hat, mu0_hat)
        xi0_hat = np.clip(xi0_hat, lo, hi)
        # cavity update: remove each site from its marginal
        lam0 = np.clip(1.0 / xi0_hat - lam1, 1.0 / hi, 1.0 / lo)
        eta0 = mu0_hat / xi0_hat - eta1
        xi0 = 1.0 / lam0
        mu0 = xi0 * eta0
        loop.finite_or_raise(mu0, xi0)
        # tilted moments of the cavity-tilted count prior
        k_new, v_new = posterior_moments(mu0, xi0, prior)
        loop.finite_or_raise(k_new, v_new)
        v_new = np.clip(v_new, lo, hi)
        # site update: divide the tilted marginal by the cavity
        lam_raw = 1.0 / v_new - 1.0 / xi0
        eta_raw = k_new / v_new - mu0 / xi0
        valid = lam_raw > 0
        lam_new = np.where(valid, lam_raw, 1.0 / hi)
        eta_new = np.where(valid, eta_raw, 0.0)
        lam1 = (1.0 - damp) * lam_new + damp * lam1
        eta1 = (1.0 - damp) * eta_new + damp * eta1
        lam1 = np.clip(lam1, 1.0 / hi, 1.0 / lo)
        residual = np.linalg.norm(received.y - snp * apply(cb, k_new))
        if loop.record(k_new, np.mean(xi0), residual):
            break
    return loop.report()


_DECODERS = {"amp": amp_decode, "scalar_amp": scalar_amp_decode,
             "ep": ep_decode}


def decode(received, cb, prior, options):
    """Dispatch to the decoder selected by options.algorithm."""
    _require(options.algorithm in _DECODERS, "unknown algorithm")
    return _DECODERS[options.algorithm](received, cb, prior, options)
