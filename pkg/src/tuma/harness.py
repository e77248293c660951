"""
Monte Carlo harness: single trials, parameter sweeps, CSV reports.

Each trial draws its own random stream from (seed, trial_index), so results
do not depend on execution order or worker count, and sweeps reuse the same
trial streams at every swept value (common random numbers — scene draws are
paired across values).  Diverged decodes contribute their last finite
estimate and are counted in the diverged column.
"""

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .scenario import (SystemConfig, _require, assign_sensors, draw_targets,
                       trial_rng, true_multiplicity, true_type)
from .codebooks import grid_codebook, hadamard_codebook
from .channel import transmit
from .denoiser import multiplicity_prior
from .decoders import (ALGORITHMS, DecoderDiverged, DecoderOptions, decode,
                       estimated_type)
from .metrics import quantization_distortion, total_variation, wasserstein

CSV_COLUMNS = ("sweep_param", "value", "decoder", "n", "ka", "ma", "bits",
               "snr_db", "trials", "tv_mean", "tv_se", "wp_mean", "wp_se",
               "distortion_mean", "diverged_count")

SWEEPABLE = ("ma", "bits", "n", "snr_db")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base configuration, a swept field, and decoders to run.

    param may also be "none" (single-point run); values then must hold one
    placeholder entry.
    """

    base: SystemConfig
    param: str = "none"
    values: tuple = (None,)
    decoders: tuple = ("amp",)
    out: str = None

    def __post_init__(self):
        _require(self.param == "none" or self.param in SWEEPABLE,
                 f"param must be 'none' or one of {SWEEPABLE}")
        _require(len(self.values) >= 1, "values must be nonempty")
        for dec in self.decoders:
            _require(dec in ALGORITHMS, f"unknown decoder {dec!r}")


@dataclass(frozen=True, eq=False)
class TrialResult:
    """Metrics of one decoded trial."""

    trial_index: int
    decoder: str
    tv: float
    wp: float
    distortion: float
    iterations_run: int
    wall_time_s: float
    diverged: bool
    fallback_used: bool


@lru_cache(maxsize=16)
def _assets(n, ka, ma, m):
    """Quantizer, transmission codebook, and count prior for one geometry."""
    return grid_codebook(m), hadamard_codebook(n, m), multiplicity_prior(ka, ma, m)


def run_trial(config, decoder, trial_index):
    """Simulate and decode one scene; returns a TrialResult.

    The random stream depends only on (config.seed, trial_index), so the
    same trial can be reproduced in isolation.
    """
    rng = trial_rng(config.seed, trial_index)
    quantizer, cb, prior = _assets(config.n, config.ka, config.ma, config.m)
    states = draw_targets(rng, config.ma)
    assignment = assign_sensors(rng, config.ka, config.ma)
    k = true_multiplicity(states, assignment, quantizer)
    received = transmit(cb, k, config.snr_db, rng)

    options = DecoderOptions(algorithm=decoder, max_iters=config.max_iters)
    start = time.perf_counter()
    try:
        report = decode(received, cb, prior, options)
    except DecoderDiverged as err:
        report = err.report
    wall = time.perf_counter() - start

    scene_type = true_type(states, assignment)
    estimate = estimated_type(report.k_hat, quantizer, k_soft=report.k_soft)
    tv = total_variation(k, report.k_hat)
    wp, _ = wasserstein(scene_type, estimate, config.p_order)
    distortion = quantization_distortion(scene_type, k, quantizer,
                                         config.p_order)
    return TrialResult(trial_index=trial_index, decoder=decoder, tv=tv, wp=wp,
                       distortion=distortion,
                       iterations_run=report.iterations_run,
                       wall_time_s=wall, diverged=report.diverged,
                       fallback_used=report.fallback_used)


def _trial_star(args):
    return run_trial(*args)


def worker_count():
    """Workers from TUMA_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("TUMA_THREADS", "")
    if raw.strip():
        count = int(raw)
        _require(count >= 1, "TUMA_THREADS must be >= 1")
        return count
    return os.cpu_count() or 1


def run_trials(config, decoder, workers=None):
    """All trials of one configuration, in trial-index order."""
    workers = worker_count() if workers is None else workers
    tasks = [(config, decoder, t) for t in range(config.trials)]
    if workers <= 1 or config.trials == 1:
        return [run_trial(*task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, config.trials // (8 * workers))
        results = list(pool.map(_trial_star, tasks, chunksize=chunk))
    return sorted(results, key=lambda r: r.trial_index)


def derive_config(base, param, value):
    """Base config with one swept field replaced ('bits' sets m = 2**value)."""
    if param == "none" or value is None:
        return base
    if param == "bits":
        return replace(base, m=2 ** int(value))
    if param == "snr_db":
        return replace(base, snr_db=float(value))
    return replace(base, **{param: int(value)})


def aggregate(results, config, decoder, param="none", value=None):
    """Mean/SE summary row (dict in CSV_COLUMNS order) for one cell."""
    trials = len(results)
    tvs = [r.tv for r in results]
    wps = [r.wp for r in results]
    dist = [r.distortion for r in results]

    def se(vals):
        if len(vals) < 2:
            return 0.0
        return float(np.std(vals, ddof=1) / np.sqrt(len(vals)))

    return {
        "sweep_param": param,
        "value": "" if value is None else value,
        "decoder": decoder,
        "n": config.n,
        "ka": config.ka,
        "ma": config.ma,
        "bits": config.bits,
        "snr_db": config.snr_db,
        "trials": trials,
        "tv_mean": float(np.mean(tvs)),
        "tv_se": se(tvs),
        "wp_mean": float(np.mean(wps)),
        "wp_se": se(wps),
        "distortion_mean": float(np.mean(dist)),
        "diverged_count": sum(r.diverged for r in results),
    }


def run_sweep(spec, workers=None, log=None):
    """Run every (value, decoder) cell of a sweep; returns the summary rows.

    When spec.out is set, rows are appended to the CSV as they finish, so a
    partial file is left behind if the run is interrupted.
    """
    rows = []
    writer = None
    handle = None
    if spec.out:
        handle = open(spec.out, "w", newline="")
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        handle.flush()
    try:
        for value in spec.values:
            config = derive_config(spec.base, spec.param, value)
            for decoder in spec.decoders:
                results = run_trials(config, decoder, workers=workers)
                row = aggregate(results, config, decoder, spec.param, value)
                rows.append(row)
                if writer is not None:
                    writer.writerow(row)
                    handle.flush()
                if log is not None:
                    log(row)
    finally:
        if handle is not None:
            handle.close()
    return rows
