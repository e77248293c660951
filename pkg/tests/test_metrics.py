"""Transport distances, total variation, and the quantization floor."""

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from tuma import (ConfigError, DiscreteMeasure, grid_codebook,
                  quantization_distortion, total_variation, true_type,
                  wasserstein)
from oracles import transport_vertex_oracle


def random_measure(rng, max_atoms=4):
    size = int(rng.integers(1, max_atoms + 1))
    counts = rng.integers(1, 6, size=size)
    return DiscreteMeasure.from_counts(counts, rng.random((size, 2)))


# ---------------------------------------------------------------------------
# wasserstein


def test_wasserstein_identity_is_zero():
    mu = DiscreteMeasure.from_counts([2, 3], [[0.1, 0.2], [0.7, 0.9]])
    dist, plan = wasserstein(mu, mu, 2.0)
    assert dist < 1e-9
    assert np.abs(plan.row_marginals() - mu.weights).max() < 1e-9
    assert np.abs(plan.col_marginals() - mu.weights).max() < 1e-9


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_wasserstein_single_atoms_is_plain_distance(p):
    mu = DiscreteMeasure.from_counts([1], [[0.1, 0.4]])
    nu = DiscreteMeasure.from_counts([1], [[0.7, 0.2]])
    dist, _ = wasserstein(mu, nu, p)
    assert abs(dist - np.hypot(0.6, 0.2)) < 1e-12


def test_wasserstein_parallel_shift():
    mu = DiscreteMeasure.from_counts([1, 1], [[0.0, 0.0], [1.0, 0.0]])
    nu = DiscreteMeasure.from_counts([1, 1], [[0.0, 1.0], [1.0, 1.0]])
    dist, plan = wasserstein(mu, nu, 2.0)
    assert abs(dist - 1.0) < 1e-9
    # the optimal coupling moves each atom straight up, never across
    assert np.abs(plan.plan - 0.5 * np.eye(2)).max() < 1e-9


def test_wasserstein_splits_unequal_supports():
    mu = DiscreteMeasure.from_counts([1], [[0.0, 0.0]])
    nu = DiscreteMeasure.from_counts([1, 1], [[0.0, 0.0], [1.0, 0.0]])
    dist2, _ = wasserstein(mu, nu, 2.0)
    assert abs(dist2 - np.sqrt(0.5)) < 1e-9
    dist1, _ = wasserstein(mu, nu, 1.0)
    assert abs(dist1 - 0.5) < 1e-9


def test_wasserstein_counts_and_weights_paths_agree():
    rng = np.random.default_rng(31)
    for _ in range(10):
        mu = random_measure(rng)
        nu = random_measure(rng)
        bare_mu = DiscreteMeasure(weights=mu.weights, locations=mu.locations)
        bare_nu = DiscreteMeasure(weights=nu.weights, locations=nu.locations)
        with_counts, _ = wasserstein(mu, nu, 2.0)
        without, _ = wasserstein(bare_mu, bare_nu, 2.0)
        assert abs(with_counts - without) < 1e-9


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_wasserstein_matches_vertex_enumeration(p):
    rng = np.random.default_rng(37)
    for _ in range(20):
        mu = random_measure(rng)
        nu = random_measure(rng)
        dist, _ = wasserstein(mu, nu, p)
        cost = cdist(mu.locations, nu.locations) ** p
        best = transport_vertex_oracle(mu.weights, nu.weights, cost)
        assert abs(dist - best ** (1.0 / p)) < 1e-8


def test_wasserstein_metric_axioms():
    rng = np.random.default_rng(41)
    for _ in range(20):
        mu, nu, rho = (random_measure(rng) for _ in range(3))
        d_ab, _ = wasserstein(mu, nu, 2.0)
        d_ba, _ = wasserstein(nu, mu, 2.0)
        d_ac, _ = wasserstein(mu, rho, 2.0)
        d_bc, _ = wasserstein(nu, rho, 2.0)
        assert d_ab >= 0.0
        assert abs(d_ab - d_ba) < 1e-9
        assert d_ac <= d_ab + d_bc + 1e-9


def test_wasserstein_plan_marginals_are_tight():
    rng = np.random.default_rng(43)
    mu = random_measure(rng)
    nu = random_measure(rng)
    _, plan = wasserstein(mu, nu, 2.0)
    assert np.all(plan.plan >= 0.0)
    assert np.abs(plan.row_marginals() - mu.weights).max() < 1e-9
    assert np.abs(plan.col_marginals() - nu.weights).max() < 1e-9


def test_wasserstein_rejects_order_below_one():
    mu = DiscreteMeasure.from_counts([1], [[0.0, 0.0]])
    with pytest.raises(ConfigError):
        wasserstein(mu, mu, 0.5)


# ---------------------------------------------------------------------------
# total variation


def test_total_variation_hand_cases():
    assert total_variation([2, 1, 1], [2, 1, 1]) == 0.0
    assert abs(total_variation([2, 1, 1], [1, 2, 1]) - 0.25) < 1e-12
    assert abs(total_variation([1, 0], [0, 3]) - 1.0) < 1e-12
    assert total_variation([2, 0], [4, 0]) == 0.0  # scale invariant


def test_total_variation_single_misplaced_sensor():
    # moving one of ka sensors to another cell costs exactly 1/ka
    assert abs(total_variation([2, 2, 0], [2, 1, 1]) - 0.25) < 1e-12


def test_total_variation_rejects_malformed_vectors():
    with pytest.raises(ConfigError):
        total_variation([1, 2], [1, 2, 3])
    with pytest.raises(ConfigError):
        total_variation([1, -1], [1, 1])
    with pytest.raises(ConfigError):
        total_variation([0, 0], [1, 1])


# ---------------------------------------------------------------------------
# quantization distortion


def test_distortion_vanishes_at_centroids():
    quantizer = grid_codebook(16)
    states = quantizer.centroids[[3, 7, 9]]
    assignment = np.array([0, 1, 1, 2])
    scene = true_type(states, assignment)
    k = np.zeros(16, dtype=np.int64)
    k[[3, 7, 9]] = [1, 2, 1]
    assert quantization_distortion(scene, k, quantizer) < 1e-9


def test_distortion_single_target_is_offset_length():
    quantizer = grid_codebook(4)
    states = np.array([[0.3, 0.3]])
    scene = true_type(states, np.zeros(4, dtype=np.int64))
    k = np.array([4, 0, 0, 0], dtype=np.int64)
    expected = np.hypot(0.05, 0.05)  # distance to the (0.25, 0.25) centroid
    assert abs(quantization_distortion(scene, k, quantizer) - expected) < 1e-9


def test_distortion_shrinks_with_finer_grids():
    from tuma import assign_sensors, draw_targets, trial_rng, true_multiplicity

    averages = []
    for m in (4, 16, 64):
        quantizer = grid_codebook(m)
        values = []
        for trial in range(50):
            rng = trial_rng(47, trial)
            states = draw_targets(rng, 3)
            assignment = assign_sensors(rng, 6, 3)
            scene = true_type(states, assignment)
            k = true_multiplicity(states, assignment, quantizer)
            values.append(quantization_distortion(scene, k, quantizer))
        averages.append(np.mean(values))
    assert averages[0] > averages[1] > averages[2]
