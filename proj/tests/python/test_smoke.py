import math

import pytest

import qdmeta

CONFIG = """
[run]
algorithm = {alg}
[evolution]
eval_budget = 3000
init_population = 200
batch_size = 40
bins_per_dim = 10
database_capacity = 6000
[meta]
lambda = 3
actions = 1,2,4
[cvt]
centroids = 16
kmeans_samples = 500
"""


def test_rastrigin_closed_form():
    assert qdmeta.rastrigin([0.0] * 5) == 0.0
    x = [0.3, -1.2, 2.5]
    expected = -sum(10 + v * v - 10 * math.cos(2 * math.pi * v) for v in x)
    assert qdmeta.rastrigin(x) == pytest.approx(expected, abs=1e-12)


def test_landscapes_and_decode():
    x = [0.5, 1.0, -0.25, 2.0]
    assert qdmeta.evaluate_landscape("base", [], x) == qdmeta.rastrigin(x)
    assert qdmeta.evaluate_landscape("drop", [1], x) == pytest.approx(qdmeta.rastrigin([0.5, -0.25, 2.0]))
    t = qdmeta.evaluate_landscape("translation", [1.0, 0.0], x)
    assert t == pytest.approx(qdmeta.rastrigin(x))
    assert qdmeta.decode([0.0, 0.5, 1.0]) == pytest.approx([-5.12, 0.0, 5.12])
    with pytest.raises(Exception):
        qdmeta.evaluate_landscape("drop", [9], x)


def test_feature_map_zero_network():
    size = qdmeta.genotype_size()
    assert size == 222
    out = qdmeta.map_features([0.0] * size, [0.2] * 20)
    assert out == pytest.approx([0.5, 0.5])


def test_meta_evolution_run_is_deterministic():
    text = CONFIG.format(alg="qd-meta-translation")
    a = qdmeta.run_meta_evolution(text, 5)
    b = qdmeta.run_meta_evolution(text, 5)
    assert a["evaluations"] == 3000
    assert a["history"] == b["history"]
    assert len(a["archive"]) > 0
    trace = a["best_meta_fitness_trace"]
    assert all(later >= earlier for earlier, later in zip(trace, trace[1:]))


@pytest.mark.parametrize("alg", ["cvt", "fixed-me"])
def test_baselines(alg):
    r = qdmeta.run_baseline(CONFIG.format(alg=alg), 2)
    assert r["evaluations"] == 3000
    assert len(r["archive"]) > 0


def test_bad_config_raises():
    with pytest.raises(qdmeta.ConfigError):
        qdmeta.run_baseline("[run]\nalgorithm = cvt\n[evolution]\nbudget = 1\n", 1)


def test_adaptation_curve_is_monotone():
    genes = [[0.5] * 20, [0.45] * 20]
    curve = qdmeta.adaptation_test(genes, "translation", [1.1, 0.2], 30, 4)
    assert len(curve) == 30
    assert all(b >= a for a, b in zip(curve, curve[1:]))
