import numpy as np
import pytest

from ordinet import dropout as do


def test_correlation_trivial_cases():
    labels = np.array([0, 1, 2, 3, 2, 1])
    acts = np.column_stack([labels.astype(float), -labels.astype(float), np.full(6, 3.0)])
    r = do.neuron_target_correlation(acts, labels)
    np.testing.assert_allclose(r, [1.0, -1.0, 0.0], atol=1e-12)


def test_correlation_constant_labels():
    acts = np.random.default_rng(0).normal(size=(10, 3))
    r = do.neuron_target_correlation(acts, np.zeros(10, dtype=int))
    np.testing.assert_array_equal(r, np.zeros(3))


def test_correlation_needs_two_samples():
    with pytest.raises(ValueError):
        do.neuron_target_correlation(np.ones((1, 2)), [0])


def test_drop_probabilities_mix_endpoint():
    cfg = do.HybridDropoutConfig(base_rate=0.4, mix=0.0)
    q = do.hybrid_drop_probabilities(np.array([0.9, -0.1, 0.3]), cfg)
    np.testing.assert_array_equal(q, np.full(3, 0.4))


def test_drop_probabilities_hand_example():
    cfg = do.HybridDropoutConfig(base_rate=0.4, mix=1.0)
    q = do.hybrid_drop_probabilities(np.array([1.0, 0.0]), cfg)
    np.testing.assert_allclose(q, [0.0, 0.8], atol=1e-15)
    assert q.mean() == pytest.approx(0.4, abs=1e-15)


def test_drop_probabilities_preserve_mean():
    # keep |r| away from 1 so the 0.95 clamp never engages
    rng = np.random.default_rng(1)
    for _ in range(1000):
        h = rng.integers(2, 40)
        r = rng.uniform(-0.8, 0.8, size=h)
        mix = rng.uniform()
        cfg = do.HybridDropoutConfig(base_rate=0.1, mix=mix)
        q = do.hybrid_drop_probabilities(r, cfg)
        assert q.mean() == pytest.approx(0.1, abs=1e-12)


def test_drop_probabilities_ranking():
    rng = np.random.default_rng(2)
    cfg = do.HybridDropoutConfig(base_rate=0.3, mix=0.7)
    r = rng.uniform(-1, 1, size=20)
    q = do.hybrid_drop_probabilities(r, cfg)
    order = np.argsort(-np.abs(r))  # most correlated first
    assert np.all(np.diff(q[order]) >= -1e-15)


def test_all_correlations_saturated_falls_back_to_uniform():
    cfg = do.HybridDropoutConfig(base_rate=0.25, mix=1.0)
    q = do.hybrid_drop_probabilities(np.ones(4), cfg)
    np.testing.assert_array_equal(q, np.full(4, 0.25))


def test_eval_mode_is_identity():
    rng = np.random.default_rng(3)
    acts = rng.normal(size=(16, 5))
    cfg = do.HybridDropoutConfig(base_rate=0.5)
    out, mask = do.apply_hybrid_dropout(acts, None, cfg, mode="eval")
    assert np.array_equal(out, acts)
    assert np.all(mask == 1.0)


def test_zero_rate_keeps_everything():
    rng = np.random.default_rng(4)
    acts = rng.normal(size=(16, 5))
    labels = rng.integers(0, 3, size=16)
    cfg = do.HybridDropoutConfig(base_rate=0.0, mix=0.0)
    out, mask = do.apply_hybrid_dropout(acts, labels, cfg, rng=np.random.default_rng(0))
    assert np.array_equal(out, acts)
    assert np.all(mask == 1.0)


def test_small_batch_falls_back_to_uniform_rate():
    # below min_batch the mask distribution must ignore correlations
    acts = np.column_stack([np.arange(4.0), np.arange(4.0)])
    labels = np.arange(4)
    cfg = do.HybridDropoutConfig(base_rate=0.5, mix=1.0, min_batch=8)
    drops = 0
    trials = 4000
    for t in range(trials):
        _, mask = do.apply_hybrid_dropout(acts, labels, cfg, rng=np.random.default_rng(t))
        drops += int(mask[0] == 0.0)
    # perfectly correlated neuron would never drop without the fallback
    assert abs(drops / trials - 0.5) < 0.03


def test_empirical_drop_frequencies():
    q = np.array([0.0, 0.2, 0.5, 0.9])
    rng = np.random.default_rng(5)
    trials = 10_000
    drops = np.zeros(4)
    for _ in range(trials):
        _, keep = do.dropout_scale_vector(q, rng)
        drops += keep == 0.0
    np.testing.assert_allclose(drops / trials, q, atol=0.02)


def test_inverted_scaling_preserves_expectation():
    acts = np.full((1, 3), 2.0)
    labels = np.array([0])
    q = np.array([0.3, 0.6, 0.0])
    rng = np.random.default_rng(6)
    total = np.zeros(3)
    trials = 10_000
    for _ in range(trials):
        scale, _ = do.dropout_scale_vector(q, rng)
        total += (acts * scale)[0]
    np.testing.assert_allclose(total / trials, acts[0], rtol=0.02)


def test_mix_zero_reproduces_uniform_dropout():
    rng = np.random.default_rng(7)
    acts = rng.normal(size=(32, 6))
    labels = rng.integers(0, 4, size=32)
    cfg = do.HybridDropoutConfig(base_rate=0.4, mix=0.0)
    _, mask_hybrid = do.apply_hybrid_dropout(acts, labels, cfg, rng=np.random.default_rng(11))
    _, mask_uniform = do.dropout_scale_vector(np.full(6, 0.4), np.random.default_rng(11))
    np.testing.assert_array_equal(mask_hybrid, mask_uniform)


def test_deterministic_under_seed():
    rng_a = np.random.default_rng(8)
    rng_b = np.random.default_rng(8)
    acts = np.random.default_rng(9).normal(size=(20, 4))
    labels = np.random.default_rng(10).integers(0, 3, size=20)
    cfg = do.HybridDropoutConfig(base_rate=0.3, mix=0.5)
    out_a, mask_a = do.apply_hybrid_dropout(acts, labels, cfg, rng=rng_a)
    out_b, mask_b = do.apply_hybrid_dropout(acts, labels, cfg, rng=rng_b)
    assert np.array_equal(out_a, out_b)
    assert np.array_equal(mask_a, mask_b)


def test_config_validation():
    with pytest.raises(ValueError):
        do.HybridDropoutConfig(base_rate=1.0)
    with pytest.raises(ValueError):
        do.HybridDropoutConfig(base_rate=0.2, mix=1.5)
    with pytest.raises(ValueError):
        do.HybridDropoutConfig(base_rate=0.2, min_batch=1)
