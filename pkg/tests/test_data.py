import numpy as np
import pytest

from ordinet import data


def test_synthetic_uniform_proportions():
    ds = data.generate_synthetic(data.SynthConfig(1000, 3, 5, noise_sd=0.0, seed=0))
    counts = np.bincount(ds.y, minlength=5)
    assert np.all(np.abs(counts - 200) <= 1)


def test_synthetic_requested_proportions():
    cfg = data.SynthConfig(400, 2, 3, imbalance=(0.5, 0.3, 0.2), seed=1)
    counts = np.bincount(data.generate_synthetic(cfg).y, minlength=3)
    np.testing.assert_allclose(counts, [200, 120, 80], atol=1)


def test_synthetic_deterministic():
    cfg = data.SynthConfig(200, 4, 4, seed=11)
    a = data.generate_synthetic(cfg)
    b = data.generate_synthetic(cfg)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_noise_free_labels_are_monotone_in_latent_score():
    # with zero noise no pair may be discordant: the latent score ordering
    # fully determines the labels
    cfg = data.SynthConfig(300, 5, 4, noise_sd=0.0, seed=2)
    ds = data.generate_synthetic(cfg)
    rng = np.random.default_rng(cfg.seed)
    w = rng.normal(size=cfg.n_features)
    w /= np.linalg.norm(w)
    z = ds.X @ w
    order = np.argsort(z)
    assert np.all(np.diff(ds.y[order]) >= 0)


def test_synthetic_config_validation():
    with pytest.raises(ValueError):
        data.SynthConfig(3, 2, 5)
    with pytest.raises(ValueError):
        data.SynthConfig(100, 2, 3, noise_sd=-1.0)
    with pytest.raises(ValueError):
        data.SynthConfig(100, 2, 3, imbalance=(0.5, 0.5, 0.5))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    ds = data.generate_synthetic(data.SynthConfig(50, 3, 3, seed=3))
    path = tmp_path / "ds.csv"
    data.save_csv(ds, path)
    loaded = data.load_csv(path)
    assert np.array_equal(loaded.y, ds.y)
    np.testing.assert_allclose(loaded.X, ds.X, atol=1e-15)
    assert loaded.num_classes == 3
    assert loaded.feature_names == ["x0", "x1", "x2"]


def test_csv_named_label_column_and_inference(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,label,b\n0.5,2,1.5\n1.0,0,2.5\n-1.0,1,0.0\n")
    ds = data.load_csv(path, label_column="label")
    assert ds.num_classes == 3
    assert ds.y.tolist() == [2, 0, 1]
    np.testing.assert_allclose(ds.X, [[0.5, 1.5], [1.0, 2.5], [-1.0, 0.0]])
    assert ds.feature_names == ["a", "b"]


def test_csv_string_categories(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("f,label\n1.0,low\n2.0,high\n3.0,mid\n")
    ds = data.load_csv(path, categories=["low", "mid", "high"])
    assert ds.y.tolist() == [0, 2, 1]
    with pytest.raises(ValueError, match="unknown category"):
        data.load_csv(path, categories=["low", "mid"])


def test_csv_error_reports_position(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,label\n1.0,2.0,0\n1.0,oops,1\n")
    with pytest.raises(ValueError, match="row 3.*'b'"):
        data.load_csv(path)


def test_csv_label_out_of_declared_range(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("a,label\n1.0,5\n2.0,0\n")
    with pytest.raises(ValueError, match=r"outside \[0, 3\)"):
        data.load_csv(path, num_classes=3)


def test_csv_missing_file():
    with pytest.raises(FileNotFoundError):
        data.load_csv("/nonexistent/nope.csv")


# ---------------------------------------------------------------------------
# splitting and scaling
# ---------------------------------------------------------------------------


def test_stratified_split_counts():
    ds = data.Dataset(np.zeros((100, 2)), np.repeat([0, 1], 50), 2)
    train, test = data.stratified_split(ds, 0.25, seed=0)
    for c in (0, 1):
        assert np.sum(test.y == c) in (12, 13)
    assert train.n + test.n == 100


def test_split_is_disjoint_exhaustive_partition():
    ds = data.generate_synthetic(data.SynthConfig(97, 3, 3, seed=4))
    ds.X[:, 0] = np.arange(97)  # make rows identifiable
    train, test = data.stratified_split(ds, 0.3, seed=5)
    ids = np.concatenate([train.X[:, 0], test.X[:, 0]])
    assert sorted(ids.tolist()) == list(range(97))
    labels = {int(i): int(l) for i, l in zip(ds.X[:, 0], ds.y)}
    for part in (train, test):
        for i, l in zip(part.X[:, 0], part.y):
            assert labels[int(i)] == int(l)


def test_split_deterministic():
    ds = data.generate_synthetic(data.SynthConfig(120, 2, 4, seed=6))
    a1, b1 = data.stratified_split(ds, 0.25, seed=9)
    a2, b2 = data.stratified_split(ds, 0.25, seed=9)
    assert np.array_equal(a1.X, a2.X) and np.array_equal(b1.y, b2.y)


def test_split_protocol_fractions_within_one_sample_per_class():
    ds = data.generate_synthetic(data.SynthConfig(1000, 2, 5, seed=7))
    train, test = data.stratified_split(ds, 0.25, seed=8)
    for c in range(5):
        n_c = np.sum(ds.y == c)
        assert abs(np.sum(test.y == c) - 0.25 * n_c) <= 1
    inner_train, val = data.stratified_split(train, 0.15, seed=8)
    for c in range(5):
        n_c = np.sum(train.y == c)
        assert abs(np.sum(val.y == c) - 0.15 * n_c) <= 1
    assert inner_train.n + val.n + test.n == 1000


def test_split_rejects_tiny_classes():
    ds = data.Dataset(np.zeros((3, 1)), np.array([0, 0, 1]), 2)
    with pytest.raises(ValueError, match="class 1"):
        data.stratified_split(ds, 0.5, seed=0)
    with pytest.raises(ValueError):
        data.stratified_split(ds, 1.5, seed=0)


def test_standardize_train_statistics():
    rng = np.random.default_rng(10)
    train = data.Dataset(rng.normal(3.0, 2.0, size=(200, 3)), rng.integers(0, 2, 200), 2)
    (out,) = data.standardize(train)
    np.testing.assert_allclose(out.X.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.X.std(axis=0), 1.0, atol=1e-12)


def test_standardize_constant_feature_and_leakage():
    train = data.Dataset(
        np.column_stack([np.full(50, 7.0), np.arange(50.0)]),
        np.tile([0, 1], 25),
        2,
    )
    shifted = data.Dataset(train.X + 10.0, train.y.copy(), 2)
    train_s, shifted_s = data.standardize(train, shifted)
    assert np.all(train_s.X[:, 0] == 0.0)
    assert np.all(shifted_s.X[:, 0] == 0.0)
    # the shifted set keeps a nonzero mean: scaled with train statistics
    assert abs(shifted_s.X[:, 1].mean()) > 0.5
