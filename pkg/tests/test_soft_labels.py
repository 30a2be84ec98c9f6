import math

import numpy as np
import pytest

from ordinet import soft_labels as sl

GENERATORS = {
    "onehot": lambda j: sl.onehot_table(j),
    "triangular": lambda j: sl.triangular_table(j, 0.1),
    "exponential": lambda j: sl.exponential_table(j, 1.5),
    "binomial": lambda j: sl.binomial_table(j),
    "poisson": lambda j: sl.poisson_table(j),
    "beta": lambda j: sl.beta_table(j, 10.0),
}


def unimodal(row, eps=1e-12):
    """Non-decreasing up to some peak plateau, then non-increasing."""
    falling = False
    for a, b in zip(row[:-1], row[1:]):
        if b > a + eps:
            if falling:
                return False
        elif b < a - eps:
            falling = True
    return True


# ---------------------------------------------------------------------------
# hand-evaluated examples
# ---------------------------------------------------------------------------


def test_onehot_is_identity():
    assert np.array_equal(sl.onehot_table(2).rows, np.eye(2))
    assert np.array_equal(sl.onehot_table(3).rows[1], [0.0, 1.0, 0.0])
    assert np.allclose(sl.onehot_table(5).rows.sum(axis=1), 1.0)


def test_triangular_examples():
    assert np.array_equal(sl.triangular_table(5, 0.0).rows, np.eye(5))
    t = sl.triangular_table(4, 0.05)
    np.testing.assert_allclose(t.rows[0], [0.95, 0.05, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(t.rows[1], [0.05, 0.90, 0.05, 0.0], atol=1e-15)
    assert t.rows.sum(axis=1) == pytest.approx([1.0] * 4, abs=1e-15)
    assert list(np.argmax(t.rows, axis=1)) == [0, 1, 2, 3]


def test_exponential_row_from_direct_formula():
    t = sl.exponential_table(3, 1.0)
    e1 = math.exp(-1.0)
    total = 1.0 + 2.0 * e1
    np.testing.assert_allclose(t.rows[1], [e1 / total, 1.0 / total, e1 / total], rtol=1e-14)
    # two classes: masses e^0 and e^-1 for any exponent
    for exponent in (1.0, 1.5, 2.0):
        t2 = sl.exponential_table(2, exponent)
        np.testing.assert_allclose(
            t2.rows[0], [1.0 / (1.0 + e1), e1 / (1.0 + e1)], rtol=1e-14
        )


def test_exponential_symmetric_center_row():
    row = sl.exponential_table(5, 2.0).rows[2]
    np.testing.assert_allclose(row, row[::-1], rtol=0, atol=0)


def test_binomial_pmf_by_hand():
    t = sl.binomial_table(2)
    np.testing.assert_allclose(t.rows, [[0.75, 0.25], [0.25, 0.75]], rtol=1e-15)
    row = sl.binomial_table(3).rows[1]  # Binomial(2, 0.5)
    np.testing.assert_allclose(row, [0.25, 0.5, 0.25], rtol=1e-15)


def test_binomial_mode_matches_floor_rule():
    # mode of Binomial(n, p) is floor((n+1)p); the parametrization lands it on j
    for j in range(2, 13):
        rows = sl.binomial_table(j).rows
        for c in range(j):
            p = (2 * c + 1) / (2 * j)
            assert math.floor(j * p) == c
            assert np.argmax(rows[c]) == c


def test_poisson_ratios():
    row = sl.poisson_table(2).rows[0]  # pmf(1;1) : pmf(2;1) = 1 : 1/2
    np.testing.assert_allclose(row, [2.0 / 3.0, 1.0 / 3.0], rtol=1e-14)
    row = sl.poisson_table(3).rows[1]  # pmf(1;2) = pmf(2;2) tie
    np.testing.assert_allclose(row, [0.375, 0.375, 0.25], rtol=1e-14)


def test_poisson_rows_normalized():
    for j in range(2, 11):
        sums = sl.poisson_table(j).rows.sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-12)


def _beta_mass_quadrature(a, b, lo, hi, steps=20001):
    # Simpson integration of the Beta density, independent of the
    # continued-fraction path; substituting t = u^2 removes the
    # left-endpoint derivative singularity for small shape a
    u = np.linspace(math.sqrt(lo), math.sqrt(hi), steps)
    norm = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    dens = 2.0 * u ** (2 * a - 1) * (1 - u * u) ** (b - 1) / norm
    h = (u[-1] - u[0]) / (steps - 1)
    return h / 3 * (dens[0] + dens[-1] + 4 * dens[1::2].sum() + 2 * dens[2:-1:2].sum())


def test_beta_closed_form_and_symmetry():
    t = sl.beta_table(2, 6.0)
    # class 1 maps to Beta(4, 2); I_{0.5}(4, 2) = 0.1875 exactly
    np.testing.assert_allclose(t.rows[1], [0.1875, 0.8125], atol=1e-12)
    np.testing.assert_allclose(t.rows[0], t.rows[1][::-1], atol=1e-14)


def test_incomplete_beta_against_quadrature():
    for a, b, x in [(4.0, 2.0, 0.5), (1.5, 8.5, 0.2), (7.0, 3.0, 0.9), (2.2, 2.2, 0.35)]:
        expected = _beta_mass_quadrature(a, b, 0.0, x)
        assert sl.reg_incomplete_beta(x, a, b) == pytest.approx(expected, abs=1e-9)


def test_beta_rows_unimodal_with_argmax_at_class():
    for j in range(3, 9):
        rows = sl.beta_table(j, 10.0).rows
        for c in range(j):
            assert np.argmax(rows[c]) == c
            assert unimodal(rows[c])


def test_blend_endpoints_and_hand_value():
    t = sl.triangular_table(4, 0.05)
    np.testing.assert_allclose(sl.blend(t, 0.0).rows, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(sl.blend(t, 1.0).rows, t.rows, atol=0)
    row0 = sl.blend(t, 0.8).rows[0]
    np.testing.assert_allclose(row0, [0.96, 0.04, 0.0, 0.0], atol=1e-15)


def test_blend_matches_matrix_arithmetic():
    rng = np.random.default_rng(3)
    for j in (2, 5, 9):
        t = sl.exponential_table(j, 1.0)
        eta = rng.uniform(0, 1)
        expected = (1 - eta) * np.eye(j) + eta * t.rows
        np.testing.assert_allclose(sl.blend(t, eta).rows, expected, atol=0)


def test_targets_for():
    t = sl.onehot_table(2)
    np.testing.assert_array_equal(sl.targets_for(t, [0, 0]), [[1, 0], [1, 0]])
    tri = sl.triangular_table(3, 0.1)
    np.testing.assert_allclose(sl.targets_for(tri, [2]), [[0.0, 0.1, 0.9]], atol=1e-15)
    assert sl.targets_for(t, []).shape == (0, 2)


# ---------------------------------------------------------------------------
# invariants over all generators
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(GENERATORS))
def test_rows_are_stochastic_and_unimodal(name):
    make = GENERATORS[name]
    for j in range(2, 13):
        rows = make(j).rows
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)
        assert rows.min() >= 0.0
        for c in range(j):
            assert unimodal(rows[c]), f"{name} J={j} row {c} not unimodal"
            if name == "poisson":
                peak = rows[c].max()
                assert rows[c, c] >= peak - 1e-12
            else:
                assert np.argmax(rows[c]) == c


@pytest.mark.parametrize("name", sorted(GENERATORS))
def test_generators_deterministic(name):
    make = GENERATORS[name]
    assert np.array_equal(make(7).rows, make(7).rows)


def test_csv_export_round_trips(tmp_path):
    t = sl.beta_table(5, 10.0)
    path = tmp_path / "beta5.csv"
    t.to_csv(path)
    loaded = np.loadtxt(path, delimiter=",")
    assert np.array_equal(loaded, t.rows)


# ---------------------------------------------------------------------------
# error contracts
# ---------------------------------------------------------------------------


def test_parameter_validation():
    with pytest.raises(ValueError):
        sl.onehot_table(1)
    with pytest.raises(ValueError):
        sl.triangular_table(4, 0.5)
    with pytest.raises(ValueError):
        sl.triangular_table(4, -0.01)
    with pytest.raises(ValueError):
        sl.exponential_table(4, 0.0)
    with pytest.raises(ValueError):
        sl.beta_table(4, 2.0)
    with pytest.raises(ValueError):
        sl.blend(sl.onehot_table(3), 1.2)
    with pytest.raises(ValueError):
        sl.targets_for(sl.onehot_table(3), [0, 3])
