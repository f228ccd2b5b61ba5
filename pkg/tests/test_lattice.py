import itertools
from fractions import Fraction

import numpy as np
import pytest

from burgers_mrt.errors import InvalidDimensionError, InversionError
from burgers_mrt.lattice import (
    LatticeSpec, build_velocities, build_weights, general_velocities, invert_moment_matrix,
    lattice_size, moment_exponents, relaxation_classes, relaxation_diagonal, sound_speed_sq,
)


def brute_force_set(d):
    return {v for v in itertools.product((-1, 0, 1), repeat=d) if sum(map(abs, v)) <= 2}


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_velocity_set_matches_enumeration(d):
    vel = build_velocities(d)
    assert vel.shape == (lattice_size(d), d)
    rows = [tuple(int(x) for x in v) for v in vel]
    assert len(set(rows)) == len(rows)
    assert set(rows) == brute_force_set(d)
    nnz = np.count_nonzero(vel, axis=1)
    assert (nnz == 0).sum() == 1 and (nnz == 1).sum() == 2 * d and (nnz == 2).sum() == 2 * d * (d - 1)


def test_explicit_tables():
    assert build_velocities(1)[:, 0].tolist() == [0, 1, -1]
    v2 = build_velocities(2)
    assert v2[:, 0].tolist() == [0, 1, 0, -1, 0, 1, -1, -1, 1]
    assert v2[:, 1].tolist() == [0, 0, 1, 0, -1, 1, 1, -1, -1]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_general_constructor_same_set_as_tables(d):
    a = {tuple(v) for v in general_velocities(d).tolist()}
    b = {tuple(v) for v in build_velocities(d).tolist()}
    assert a == b


def test_d4_pairs_have_four_sign_combinations():
    vel = build_velocities(4)
    for i, j in itertools.combinations(range(4), 2):
        on_pair = [tuple(v) for v in vel if np.count_nonzero(v) == 2 and v[i] != 0 and v[j] != 0]
        assert len(on_pair) == 4
        assert {(v[i], v[j]) for v in on_pair} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


@pytest.mark.parametrize("bad", [0, -1, 1.5, True, "2"])
def test_invalid_dimension(bad):
    with pytest.raises(InvalidDimensionError):
        build_velocities(bad)


def test_d1_moment_matrix_and_inverse():
    lat = LatticeSpec.build(1)
    assert lat.moment_matrix.tolist() == [[1, 1, 1], [0, 1, -1], [0, 1, 1]]
    np.testing.assert_array_equal(lat.moment_matrix_inverse,
                                  [[1, 0, -1], [0, 0.5, 0.5], [0, -0.5, 0.5]])


def test_d2_mixed_row():
    lat = LatticeSpec.build(2)
    k = lat.exponents.index((1, 1))
    assert lat.moment_matrix[k].tolist() == [0, 0, 0, 0, 0, 1, -1, 1, -1]


def test_d3_row_order_interleaves_third_order():
    ex = moment_exponents(3)
    assert ex[:10] == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (0, 2, 0),
                       (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    assert ex[10:16] == [(1, 2, 0), (2, 1, 0), (1, 0, 2), (2, 0, 1), (0, 1, 2), (0, 2, 1)]


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_moment_matrix_structure_and_inverse(d):
    lat = LatticeSpec.build(d)
    M = lat.moment_matrix
    assert M.dtype.kind == "i"
    assert (M[0] == 1).all()
    np.testing.assert_array_equal(M[1:1 + d], lat.velocities.T)
    np.testing.assert_array_equal(M[1 + d:1 + 2 * d], lat.velocities.T ** 2)
    assert abs(np.linalg.det(M.astype(float))) > 0.5
    res = np.abs(M @ lat.moment_matrix_inverse - np.eye(lat.q)).max()
    assert res < 1e-12


def test_exact_inverse_is_rational_for_d2():
    # entries of the D2Q9 inverse are dyadic rationals, recovered exactly
    inv = LatticeSpec.build(2).moment_matrix_inverse
    for v in inv.ravel():
        assert Fraction(v).limit_denominator(64) == Fraction(v)


def test_inversion_errors():
    with pytest.raises(InversionError):
        invert_moment_matrix(np.array([[1, 2], [2, 4]]))
    with pytest.raises(InversionError):
        invert_moment_matrix(np.ones((2, 3), dtype=int))
    with pytest.raises(InversionError):
        invert_moment_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_weights_examples():
    np.testing.assert_allclose(build_weights(1, 1 / 6, 0.0), [2 / 3, 1 / 6, 1 / 6], rtol=0, atol=1e-15)
    w = build_weights(2, 1 / 10, 1 / 30)
    assert w[0] == pytest.approx(7 / 15, abs=1e-15)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_weight_moments(d):
    lat = LatticeSpec.build(d)
    w1, wd = (1 / 6, 0.0) if d == 1 else (0.11, 0.013)
    w = lat.weights(w1, wd)
    e = lat.velocities.astype(float)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(w @ e, 0, atol=1e-15)
    second = np.einsum("k,ka,kb->ab", w, e, e)
    np.testing.assert_allclose(second, sound_speed_sq(d, w1, wd) * np.eye(d), atol=1e-15)


def test_sound_speed_examples():
    assert sound_speed_sq(1, 1 / 6, 0.0) == pytest.approx(1 / 3)
    assert sound_speed_sq(2, 1 / 10, 1 / 30) == pytest.approx(1 / 3)
    assert sound_speed_sq(3, 0.0, 0.0) == 0.0
    assert sound_speed_sq(2, 1 / 10, 1 / 30, c=2.0) == pytest.approx(4 / 3)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_relaxation_diagonal(d):
    S = relaxation_diagonal(d, 1.0, 1.2, 0.8, None if d == 1 else 0.9)
    assert S.size == lattice_size(d)
    assert relaxation_classes(d).size == lattice_size(d)
    if d > 1:
        tail = S[-3 * d * (d - 1) // 2:]
        assert (tail == 1.0).all()
        assert (relaxation_classes(d)[-tail.size:] == 4).all()


def test_relaxation_diagonal_rejects_out_of_range():
    with pytest.raises(ValueError):
        relaxation_diagonal(2, 1.0, 2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        relaxation_diagonal(2, 1.0, 1.0, 1.0, None)


def test_from_velocities_permutation():
    lat = LatticeSpec.build(3)
    rng = np.random.default_rng(3)
    perm = np.concatenate([[0], 1 + rng.permutation(lat.q - 1)])
    other = LatticeSpec.from_velocities(lat.velocities[perm])
    np.testing.assert_array_equal(other.moment_matrix, lat.moment_matrix[:, perm])
    np.testing.assert_allclose(other.weights(0.1, 0.02), lat.weights(0.1, 0.02)[perm])
    with pytest.raises(InvalidDimensionError):
        LatticeSpec.from_velocities(lat.velocities[::-1])


def test_opposite():
    lat = LatticeSpec.build(4)
    opp = lat.opposite()
    np.testing.assert_array_equal(lat.velocities[opp], -lat.velocities)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_class_projectors_partition_identity(d):
    lat = LatticeSpec.build(d)
    P = lat.class_projectors
    np.testing.assert_allclose(sum(P), np.eye(lat.q), atol=1e-14)
    for k, Pk in enumerate(P):
        np.testing.assert_allclose(Pk @ Pk, Pk, atol=1e-13)
