"""DdQ(1+2d^2) velocity sets, natural-moment matrices and weights.

All lattice data is stored in unit-lattice form (c = 1): velocities and the
moment matrix are exact integers. Factors of the lattice speed are applied
by the callers that need physical units.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

import numpy as np

from .errors import InvalidDimensionError, InversionError

# Unit-lattice component tables, rows are x1..xd.
_EXPLICIT_VELOCITIES = {
    1: [[0, 1, -1]],
    2: [
        [0, 1, 0, -1, 0, 1, -1, -1, 1],
        [0, 0, 1, 0, -1, 1, 1, -1, -1],
    ],
    3: [
        [0, 1, 0, 0, -1, 0, 0, 1, -1, -1, 1, 1, -1, -1, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, -1, 0, 1, 1, -1, -1, 0, 0, 0, 0, 1, -1, -1, 1],
        [0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 0, 1, 1, -1, -1, 1, 1, -1, -1],
    ],
}

# Sign patterns of the planar-diagonal blocks: first and second axis of a pair.
_J1 = (1, -1, -1, 1)
_J2 = (1, 1, -1, -1)

_EXACT_INVERSE_MAX_Q = 51
RESIDUAL_GATE = 1e-12


def lattice_size(d: int) -> int:
    return 1 + 2 * d * d


def _check_dim(d):
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def build_velocities(d: int) -> np.ndarray:
    """Return the q x d integer velocity array for DdQ(1+2d^2).

    d <= 3 uses explicit velocity tables; larger d uses the block
    constructor: rest, +e_1..+e_d, -e_1..-e_d, then one 4-vector block per
    axis pair (i < j) in lexicographic order with signs J1 on x_i, J2 on x_j.
    """
    d = _check_dim(d)
    if d in _EXPLICIT_VELOCITIES:
        return np.array(_EXPLICIT_VELOCITIES[d], dtype=np.int64).T.copy()
    return general_velocities(d)


def general_velocities(d: int) -> np.ndarray:
    d = _check_dim(d)
    q = lattice_size(d)
    vel = np.zeros((q, d), dtype=np.int64)
    for p in range(d):
        vel[1 + p, p] = 1
        vel[1 + d + p, p] = -1
    row = 2 * d + 1
    for i, j in itertools.combinations(range(d), 2):
        for a, b in zip(_J1, _J2):
            vel[row, i] = a
            vel[row, j] = b
            row += 1
    assert row == q
    return vel


def moment_exponents(d: int) -> list[tuple[int, ...]]:
    """Exponent tuples (p_1..p_d) of the natural moments, in row order."""
    d = _check_dim(d)

    def mono(*axis_power):
        p = [0] * d
        for axis, power in axis_power:
            p[axis] = power
        return tuple(p)

    pairs = list(itertools.combinations(range(d), 2))
    rows = [mono()]
    rows += [mono((k, 1)) for k in range(d)]
    rows += [mono((k, 2)) for k in range(d)]
    rows += [mono((i, 1), (j, 1)) for i, j in pairs]
    if d == 3:
        # the explicit D3Q19 matrix interleaves the two third-order families
        for i, j in pairs:
            rows += [mono((i, 1), (j, 2)), mono((i, 2), (j, 1))]
    else:
        rows += [mono((i, 1), (j, 2)) for i, j in pairs]
        rows += [mono((i, 2), (j, 1)) for i, j in pairs]
    rows += [mono((i, 2), (j, 2)) for i, j in pairs]
    return rows


def moment_matrix_from(velocities: np.ndarray, exponents) -> np.ndarray:
    vel = np.asarray(velocities, dtype=np.int64)
    return np.array(
        [np.prod(vel ** np.array(p, dtype=np.int64), axis=1) for p in exponents],
        dtype=np.int64,
    )


def _exact_inverse(M: np.ndarray) -> list[list[Fraction]]:
    n = M.shape[0]
    a = [[Fraction(int(v)) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise InversionError("moment matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv_p = 1 / a[col][col]
        a[col] = [v * inv_p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [vr - factor * vc for vr, vc in zip(a[r], a[col])]
    return [row[n:] for row in a]


def invert_moment_matrix(M: np.ndarray) -> np.ndarray:
    """Invert an integer moment matrix, certifying ||M M^-1 - I||_inf < 1e-12.

    Exact rational elimination is used up to q = 51 (d <= 5); larger
    matrices go through LAPACK.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InversionError(f"moment matrix must be square, got shape {M.shape}")
    n = M.shape[0]
    if n <= _EXACT_INVERSE_MAX_Q and np.issubdtype(M.dtype, np.integer):
        inv = np.array([[float(v) for v in row] for row in _exact_inverse(M)])
    else:
        try:
            inv = np.linalg.inv(M.astype(float))
        except np.linalg.LinAlgError as exc:
            raise InversionError(str(exc)) from exc
    residual = np.abs(M @ inv - np.eye(n)).max()
    if not np.isfinite(residual) or residual >= RESIDUAL_GATE:
        raise InversionError(f"inverse residual {residual:.3e} exceeds {RESIDUAL_GATE}")
    return inv


def velocity_classes(velocities: np.ndarray) -> np.ndarray:
    """0 for rest, 1 for axis, 2 for planar-diagonal velocities."""
    nnz = np.count_nonzero(velocities, axis=1)
    if nnz.max(initial=0) > 2:
        raise InvalidDimensionError("velocities must have at most two nonzero components")
    return nnz


def build_weights(d: int, w1: float, w_diag: float) -> np.ndarray:
    d = _check_dim(d)
    q = lattice_size(d)
    w = np.empty(q)
    w[1:1 + 2 * d] = w1
    w[1 + 2 * d:] = w_diag
    w[0] = 1.0 - 2 * d * w1 - 2 * d * (d - 1) * w_diag
    return w


def sound_speed_sq(d: int, w1: float, w_diag: float, c: float = 1.0) -> float:
    return (2 * w1 + 4 * (d - 1) * w_diag) * c * c


def relaxation_diagonal(d: int, s0: float, s1: float, s21: float, s22: float | None = None) -> np.ndarray:
    """Diagonal of S in moment-row order.

    d = 1: (s0, s1, s2) with s2 passed as ``s21``. d > 1: s0, s1 (d times),
    s21 (d times), s22 (d(d-1)/2 times), then 1 for the 3d(d-1)/2
    third- and fourth-order moments.
    """
    d = _check_dim(d)
    for name, s in (("s1", s1), ("s21", s21)) + ((("s22", s22),) if d > 1 else ()):
        if s is None or not 0.0 < s < 2.0:
            raise ValueError(f"relaxation rate {name}={s!r} outside (0, 2)")
    if not 0.0 < s0 <= 2.0:
        raise ValueError(f"relaxation rate s0={s0!r} outside (0, 2]")
    if d == 1:
        return np.array([s0, s1, s21], dtype=float)
    npair = d * (d - 1) // 2
    return np.concatenate(
        [[s0], np.full(d, s1), np.full(d, s21), np.full(npair, s22), np.ones(3 * npair)]
    )


def relaxation_classes(d: int) -> np.ndarray:
    """Class label per moment row: 0 conserved, 1 first, 2 second-diagonal,
    3 second-mixed, 4 higher (relaxed at rate 1)."""
    d = _check_dim(d)
    if d == 1:
        return np.array([0, 1, 2])
    npair = d * (d - 1) // 2
    return np.concatenate(
        [[0], np.full(d, 1), np.full(d, 2), np.full(npair, 3), np.full(3 * npair, 4)]
    ).astype(np.int64)


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    """Velocities, moment matrix and its inverse for one DdQ(1+2d^2) lattice."""

    d: int
    velocities: np.ndarray
    moment_matrix: np.ndarray
    moment_matrix_inverse: np.ndarray
    exponents: tuple = field(repr=False)

    @property
    def q(self) -> int:
        return self.velocities.shape[0]

    @classmethod
    def build(cls, d: int) -> "LatticeSpec":
        d = _check_dim(d)
        return cls.from_velocities(build_velocities(d))

    @classmethod
    def from_velocities(cls, velocities) -> "LatticeSpec":
        """Lattice with an arbitrary labelling of the DdQ(1+2d^2) velocities."""
        vel = np.asarray(velocities, dtype=np.int64)
        if vel.ndim != 2:
            raise InvalidDimensionError("velocities must be a q x d array")
        d = vel.shape[1]
        if vel.shape[0] != lattice_size(d):
            raise InvalidDimensionError(f"expected {lattice_size(d)} velocities for d={d}")
        classes = velocity_classes(vel)
        if (classes == 0).sum() != 1 or classes[0] != 0:
            raise InvalidDimensionError("velocity 0 must be the unique rest velocity")
        exps = tuple(moment_exponents(d))
        M = moment_matrix_from(vel, exps)
        Minv = invert_moment_matrix(M)
        for a in (vel, M, Minv):
            a.setflags(write=False)
        return cls(d, vel, M, Minv, exps)

    @property
    def classes(self) -> np.ndarray:
        return velocity_classes(self.velocities)

    def weights(self, w1: float, w_diag: float) -> np.ndarray:
        """Weights in this lattice's velocity order."""
        w = np.empty(self.q)
        classes = self.classes
        w[classes == 1] = w1
        w[classes == 2] = w_diag
        d = self.d
        w[classes == 0] = 1.0 - 2 * d * w1 - 2 * d * (d - 1) * w_diag
        return w

    def opposite(self) -> np.ndarray:
        """Index of -e_i for every velocity i."""
        lookup = {tuple(v): k for k, v in enumerate(self.velocities)}
        return np.array([lookup[tuple(-v)] for v in self.velocities])

    @cached_property
    def class_projectors(self) -> list[np.ndarray]:
        """M^-1 P_k M for each relaxation class k, as exact-pattern floats.

        Summing (1 - s_k) times these gives M^-1 (I - S) M without
        cross-class roundoff, so structural zeros stay exactly zero.
        """
        labels = relaxation_classes(self.d)
        exact = (self.q <= _EXACT_INVERSE_MAX_Q)
        if exact:
            inv = _exact_inverse(self.moment_matrix)
        out = []
        for k in range(labels.max() + 1):
            rows = np.flatnonzero(labels == k)
            if exact:
                P = [[sum((inv[i][r] * int(self.moment_matrix[r, j]) for r in rows), Fraction(0))
                      for j in range(self.q)] for i in range(self.q)]
                out.append(np.array([[float(v) for v in row] for row in P]))
            else:
                out.append(self.moment_matrix_inverse[:, rows] @ self.moment_matrix[rows, :])
        return out
