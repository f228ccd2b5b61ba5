"""MRT lattice Boltzmann evolution of the transformed diffusion equation.

Populations live on a periodic node grid in structure-of-arrays layout:
``values[i]`` is the d-dimensional field of population i. The field held
between steps is the post-streaming (pre-collision) state f(x, n dt), from
which theta, grad theta and the Burgers velocity are read off locally.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConfigError, DivergenceError, SingularDenominatorError
from .lattice import LatticeSpec, relaxation_classes
from .params import SchemeParams

THETA_FLOOR = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Periodic node grid x_j = lo + j dx, j = 0..N-1 on every axis."""

    d: int
    extents: tuple[float, ...]
    n: tuple[int, ...]
    dx: float
    origin: tuple[float, ...]

    @classmethod
    def from_domain(cls, domain, dx: float) -> "GridSpec":
        domain = [tuple(map(float, b)) for b in domain]
        n = []
        for lo, hi in domain:
            ratio = (hi - lo) / dx
            count = round(ratio)
            if count < 1 or abs(count - ratio) > 1e-9 * max(1.0, ratio):
                raise ConfigError(f"extent {hi - lo} is not an integer multiple of dx = {dx}")
            n.append(int(count))
        return cls(len(domain), tuple(hi - lo for lo, hi in domain), tuple(n), float(dx),
                   tuple(lo for lo, _ in domain))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def ncells(self) -> int:
        return math.prod(self.n)

    def axes(self) -> list[np.ndarray]:
        return [lo + self.dx * np.arange(n) for lo, n in zip(self.origin, self.n)]

    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))


@dataclass
class PopulationField:
    values: np.ndarray  # (q, N_1, ..., N_d)

    @property
    def q(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    def total(self) -> float:
        return float(self.values.sum())

    def copy(self) -> "PopulationField":
        return PopulationField(self.values.copy())


@dataclass
class MacroFields:
    theta: np.ndarray
    grad_theta: np.ndarray  # (d, N_1, ..., N_d)
    velocity: np.ndarray  # (d, N_1, ..., N_d)


@dataclass(frozen=True, eq=False)
class CollisionOperator:
    """Population-space relaxation f* = w theta + B (f - w theta).

    ``dense`` is B = M^-1 (I - S) M with the conserved slot dropped; the CSR
    triplet holds its structural nonzeros for the compiled kernels.
    """

    dense: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    w: np.ndarray

    @classmethod
    def from_dense(cls, B, w) -> "CollisionOperator":
        B = np.ascontiguousarray(B, dtype=float)
        mask = B != 0.0
        indptr = np.concatenate([[0], np.cumsum(mask.sum(axis=1))]).astype(np.intp)
        rows, cols = np.nonzero(mask)
        return cls(B, indptr, cols.astype(np.intp), np.ascontiguousarray(B[rows, cols]),
                   np.ascontiguousarray(w, dtype=float))

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])


def _class_rates(params: SchemeParams) -> list[float]:
    if params.d == 1:
        return [params.s0, params.s1, params.s21]
    return [params.s0, params.s1, params.s21, params.s22, 1.0]


def collision_operator(lattice: LatticeSpec, params: SchemeParams) -> CollisionOperator:
    # class 0 (theta) is never relaxed: m0 == m0_eq identically, so s0 drops out
    rates = _class_rates(params)
    B = np.zeros((lattice.q, lattice.q))
    for k, P in enumerate(lattice.class_projectors):
        if k == 0 or rates[k] == 1.0:
            continue
        B += (1.0 - rates[k]) * P
    return CollisionOperator.from_dense(B, lattice.weights(params.w1, params.w_diag))


def initialization_matrix(lattice: LatticeSpec, params: SchemeParams) -> np.ndarray:
    """q x d matrix G with f_ne(init) = G grad(theta0).

    G = -dt M^-1 S^-1 M diag(w) C, with C the physical q x d velocities, so
    that sum_k c_k f_ne_k = -(dt cs^2 / s1) grad(theta0).
    """
    rates = _class_rates(params)
    A = np.zeros((lattice.q, lattice.q))
    for k, P in enumerate(lattice.class_projectors):
        if k == 0:
            continue
        A += P / rates[k]
    w = lattice.weights(params.w1, params.w_diag)
    C = params.c * lattice.velocities.astype(float)
    return -params.dt * A @ (w[:, None] * C)


def equilibrium(theta, weights) -> np.ndarray:
    """f_eq = w_i theta; theta may be a scalar or a field."""
    theta = np.asarray(theta, dtype=float)
    w = np.asarray(weights, dtype=float)
    return w.reshape((-1,) + (1,) * theta.ndim) * theta


def fd_gradient(theta: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order periodic central-difference gradient, shape (d, ...)."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty((theta.ndim,) + theta.shape)
    for axis in range(theta.ndim):
        def sh(k):
            return np.roll(theta, -k, axis=axis)
        grad[axis] = (-sh(2) + 8 * sh(1) - 8 * sh(-1) + sh(-2)) / (12 * dx)
    return grad


def initialize(theta0, grad_theta0, params: SchemeParams, lattice: LatticeSpec) -> PopulationField:
    """f = f_eq(theta0) + G grad(theta0).

    ``grad_theta0`` should be analytic; pass None to fall back to
    fourth-order central differences on the periodic grid.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.ndim != lattice.d:
        raise ValueError(f"theta0 must be {lattice.d}-dimensional, got shape {theta0.shape}")
    if grad_theta0 is None:
        grad_theta0 = fd_gradient(theta0, params.dx)
    grad = np.asarray(grad_theta0, dtype=float)
    if grad.shape != (lattice.d,) + theta0.shape:
        raise ValueError(f"grad_theta0 must have shape {(lattice.d,) + theta0.shape}")
    G = initialization_matrix(lattice, params)
    values = equilibrium(theta0, lattice.weights(params.w1, params.w_diag))
    values += np.tensordot(G, grad, axes=(1, 0))
    return PopulationField(np.ascontiguousarray(values))


def collide(f_cell, lattice: LatticeSpec, params: SchemeParams) -> np.ndarray:
    """Moment-space MRT collision of one cell (or a stack of cells along axis 0).

    m = M f, m' = m - S (m - m_eq), f' = M^-1 m', with theta = m_0.
    """
    f = np.asarray(f_cell, dtype=float)
    M = lattice.moment_matrix.astype(float)
    m = np.tensordot(M, f, axes=(1, 0))
    theta = m[0]
    meq = np.tensordot(M, equilibrium(theta, lattice.weights(params.w1, params.w_diag)), axes=(1, 0))
    meq[0] = theta
    s = params.relaxation.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.tensordot(lattice.moment_matrix_inverse, m - s * (m - meq), axes=(1, 0))


def stream(field: PopulationField, lattice: LatticeSpec, backend=None) -> PopulationField:
    """Periodic streaming: population i at x moves to x + e_i."""
    kern = kernels.get_backend(backend)
    src = np.ascontiguousarray(field.values).reshape(lattice.q, -1)
    dst = np.empty_like(src)
    kern.stream(src, dst, field.shape, lattice.velocities)
    return PopulationField(dst.reshape(field.values.shape))


def step(field: PopulationField, lattice: LatticeSpec, params: SchemeParams,
         backend=None, step_index: int = 1) -> PopulationField:
    """One collide-then-stream update."""
    solver = MRTSolver(lattice, params, field.shape, backend=backend, check_every=1)
    solver.load(field, step_index=step_index - 1)
    solver.advance(1)
    return solver.field


def first_moment(values: np.ndarray, velocities: np.ndarray, weights=None, theta=None) -> np.ndarray:
    """sum_k e_k f_ne_k in a fixed population order.

    ``values`` is f_ne (q, ...), or f itself when ``weights`` and ``theta`` are
    given, in which case f_ne_k = f_k - w_k theta is formed one row at a time.
    """
    d = velocities.shape[1]
    acc = np.zeros((d,) + values.shape[1:])
    for k, e in enumerate(velocities):
        if not e.any():
            continue
        row = values[k] if weights is None else values[k] - weights[k] * theta
        for a in range(d):
            if e[a] == 1:
                acc[a] += row
            elif e[a] == -1:
                acc[a] -= row
    return acc


def extract_theta(field: PopulationField) -> np.ndarray:
    return field.values.sum(axis=0)


def _flux(field: PopulationField, lattice: LatticeSpec, params: SchemeParams, theta=None):
    """theta and c * sum_k e_k f_ne_k."""
    if theta is None:
        theta = extract_theta(field)
    w = lattice.weights(params.w1, params.w_diag)
    return theta, params.c * first_moment(field.values, lattice.velocities, w, theta)


def extract_grad_theta(field: PopulationField, lattice: LatticeSpec, params: SchemeParams) -> np.ndarray:
    """grad theta = -s1 / (dt cs^2) * sum_k c_k f_ne_k."""
    _, flux = _flux(field, lattice, params)
    return -params.s1 / (params.dt * params.cs_sq) * flux


def _check_theta(theta):
    small = np.abs(theta) < THETA_FLOOR
    if small.any():
        cell = tuple(int(i) for i in np.unravel_index(np.argmax(small), theta.shape))
        raise SingularDenominatorError(cell, float(theta[cell]))


def extract_velocity(field: PopulationField, lattice: LatticeSpec, params: SchemeParams) -> np.ndarray:
    """u = (2 - s1) sum_k c_k f_ne_k / sum_k f_k."""
    theta = extract_theta(field)
    _check_theta(theta)
    _, flux = _flux(field, lattice, params, theta)
    return (2.0 - params.s1) * flux / theta


def extract_macro(field: PopulationField, lattice: LatticeSpec, params: SchemeParams) -> MacroFields:
    theta = extract_theta(field)
    _check_theta(theta)
    _, flux = _flux(field, lattice, params, theta)
    return MacroFields(
        theta=theta,
        grad_theta=-params.s1 / (params.dt * params.cs_sq) * flux,
        velocity=(2.0 - params.s1) * flux / theta,
    )


class MRTSolver:
    """Double-buffered time stepper.

    A run of n steps is executed as one collision, n - 1 fused
    pull-stream + collide passes, and a closing pull-stream, which is
    bitwise identical to n separate collide/stream steps.
    """

    def __init__(self, lattice: LatticeSpec, params: SchemeParams, shape, backend=None,
                 nthreads: int = 1, check_every: int = 64):
        if len(shape) != lattice.d:
            raise ValueError(f"grid shape {shape} does not match lattice dimension {lattice.d}")
        self.lattice = lattice
        self.params = params
        self.shape = tuple(int(n) for n in shape)
        self.backend = backend or kernels.DEFAULT
        self.kernels = kernels.get_backend(self.backend)
        self.nthreads = int(nthreads)
        self.check_every = int(check_every)
        self.step_index = 0
        q = lattice.q
        self._a = np.zeros((q, math.prod(self.shape)))
        self._b = np.empty_like(self._a)

    @cached_property
    def operator(self) -> CollisionOperator:
        return collision_operator(self.lattice, self.params)

    def load(self, field: PopulationField, step_index: int = 0):
        if field.values.shape != (self.lattice.q,) + self.shape:
            raise ValueError(f"field shape {field.values.shape} does not match solver")
        self._a[...] = field.values.reshape(self.lattice.q, -1)
        self.step_index = step_index

    @property
    def field(self) -> PopulationField:
        return PopulationField(self._a.reshape((self.lattice.q,) + self.shape).copy())

    def view(self) -> PopulationField:
        """Zero-copy view of the current populations (invalidated by advance)."""
        return PopulationField(self._a.reshape((self.lattice.q,) + self.shape))

    def _check(self, buf, force=False):
        if force or (self.check_every > 0 and self.step_index % self.check_every == 0):
            if not np.isfinite(buf).all():
                raise DivergenceError(self.step_index)

    def advance(self, nsteps: int):
        nsteps = int(nsteps)
        if nsteps <= 0:
            return
        k, op, vel, nt = self.kernels, self.operator, self.lattice.velocities, self.nthreads
        k.collide(self._a, op, nt)
        for _ in range(nsteps - 1):
            k.stream_collide(self._a, self._b, self.shape, vel, op, nt)
            self._a, self._b = self._b, self._a
            self.step_index += 1
            self._check(self._a)
        k.stream(self._a, self._b, self.shape, vel, nt)
        self._a, self._b = self._b, self._a
        self.step_index += 1
        self._check(self._a, force=self.check_every > 0)

    def macro(self) -> MacroFields:
        return extract_macro(self.view(), self.lattice, self.params)


def write_snapshot_csv(path, macro: MacroFields):
    """One row per cell: i_1..i_d, theta, u_1..u_d."""
    theta = macro.theta
    d = theta.ndim
    idx = np.indices(theta.shape).reshape(d, -1).T
    th = theta.ravel()
    u = macro.velocity.reshape(d, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"i{k + 1}" for k in range(d)] + ["theta"] + [f"u{k + 1}" for k in range(d)])
        for j in range(th.size):
            w.writerow([*map(int, idx[j]), format(th[j], ".16e"),
                        *(format(u[k, j], ".16e") for k in range(d))])
