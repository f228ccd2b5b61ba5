"""Closed-form benchmark solutions for the coupled Burgers' equations.

Each case provides theta (the Cole-Hopf potential, which solves the heat
equation), its gradient, and the Burgers velocity u = -2 nu grad(theta)/theta.
Coordinates are passed as a tuple of broadcastable arrays, one per axis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BesselRangeError, SingularDenominatorError

PI = math.pi

BESSEL_MAX_X = 20.0
BESSEL_MAX_ORDER = 60
BESSEL_MAX_TERMS = 300
SERIES_MAX_MODES = 400


class SeriesTruncationWarning(RuntimeWarning):
    pass


def bessel_In(n: int, x: float) -> float:
    """Modified Bessel function of the first kind by its ascending series.

    Validated to 1e-13 relative error for 0 <= x <= 20 and 0 <= n <= 60;
    arguments outside that envelope raise BesselRangeError.
    """
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= BESSEL_MAX_ORDER:
        raise BesselRangeError(f"order n={n!r} outside [0, {BESSEL_MAX_ORDER}]")
    x = float(x)
    if not 0.0 <= x <= BESSEL_MAX_X:
        raise BesselRangeError(f"argument x={x!r} outside [0, {BESSEL_MAX_X}]")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    half = 0.5 * x
    term = 1.0
    for j in range(1, n + 1):
        term *= half / j
    total = term
    quarter = half * half
    for k in range(1, BESSEL_MAX_TERMS):
        term *= quarter / (k * (n + k))
        total += term
        if term < 1e-16 * total:
            break
    return total


def cole_hopf_velocity(theta, grad_theta, nu):
    """u = -2 nu grad(theta) / theta."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta == 0.0):
        cell = tuple(int(i) for i in np.argwhere(theta == 0.0)[0]) if theta.ndim else ()
        raise SingularDenominatorError(cell, 0.0)
    return -2.0 * nu * np.asarray(grad_theta, dtype=float) / theta


# -- Example 1: 1D Burgers with u(x, 0) = sin(pi x), u(0) = u(1) = 0 -----------

def _example1_series(x, t, nu):
    x = np.asarray(x, dtype=float)
    z = 1.0 / (2 * PI * nu)
    a0 = bessel_In(0, z)
    theta = np.full(x.shape, a0)
    dtheta = np.zeros(x.shape)
    flux = np.zeros(x.shape)  # sum_n a_n E_n n sin(n pi x)
    cap = min(SERIES_MAX_MODES, BESSEL_MAX_ORDER)
    for n in range(1, cap + 1):
        amp = bessel_In(n, z) * math.exp(-(n * PI) ** 2 * nu * t)
        theta += 2 * amp * np.cos(n * PI * x)
        s = amp * n * np.sin(n * PI * x)
        flux += s
        floor = 1e-16 * np.min(np.abs(theta), initial=a0)
        if 2 * amp < floor and 2 * PI * n * amp < floor:
            break
    else:
        warnings.warn(f"Example 1 series reached {cap} modes before converging "
                      f"(nu={nu}, t={t})", SeriesTruncationWarning, stacklevel=3)
    dtheta = -2 * PI * flux
    return theta, dtheta, flux


def example1_theta(x, t, nu):
    return _example1_series(x, t, nu)[0]


def example1_grad_theta(x, t, nu):
    return _example1_series(x, t, nu)[1]


def example1_u(x, t, nu):
    theta, _, flux = _example1_series(x, t, nu)
    return 4 * PI * nu * flux / theta


# -- Examples 2-4: single decaying Fourier product mode ------------------------

def _product_mode(coords, t, nu, wavenumbers, base, amplitude):
    """theta = base + amplitude exp(-nu |k|^2 t) prod sin(k_i x_i)."""
    k = np.array(wavenumbers, dtype=float) * PI
    decay = amplitude * math.exp(-nu * float(k @ k) * t)
    sines = [np.sin(ki * np.asarray(xi, dtype=float)) for ki, xi in zip(k, coords)]
    cosines = [np.cos(ki * np.asarray(xi, dtype=float)) for ki, xi in zip(k, coords)]
    prod = np.ones(np.broadcast_shapes(*(s.shape for s in sines)))
    for s in sines:
        prod = prod * s
    theta = base + decay * prod
    grad = []
    for axis, ki in enumerate(k):
        g = decay * ki * cosines[axis]
        for other, s in enumerate(sines):
            if other != axis:
                g = g * s
        grad.append(np.broadcast_to(g, prod.shape))
    return theta, np.stack(grad), decay


def example2_fields(x, y, t, nu):
    theta, grad, _ = _product_mode((x, y), t, nu, (2, 1), 1.0, 0.5)
    return theta, grad, example2_u(x, y, t, nu)


def example2_u(x, y, t, nu):
    """Velocity as printed for the 2D periodic benchmark."""
    E = math.exp(-5 * nu * PI ** 2 * t)
    x, y = np.asarray(x, float), np.asarray(y, float)
    den = 2 + E * np.sin(2 * PI * x) * np.sin(PI * y)
    ux = -2 * nu * 2 * PI * E * np.cos(2 * PI * x) * np.sin(PI * y) / den
    uy = -2 * nu * PI * E * np.sin(2 * PI * x) * np.cos(PI * y) / den
    return np.stack(np.broadcast_arrays(ux, uy))


def example3_fields(x, y, z, t, nu):
    theta, grad, _ = _product_mode((x, y, z), t, nu, (2, 1, 4), 1.0, 0.5)
    return theta, grad, example3_u(x, y, z, t, nu)


def example3_u(x, y, z, t, nu):
    """Velocity as printed for the 3D periodic benchmark."""
    E = math.exp(-21 * nu * PI ** 2 * t)
    sx, sy, sz = (np.sin(k * PI * np.asarray(v, float)) for k, v in ((2, x), (1, y), (4, z)))
    cx, cy, cz = (np.cos(k * PI * np.asarray(v, float)) for k, v in ((2, x), (1, y), (4, z)))
    den = 2 + E * sx * sy * sz
    ux = -2 * nu * 2 * PI * E * cx * sy * sz / den
    uy = -2 * nu * PI * E * sx * cy * sz / den
    uz = -2 * nu * 4 * PI * E * sx * sy * cz / den
    return np.stack(np.broadcast_arrays(ux, uy, uz))


def example4_fields(x1, x2, x3, x4, t, nu):
    # u is derived from theta; the printed 4D velocity has inconsistent denominators
    theta, grad, _ = _product_mode((x1, x2, x3, x4), t, nu, (1, 2, 3, 4), 2.0, 1.0)
    return theta, grad, cole_hopf_velocity(theta, grad, nu)


# -- Case registry ------------------------------------------------------------

@dataclass(frozen=True)
class CaseDefaults:
    epsilon: float
    dx: float
    dt: float
    t_end: float
    levels: tuple[float, ...]
    full_levels: tuple[float, ...]


@dataclass(frozen=True)
class AnalyticCase:
    """One benchmark bound to a viscosity.

    ``domain`` is the physical domain; ``solve_domain`` the periodic box the
    lattice runs on (they differ only for the even-extended Example 1).
    """

    name: str
    d: int
    domain: tuple[tuple[float, float], ...]
    nu: float
    fields_fn: Callable = field(repr=False)
    solve_domain: tuple[tuple[float, float], ...] | None = None
    even_extension: bool = False

    @property
    def periodic_domain(self):
        return self.solve_domain or self.domain

    def fields(self, coords, t):
        """(theta, grad_theta, u) at the given coordinates."""
        return self.fields_fn(coords, t, self.nu)

    def theta(self, coords, t):
        return self.fields(coords, t)[0]

    def grad_theta(self, coords, t):
        return self.fields(coords, t)[1]

    def u(self, coords, t):
        return self.fields(coords, t)[2]


def _ex1(coords, t, nu):
    (x,) = coords
    theta, dtheta, flux = _example1_series(x, t, nu)
    return theta, dtheta[None], (4 * PI * nu * flux / theta)[None]


_FACTORIES = {
    "example1": (1, ((0.0, 1.0),), _ex1, ((0.0, 2.0),), True),
    "example2": (2, ((0.0, 2.0),) * 2, lambda c, t, nu: example2_fields(*c, t, nu), None, False),
    "example3": (3, ((0.0, 2.0),) * 3, lambda c, t, nu: example3_fields(*c, t, nu), None, False),
    "example4": (4, ((-1.0, 1.0),) * 4, lambda c, t, nu: example4_fields(*c, t, nu), None, False),
}

DEFAULTS = {
    "example1": CaseDefaults(2.0, 1 / 40, 1 / 100, 2.0, (1, 2, 4, 8), (1, 2, 4, 8)),
    "example2": CaseDefaults(0.2, 1 / 20, 1 / 50, 2.0, (1, 2, 4, 8), (1, 2, 4, 8)),
    "example3": CaseDefaults(0.05, 1 / 10, 1 / 25, 2.0, (1, 2, 4), (1, 2, 4, 8)),
    "example4": CaseDefaults(0.08, 1 / 10, 1 / 40, 1.0, (1, 1.5, 2), (1, 1.5, 2, 2.5)),
}

_USER_CASES: dict[str, tuple] = {}


def register_case(name, d, domain, fields_fn, defaults: CaseDefaults | None = None,
                  solve_domain=None, even_extension=False):
    """Add a closed-form case: ``fields_fn(coords, t, nu) -> (theta, grad, u)``."""
    if name in _FACTORIES or name in _USER_CASES:
        raise ValueError(f"case {name!r} already registered")
    _USER_CASES[name] = (d, tuple(map(tuple, domain)), fields_fn, solve_domain, even_extension)
    if defaults is not None:
        DEFAULTS[name] = defaults


def case_names():
    return sorted(_FACTORIES) + sorted(_USER_CASES)


def make_case(name: str, nu: float) -> AnalyticCase:
    spec = _FACTORIES.get(name) or _USER_CASES.get(name)
    if spec is None:
        raise KeyError(f"unknown case {name!r}; known: {case_names()}")
    d, domain, fn, solve_domain, even = spec
    return AnalyticCase(name, d, domain, float(nu), fn, solve_domain, even)
