"""Fourth-order relaxation rates and weights, and the residual conditions they satisfy.

The residual polynomials are the Delta-x^2 coefficients of the modified
equation (R1, Rd1, Rd2) and the conditions that make the first moment of
the non-equilibrium populations a fourth-order gradient estimate
(Con1, Cond1, Cond2). They are evaluated numerically only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InfeasibleParameterError
from .lattice import build_weights, relaxation_diagonal, sound_speed_sq

RESIDUAL_TOL = 1e-13


@dataclass(frozen=True)
class SchemeParams:
    d: int
    epsilon: float
    nu: float
    dx: float
    dt: float
    c: float
    eta: float
    cs_sq: float
    s0: float
    s1: float
    s21: float
    s22: float | None
    w1: float
    w_diag: float
    w0: float
    xi: float

    @property
    def relaxation(self):
        return relaxation_diagonal(self.d, self.s0, self.s1, self.s21, self.s22)

    @property
    def weights(self):
        return build_weights(self.d, self.w1, self.w_diag)

    def with_rates(self, **rates) -> "SchemeParams":
        """Copy with some relaxation rates replaced (e.g. a detuned s22).

        Derived quantities (nu, cs_sq, xi) are recomputed from the new s1.
        """
        p = replace(self, **rates)
        xi = 1.0 / p.s1 - 0.5
        return replace(p, xi=xi, nu=viscosity_of(replace(p, xi=xi)))


def residual_R1(s1, s2, w1):
    return (6 * (s2 * (s1 - 1) + s1 ** 2 + s2 - 2 * s1) - s2 * s1 ** 2
            + 6 * w1 * (2 * s1 * (2 - s1) + s2 * (4 + s1 ** 2 - 6 * s1)))


def _combined_weight(w1, w_diag, d):
    return w1 + 2 * (d - 1) * w_diag


def residual_Rd1(s1, s21, w1, w_diag, d):
    return residual_R1(s1, s21, _combined_weight(w1, w_diag, d))


def residual_Rd2(s1, s21, s22, w1, w_diag, d):
    W = _combined_weight(w1, w_diag, d)
    first = s1 ** 2 * w_diag * (2 * (s1 - 2) * (2 * s21 + s22) + s21 * s22 * (8 - 3 * s1))
    second = -8 * s1 * s21 * s22 * W ** 2
    third = (s22 * (w1 ** 2 + 4 * (d - 1) * w_diag * (w1 + (d - 1) * w_diag))
             * (8 * (s1 + s21 - s1 ** 2 + (s1 - 1) * s1 * s21) + (2 - s21) * s1 ** 3))
    return first + second + third


def residual_Con1(s1, s2, w1):
    return (3 * s1 * (s2 + s1 - 2) - s1 ** 2 * s2
            + 6 * w1 * (2 - s1) * (s1 + s2 * (1 - s1)))


def residual_Cond1(s1, s21, w1, w_diag, d):
    return residual_Con1(s1, s21, _combined_weight(w1, w_diag, d))


def residual_Cond2(s1, s21, s22, w1, w_diag, d):
    quad = s22 * w1 ** 2 + 4 * s22 * (w1 + (d - 1) * w_diag) * w_diag * (d - 1)
    return (-quad * (s1 - 2) * (s1 + s21 - s1 * s21)
            - s1 ** 2 * w_diag * (2 * s21 + s22 - 2 * s21 * s22))


def residuals(params: SchemeParams) -> dict[str, float]:
    """All conditions applicable to ``params.d``, keyed by name."""
    p = params
    if p.d == 1:
        return {"R1": residual_R1(p.s1, p.s21, p.w1), "Con1": residual_Con1(p.s1, p.s21, p.w1)}
    return {
        "Rd1": residual_Rd1(p.s1, p.s21, p.w1, p.w_diag, p.d),
        "Rd2": residual_Rd2(p.s1, p.s21, p.s22, p.w1, p.w_diag, p.d),
        "Cond1": residual_Cond1(p.s1, p.s21, p.w1, p.w_diag, p.d),
        "Cond2": residual_Cond2(p.s1, p.s21, p.s22, p.w1, p.w_diag, p.d),
    }


def viscosity_of(params: SchemeParams) -> float:
    p = params
    xi = 1.0 / p.s1 - 0.5
    if p.d == 1:
        return 2 * p.w1 * xi * p.dx ** 2 / p.dt
    return xi * p.cs_sq * p.dt


def max_feasible_epsilon(d: int) -> float:
    """Largest epsilon with a nonnegative axis weight (inf for d = 1)."""
    return math.inf if d == 1 else 1.0 / (2 * (d - 1))


def solve_fourth_order(epsilon: float, d: int, dx: float, dt: float, s0: float = 1.0) -> SchemeParams:
    """Closed-form fourth-order parameter set for epsilon = nu dt / dx^2.

    Raises InfeasibleParameterError when a rate leaves (0, 2) or an axis or
    diagonal weight is negative. The rest weight w0 is not constrained: for
    d = 4 it is negative whenever epsilon < 1/12.
    """
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InfeasibleParameterError(f"epsilon must be positive and finite, got {epsilon!r}")
    if not (dx > 0 and dt > 0):
        raise InfeasibleParameterError(f"dx and dt must be positive, got dx={dx!r}, dt={dt!r}")
    if d < 1:
        raise InfeasibleParameterError(f"dimension must be >= 1, got {d!r}")
    den = 6 * epsilon + 1
    s1 = 2 / den
    s21 = 24 * epsilon / den ** 2
    if d == 1:
        s22 = None
        w1 = 1.0 / 6.0
        w_diag = 0.0
    else:
        s22 = 4 / (6 * epsilon + 3)
        # written as (1 - 2(d-1)eps)/6 so the boundary epsilon gives w1 == 0 exactly
        w1 = (1 - 2 * (d - 1) * epsilon) / 6
        w_diag = epsilon / 6
        if w1 < 0:
            raise InfeasibleParameterError(
                f"w1 = {w1:.6g} < 0: epsilon = {epsilon} exceeds 1/(2(d-1)) = "
                f"{max_feasible_epsilon(d):.6g} for d = {d}")
    for name, s in (("s1", s1), ("s21", s21), ("s22", s22)):
        if s is not None and not 0 < s < 2:
            raise InfeasibleParameterError(f"{name} = {s:.6g} outside (0, 2)")
    c = dx / dt
    w0 = float(build_weights(d, w1, w_diag)[0])
    params = SchemeParams(
        d=d, epsilon=epsilon, nu=epsilon * dx ** 2 / dt, dx=dx, dt=dt, c=c,
        eta=dt / dx ** 2, cs_sq=sound_speed_sq(d, w1, w_diag, c),
        s0=s0, s1=s1, s21=s21, s22=s22, w1=w1, w_diag=w_diag, w0=w0, xi=1 / s1 - 0.5,
    )
    bad = {k: v for k, v in residuals(params).items() if not abs(v) < RESIDUAL_TOL}
    if bad:
        raise AssertionError(f"closed-form parameters leave nonzero residuals: {bad}")
    return params
