"""Independent reference implementations shared by the test modules."""
import itertools

import numpy as np

from burgers_mrt.solver import collide


# Independent oracles, collected differently from the module: R1 and Con1 as
# polynomials in s2, and the d-dimensional groups through W^2, using
# w1^2 + 4(d-1) wd (w1 + (d-1) wd) == (w1 + 2(d-1) wd)^2.

def oracle_R1(s1, s2, w1):
    a = 6 * s1 ** 2 * w1 - s1 ** 2 - 36 * s1 * w1 + 6 * s1 + 24 * w1
    b = -12 * s1 ** 2 * w1 + 6 * s1 ** 2 + 24 * s1 * w1 - 12 * s1
    return s2 * a + b


def oracle_Con1(s1, s2, w1):
    a = 6 * s1 ** 2 * w1 - s1 ** 2 - 18 * s1 * w1 + 3 * s1 + 12 * w1
    b = -6 * s1 ** 2 * w1 + 3 * s1 ** 2 + 12 * s1 * w1 - 6 * s1
    return s2 * a + b


def oracle_Rd2(s1, s21, s22, w1, wd, d):
    W = w1 + 2 * (d - 1) * wd
    head = s1 * s1 * wd * (2 * (s1 - 2) * (2 * s21 + s22) + s21 * s22 * (8 - 3 * s1))
    poly = 8 * (s1 + s21 - s1 * s1 + (s1 - 1) * s1 * s21) + (2 - s21) * s1 ** 3 - 8 * s1 * s21
    return head + s22 * W * W * poly


def oracle_Cond2(s1, s21, s22, w1, wd, d):
    W = w1 + 2 * (d - 1) * wd
    return (-s22 * W * W * (s1 - 2) * (s1 + s21 - s1 * s21)
            - s1 * s1 * wd * (2 * s21 + s22 - 2 * s21 * s22))


def dense_oracle(f, lattice, params):
    """Population-space f - M^-1 S M (f - f_eq) with an independent LAPACK inverse."""
    M = lattice.moment_matrix.astype(float)
    A = np.linalg.inv(M) @ np.diag(params.relaxation) @ M
    w = lattice.weights(params.w1, params.w_diag)
    feq = np.outer(w, f.sum(axis=0))
    return f - A @ (f - feq)


def naive_step(vals, lat, p):
    """Per-cell moment-space collision, then an explicit push loop over cells."""
    q, shape = vals.shape[0], vals.shape[1:]
    post = np.empty_like(vals)
    for cell in itertools.product(*map(range, shape)):
        post[(slice(None),) + cell] = collide(vals[(slice(None),) + cell], lat, p)
    out = np.zeros_like(vals)
    for cell in itertools.product(*map(range, shape)):
        for i in range(q):
            dest = tuple((c + int(e)) % n for c, e, n in zip(cell, lat.velocities[i], shape))
            out[(i,) + dest] = post[(i,) + cell]
    return out
