"""Pure NumPy kernels. Same contracts as the compiled ``_kernels`` module.

Populations are stored structure-of-arrays: ``f[i]`` is the d-dimensional
field of population i, flattened to shape (q, ncells) where a kernel needs it.
"""
import numpy as np


def collide(f, op, nthreads=1):
    """Relax ``f`` (q, ncells) in place: f <- w theta + B (f - w theta)."""
    theta = f.sum(axis=0)
    neq = f - op.w[:, None] * theta
    f[...] = op.w[:, None] * theta + op.dense @ neq


def stream(src, dst, shape, velocities, nthreads=1):
    """Periodic pull streaming: dst[i, x] = src[i, x - e_i]."""
    axes = tuple(range(len(shape)))
    s = src.reshape((-1,) + tuple(shape))
    t = dst.reshape((-1,) + tuple(shape))
    for i, e in enumerate(velocities):
        if not e.any():
            t[i] = s[i]
        else:
            t[i] = np.roll(s[i], shift=tuple(int(v) for v in e), axis=axes)


def stream_collide(src, dst, shape, velocities, op, nthreads=1):
    """Pull-stream ``src`` into ``dst`` then relax ``dst`` in place."""
    stream(src, dst, shape, velocities)
    collide(dst, op)
