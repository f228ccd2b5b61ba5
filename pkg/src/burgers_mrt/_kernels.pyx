# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled collide / stream kernels.

Work is split into pencils along the last (contiguous) axis. For each
pencil the q source rows are gathered into a per-thread block, relaxed with
the cell loop innermost, and written back. Every cell sees the same
arithmetic in the same order, so results do not depend on the thread count.
"""
from cython.parallel cimport parallel, prange
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

import numpy as np

DEF MAXD = 16


cdef inline void _gather(const double* src, double* buf, Py_ssize_t q, Py_ssize_t n,
                         Py_ssize_t p, Py_ssize_t nd, Py_ssize_t nlast,
                         const Py_ssize_t* shape, const Py_ssize_t* vel,
                         bint shift) noexcept nogil:
    # buf[i, x] = src[i, pencil(p) - e_i outer, x - e_i last], periodic
    cdef Py_ssize_t i, k, c, cc, base, e, x, rem, stride
    cdef const double* row
    cdef double* out
    for i in range(q):
        out = buf + i * nlast
        if not shift:
            memcpy(out, src + i * n + p * nlast, nlast * sizeof(double))
            continue
        # outer axes: rebuild the source pencil index from the shifted coordinates
        base = 0
        rem = p
        stride = 1
        for k in range(nd - 2, -1, -1):
            c = rem % shape[k]
            rem = rem // shape[k]
            cc = c - vel[i * nd + k]
            if cc < 0:
                cc = cc + shape[k]
            elif cc >= shape[k]:
                cc = cc - shape[k]
            base = base + cc * stride
            stride = stride * shape[k]
        row = src + i * n + base * nlast
        e = vel[i * nd + nd - 1]
        if e == 0:
            memcpy(out, row, nlast * sizeof(double))
        elif e == 1:
            out[0] = row[nlast - 1]
            memcpy(out + 1, row, (nlast - 1) * sizeof(double))
        else:
            memcpy(out, row + 1, (nlast - 1) * sizeof(double))
            out[nlast - 1] = row[0]


cdef inline void _relax(const double* buf, double* dst, double* theta, double* neq,
                        Py_ssize_t q, Py_ssize_t n, Py_ssize_t p, Py_ssize_t nlast,
                        const Py_ssize_t* indptr, const Py_ssize_t* indices,
                        const double* data, const double* w) noexcept nogil:
    cdef Py_ssize_t i, k, x
    cdef double wi, b
    cdef const double* nk
    cdef double* out
    for x in range(nlast):
        theta[x] = 0.0
    for i in range(q):
        for x in range(nlast):
            theta[x] = theta[x] + buf[i * nlast + x]
    for i in range(q):
        wi = w[i]
        for x in range(nlast):
            neq[i * nlast + x] = buf[i * nlast + x] - wi * theta[x]
    for i in range(q):
        out = dst + i * n + p * nlast
        wi = w[i]
        for x in range(nlast):
            out[x] = wi * theta[x]
        for k in range(indptr[i], indptr[i + 1]):
            b = data[k]
            nk = neq + indices[k] * nlast
            for x in range(nlast):
                out[x] = out[x] + b * nk[x]


cdef class _Geometry:
    cdef public object shape, vel
    cdef Py_ssize_t nd, nlast, npencil

    def __init__(self, shape, velocities):
        self.shape = np.ascontiguousarray(shape, dtype=np.intp)
        self.vel = np.ascontiguousarray(velocities, dtype=np.intp)
        self.nd = self.shape.shape[0]
        if self.nd > MAXD:
            raise ValueError(f"at most {MAXD} dimensions supported")
        self.nlast = self.shape[self.nd - 1]
        self.npencil = int(np.prod(self.shape[:-1])) if self.nd > 1 else 1


cdef void _run(double[:, ::1] src, double[:, ::1] dst, _Geometry geo, op,
               bint shift, bint relax, int nthreads) except *:
    cdef Py_ssize_t q = src.shape[0], n = src.shape[1]
    if dst.shape[0] != q or dst.shape[1] != n:
        raise ValueError("source and destination shapes differ")
    if geo.npencil * geo.nlast != n or geo.vel.shape[0] != q:
        raise ValueError("grid shape does not match population array")
    cdef const Py_ssize_t[::1] shape_v = geo.shape
    cdef const Py_ssize_t[:, ::1] vel_v = geo.vel
    cdef const Py_ssize_t[::1] indptr_v
    cdef const Py_ssize_t[::1] indices_v
    cdef const double[::1] data_v
    cdef const double[::1] w_v
    cdef const Py_ssize_t* indptr = NULL
    cdef const Py_ssize_t* indices = NULL
    cdef const double* data = NULL
    cdef const double* w = NULL
    if relax:
        indptr_v = op.indptr
        indices_v = op.indices
        data_v = op.data
        w_v = op.w
        indptr = &indptr_v[0]
        indices = &indices_v[0]
        data = &data_v[0]
        w = &w_v[0]
    cdef const double* s = &src[0, 0]
    cdef double* t = &dst[0, 0]
    cdef const Py_ssize_t* shp = &shape_v[0]
    cdef const Py_ssize_t* vel = &vel_v[0, 0]
    cdef Py_ssize_t nd = geo.nd, nlast = geo.nlast, npencil = geo.npencil, p, i
    cdef double* buf
    cdef double* theta
    cdef double* neq
    with nogil, parallel(num_threads=nthreads):
        buf = <double*> malloc((2 * q + 1) * nlast * sizeof(double))
        neq = buf + q * nlast
        theta = neq + q * nlast
        for p in prange(npencil, schedule="static"):
            _gather(s, buf, q, n, p, nd, nlast, shp, vel, shift)
            if relax:
                _relax(buf, t, theta, neq, q, n, p, nlast, indptr, indices, data, w)
            else:
                for i in range(q):
                    memcpy(t + i * n + p * nlast, buf + i * nlast, nlast * sizeof(double))
        free(buf)


def collide(double[:, ::1] f, op, int nthreads=1, shape=None):
    """Relax ``f`` (q, ncells) in place."""
    cdef Py_ssize_t n = f.shape[1]
    # one pencil per block of cells; no streaming so any length works
    block = 256 if n % 256 == 0 else n
    geo = _Geometry((n // block, block), np.zeros((f.shape[0], 2), dtype=np.intp))
    _run(f, f, geo, op, False, True, nthreads)


def stream(double[:, ::1] src, double[:, ::1] dst, shape, velocities, int nthreads=1):
    """Periodic pull streaming: dst[i, x] = src[i, x - e_i]."""
    _run(src, dst, _Geometry(shape, velocities), None, True, False, nthreads)


def stream_collide(double[:, ::1] src, double[:, ::1] dst, shape, velocities, op, int nthreads=1):
    """Pull-stream ``src`` into ``dst`` and relax, in one pass."""
    _run(src, dst, _Geometry(shape, velocities), op, True, True, nthreads)
