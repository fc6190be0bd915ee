# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled method-of-steps RK4 core for the retarded amplitude equations.

Twin of ``_stepper_py.integrate``: identical stepping, stage placement and
cubic Hermite history interpolation, with typed buffers for the hot loop.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True

ctypedef double complex dcomplex


cdef struct Pair:
    dcomplex c1
    dcomplex c2


cdef class _Hist:
    cdef double[::1] span_starts
    cdef long[::1] span_ns
    cdef double[::1] span_hs
    cdef long[::1] span_offsets
    cdef double[::1] times
    cdef dcomplex[::1] y1, y2, d1_in, d2_in, d1_out, d2_out
    cdef int nspans

    def __init__(self, span_starts, span_ns, span_hs):
        cdef long total, k
        self.span_starts = np.ascontiguousarray(span_starts, dtype=np.float64)
        self.span_ns = np.ascontiguousarray(span_ns, dtype=np.int64)
        self.span_hs = np.ascontiguousarray(span_hs, dtype=np.float64)
        self.nspans = self.span_starts.shape[0]
        offsets = np.zeros(self.nspans + 1, dtype=np.int64)
        for k in range(self.nspans):
            offsets[k + 1] = offsets[k] + self.span_ns[k]
        self.span_offsets = offsets
        total = offsets[self.nspans] + 1
        self.times = np.empty(total)
        self.y1 = np.empty(total, dtype=np.complex128)
        self.y2 = np.empty(total, dtype=np.complex128)
        self.d1_in = np.empty(total, dtype=np.complex128)
        self.d2_in = np.empty(total, dtype=np.complex128)
        self.d1_out = np.empty(total, dtype=np.complex128)
        self.d2_out = np.empty(total, dtype=np.complex128)

    cdef Pair query(self, double s, int side) noexcept:
        cdef Pair out
        cdef int lo, hi, mid, j
        cdef long idx, node, nmax
        cdef double h, local, u, u2, u3, h00, h10, h01, h11
        if s < 0.0:
            out.c1 = 0.0
            out.c2 = 0.0
            return out
        if s == 0.0:
            if side < 0:
                out.c1 = 0.0
                out.c2 = 0.0
            else:
                out.c1 = self.y1[0]
                out.c2 = self.y2[0]
            return out
        # rightmost span with span_starts[j] <= s
        lo = 0
        hi = self.nspans
        while lo < hi:
            mid = (lo + hi) // 2
            if self.span_starts[mid] <= s:
                lo = mid + 1
            else:
                hi = mid
        j = lo - 1
        if j < 0:
            out.c1 = 0.0
            out.c2 = 0.0
            return out
        h = self.span_hs[j]
        local = (s - self.span_starts[j]) / h
        idx = <long> local
        nmax = self.span_ns[j] - 1
        if idx > nmax:
            idx = nmax
        u = local - idx
        node = self.span_offsets[j] + idx
        if u == 0.0:
            out.c1 = self.y1[node]
            out.c2 = self.y2[node]
            return out
        u2 = u * u
        u3 = u2 * u
        h00 = 2.0 * u3 - 3.0 * u2 + 1.0
        h10 = u3 - 2.0 * u2 + u
        h01 = -2.0 * u3 + 3.0 * u2
        h11 = u3 - u2
        out.c1 = (h00 * self.y1[node] + h * (h10 * self.d1_out[node]
                  + h11 * self.d1_in[node + 1]) + h01 * self.y1[node + 1])
        out.c2 = (h00 * self.y2[node] + h * (h10 * self.d2_out[node]
                  + h11 * self.d2_in[node + 1]) + h01 * self.y2[node + 1])
        return out


def integrate(a0, taus, bmats, span_starts, span_ns, span_hs):
    """March the envelope system; see the pure-Python twin for the contract.

    Returns (times, y1, y2, d1_in, d2_in, d1_out, d2_out) arrays.
    """
    cdef _Hist hb = _Hist(span_starts, span_ns, span_hs)
    cdef dcomplex a00 = a0[0, 0]
    cdef dcomplex a01 = a0[0, 1]
    cdef dcomplex a10 = a0[1, 0]
    cdef dcomplex a11 = a0[1, 1]
    cdef double[::1] tau_v = np.ascontiguousarray(taus, dtype=np.float64)
    cdef dcomplex[:, :, ::1] b_v = np.ascontiguousarray(bmats, dtype=np.complex128)
    cdef int nterms = tau_v.shape[0]
    cdef int nspans = hb.nspans

    cdef dcomplex y1 = 1.0, y2 = 0.0
    cdef dcomplex d1, d2, k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b
    cdef dcomplex din1, din2, dout1, dout2
    cdef double start, h, end, half, sixth, a, tb, tm
    cdef long node = 0, n, i
    cdef int j, k
    cdef Pair q

    # rhs inlined via a closure-free helper pattern
    d1 = a00 * y1 + a01 * y2
    d2 = a10 * y1 + a11 * y2
    for k in range(nterms):
        q = hb.query(0.0 - tau_v[k], 1)
        d1 = d1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
        d2 = d2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
    hb.times[0] = 0.0
    hb.y1[0] = y1
    hb.y2[0] = y2
    hb.d1_in[0] = d1
    hb.d2_in[0] = d2
    hb.d1_out[0] = d1
    hb.d2_out[0] = d2
    k1a = d1
    k1b = d2

    cdef dcomplex t1, t2, w1, w2
    for j in range(nspans):
        start = hb.span_starts[j]
        n = hb.span_ns[j]
        h = hb.span_hs[j]
        end = hb.span_starts[j + 1] if j + 1 < nspans else start + n * h
        half = 0.5 * h
        sixth = h / 6.0
        for i in range(n):
            a = hb.times[node]
            tb = end if i == n - 1 else start + (i + 1) * h
            tm = a + half
            # k2
            w1 = y1 + half * k1a
            w2 = y2 + half * k1b
            t1 = a00 * w1 + a01 * w2
            t2 = a10 * w1 + a11 * w2
            for k in range(nterms):
                q = hb.query(tm - tau_v[k], 1)
                t1 = t1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
                t2 = t2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
            k2a = t1
            k2b = t2
            # k3
            w1 = y1 + half * k2a
            w2 = y2 + half * k2b
            t1 = a00 * w1 + a01 * w2
            t2 = a10 * w1 + a11 * w2
            for k in range(nterms):
                q = hb.query(tm - tau_v[k], 1)
                t1 = t1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
                t2 = t2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
            k3a = t1
            k3b = t2
            # k4 (left limit at the step end)
            w1 = y1 + h * k3a
            w2 = y2 + h * k3b
            t1 = a00 * w1 + a01 * w2
            t2 = a10 * w1 + a11 * w2
            for k in range(nterms):
                q = hb.query(tb - tau_v[k], -1)
                t1 = t1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
                t2 = t2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
            k4a = t1
            k4b = t2
            y1 = y1 + sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            y2 = y2 + sixth * (k1b + 2.0 * (k2b + k3b) + k4b)
            node += 1
            # accepted-state derivatives for Hermite interpolation
            din1 = a00 * y1 + a01 * y2
            din2 = a10 * y1 + a11 * y2
            for k in range(nterms):
                q = hb.query(tb - tau_v[k], -1)
                din1 = din1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
                din2 = din2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
            if i == n - 1:
                dout1 = a00 * y1 + a01 * y2
                dout2 = a10 * y1 + a11 * y2
                for k in range(nterms):
                    q = hb.query(tb - tau_v[k], 1)
                    dout1 = dout1 + b_v[k, 0, 0] * q.c1 + b_v[k, 0, 1] * q.c2
                    dout2 = dout2 + b_v[k, 1, 0] * q.c1 + b_v[k, 1, 1] * q.c2
            else:
                dout1 = din1
                dout2 = din2
            hb.times[node] = tb
            hb.y1[node] = y1
            hb.y2[node] = y2
            hb.d1_in[node] = din1
            hb.d2_in[node] = din2
            hb.d1_out[node] = dout1
            hb.d2_out[node] = dout2
            k1a = dout1
            k1b = dout2

    times = np.asarray(hb.times)
    out_y1 = np.asarray(hb.y1)
    out_y2 = np.asarray(hb.y2)
    if not (np.isfinite(out_y1).all() and np.isfinite(out_y2).all()):
        raise FloatingPointError("delay integration produced non-finite values")
    return (times, out_y1, out_y2, np.asarray(hb.d1_in), np.asarray(hb.d2_in),
            np.asarray(hb.d1_out), np.asarray(hb.d2_out))
