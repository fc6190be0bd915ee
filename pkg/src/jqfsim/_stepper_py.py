"""Pure-Python method-of-steps RK4 core for the retarded amplitude equations.

Reference implementation of the compiled extension's contract: identical
stepping, stage placement and interpolation, in plain Python over the shared
:class:`~jqfsim.history.HistoryBuffer`.  Selected automatically when the
compiled core is unavailable (or forced via JQFSIM_FORCE_PY=1).
"""

from __future__ import annotations

import numpy as np

from .history import HistoryBuffer

COMPILED = False


def integrate(a0, taus, bmats, span_starts, span_ns, span_hs):
    """March the envelope system y' = a0 y + sum_k B_k y(t - tau_k).

    Spans are contiguous intervals of uniform step whose boundaries include
    every solution breaking point up to the smoothing generation, so each
    RK4 step integrates a smooth piece.  Stage lookups exactly at t = 0 take
    the right limit for the opening stage of a step and the left limit for
    its closing stage.

    Returns (times, y1, y2, d1_in, d2_in, d1_out, d2_out) node arrays.
    """
    hb = HistoryBuffer(span_starts, span_ns, span_hs)
    query = hb.query

    a00 = complex(a0[0, 0])
    a01 = complex(a0[0, 1])
    a10 = complex(a0[1, 0])
    a11 = complex(a0[1, 1])
    terms = [
        (float(tau), complex(b[0, 0]), complex(b[0, 1]), complex(b[1, 0]),
         complex(b[1, 1]))
        for tau, b in zip(taus, bmats)
    ]

    def rhs(t, y1, y2, side):
        d1 = a00 * y1 + a01 * y2
        d2 = a10 * y1 + a11 * y2
        for tau, b00, b01, b10, b11 in terms:
            c1, c2 = query(t - tau, side)
            d1 += b00 * c1 + b01 * c2
            d2 += b10 * c1 + b11 * c2
        return d1, d2

    y1, y2 = 1.0 + 0.0j, 0.0j
    d1, d2 = rhs(0.0, y1, y2, +1)
    hb.set_node(0, 0.0, y1, y2, d1, d2, d1, d2)
    k1a, k1b = d1, d2

    node = 0
    nspans = len(span_starts)
    for j in range(nspans):
        start = float(span_starts[j])
        n = int(span_ns[j])
        h = float(span_hs[j])
        end = float(span_starts[j + 1]) if j + 1 < nspans else start + n * h
        half = 0.5 * h
        sixth = h / 6.0
        for i in range(n):
            a = hb.times[node]
            tb = end if i == n - 1 else start + (i + 1) * h
            tm = a + half
            k2a, k2b = rhs(tm, y1 + half * k1a, y2 + half * k1b, +1)
            k3a, k3b = rhs(tm, y1 + half * k2a, y2 + half * k2b, +1)
            k4a, k4b = rhs(tb, y1 + h * k3a, y2 + h * k3b, -1)
            y1 = y1 + sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            y2 = y2 + sixth * (k1b + 2.0 * (k2b + k3b) + k4b)
            node += 1
            din1, din2 = rhs(tb, y1, y2, -1)
            if i == n - 1:
                # span boundaries are breaking points: sided derivatives differ
                dout1, dout2 = rhs(tb, y1, y2, +1)
            else:
                dout1, dout2 = din1, din2
            hb.set_node(node, tb, y1, y2, din1, din2, dout1, dout2)
            k1a, k1b = dout1, dout2
    if not (np.isfinite(hb.y1).all() and np.isfinite(hb.y2).all()):
        raise FloatingPointError("delay integration produced non-finite values")
    return (hb.times, hb.y1, hb.y2, hb.d1_in, hb.d2_in, hb.d1_out, hb.d2_out)
