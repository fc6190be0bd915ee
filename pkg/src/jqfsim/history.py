"""Dense solution history for the delay integrator.

Nodes are laid out in contiguous spans of uniform step; each node stores the
amplitude pair and one-sided derivatives, so queries interpolate with cubic
Hermite polynomials matched to the RK4 order.  Queries for t < 0 return
exactly zero (the pre-excitation history), and exactly at t = 0 the side
argument selects the left (zero) or right (initial-condition) limit of the
value jump.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

_H_ZERO = (0j, 0j)


class HistoryBuffer:
    """Piecewise-uniform node store covering the whole integration so far.

    The retention window is the full horizon, which trivially covers the
    largest delay.  Sample spacing inside span ``j`` is ``span_hs[j]``,
    bounded by the integrator step.
    """

    def __init__(self, span_starts, span_ns, span_hs):
        self.span_starts = [float(x) for x in span_starts]
        self.span_ns = [int(n) for n in span_ns]
        self.span_hs = [float(h) for h in span_hs]
        self.span_offsets = [0]
        for n in self.span_ns:
            self.span_offsets.append(self.span_offsets[-1] + n)
        total = self.span_offsets[-1] + 1
        self.times = np.empty(total)
        self.y1 = np.empty(total, dtype=complex)
        self.y2 = np.empty(total, dtype=complex)
        self.d1_in = np.empty(total, dtype=complex)
        self.d2_in = np.empty(total, dtype=complex)
        self.d1_out = np.empty(total, dtype=complex)
        self.d2_out = np.empty(total, dtype=complex)
        self.filled = 0

    def set_node(self, idx, t, y1, y2, d1_in, d2_in, d1_out, d2_out):
        self.times[idx] = t
        self.y1[idx] = y1
        self.y2[idx] = y2
        self.d1_in[idx] = d1_in
        self.d2_in[idx] = d2_in
        self.d1_out[idx] = d1_out
        self.d2_out[idx] = d2_out
        self.filled = idx + 1

    def query(self, s: float, side: int):
        """Envelope pair at time s; side < 0 takes the left limit at s = 0."""
        if s < 0.0:
            return _H_ZERO
        if s == 0.0:
            if side < 0:
                return _H_ZERO
            return (complex(self.y1[0]), complex(self.y2[0]))
        j = bisect_right(self.span_starts, s) - 1
        if j < 0:
            return _H_ZERO
        h = self.span_hs[j]
        local = (s - self.span_starts[j]) / h
        idx = int(local)
        nmax = self.span_ns[j] - 1
        if idx > nmax:
            idx = nmax
        u = local - idx
        node = self.span_offsets[j] + idx
        y1a = complex(self.y1[node])
        y2a = complex(self.y2[node])
        if u == 0.0:
            return (y1a, y2a)
        y1b = complex(self.y1[node + 1])
        y2b = complex(self.y2[node + 1])
        d1a = complex(self.d1_out[node])
        d2a = complex(self.d2_out[node])
        d1b = complex(self.d1_in[node + 1])
        d2b = complex(self.d2_in[node + 1])
        u2 = u * u
        u3 = u2 * u
        h00 = 2.0 * u3 - 3.0 * u2 + 1.0
        h10 = u3 - 2.0 * u2 + u
        h01 = -2.0 * u3 + 3.0 * u2
        h11 = u3 - u2
        return (
            h00 * y1a + h * (h10 * d1a + h11 * d1b) + h01 * y1b,
            h00 * y2a + h * (h10 * d2a + h11 * d2b) + h01 * y2b,
        )
