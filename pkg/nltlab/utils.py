from __future__ import annotations
from typing import Optional

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def periodic_distance(x: np.ndarray, center: float, period: float) -> np.ndarray:
    """Signed distance from `center` folded into [-period/2, period/2)."""
    return np.mod(x - center + 0.5 * period, period) - 0.5 * period


def bump(r: np.ndarray) -> np.ndarray:
    """Compactly supported C-infinity profile exp(1 - 1/(1 - r^2)),
    equal to 1 at r=0 and vanishing for |r| >= 1."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)

    def _psi(s):
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    a = _psi(t)
    b = _psi(1.0 - t)
    return a / (a + b)


class RunningIntegral:
    """
    Streaming time integral of a sampled scalar.

    On each new interval the quadratic through the last three samples is
    integrated over that interval only. This local quadratic rule is third
    order on non-uniform steps, one order below composite Simpson. The first
    interval is integrated with the trapezoid rule until a third sample
    arrives, at which point it is corrected.
    """

    def __init__(self):
        self.value = 0.0
        self._t: list = []
        self._f: list = []
        self._first_trapezoid: Optional[float] = None

    def add(self, t: float, f: float) -> float:
        if self._t and t <= self._t[-1]:
            return self.value

        self._t.append(float(t))
        self._f.append(float(f))
        self._t = self._t[-3:]
        self._f = self._f[-3:]

        if len(self._t) == 2:
            h = self._t[1] - self._t[0]
            self._first_trapezoid = 0.5 * h * (self._f[0] + self._f[1])
            self.value += self._first_trapezoid
        elif len(self._t) == 3:
            t0, t1, t2 = self._t
            f0, f1, f2 = self._f
            h1 = t1 - t0
            h2 = t2 - t1
            d0 = (f1 - f0) / h1
            d2 = (f2 - f1) / h2
            c = (d2 - d0) / (h1 + h2)
            b = d0 + c * h1
            self.value += f1 * h2 + b * h2**2 / 2.0 + c * h2**3 / 3.0
            if self._first_trapezoid is not None:
                # Replace the trapezoid on [t0, t1] by the same quadratic
                first = self._quadratic_first(t0, t1, t2, f0, f1, f2)
                self.value += first - self._first_trapezoid
                self._first_trapezoid = None
        return self.value

    @staticmethod
    def _quadratic_first(t0, t1, t2, f0, f1, f2) -> float:
        """Integral over [t0, t1] of the quadratic through three samples."""
        h1 = t1 - t0
        h2 = t2 - t1
        d0 = (f1 - f0) / h1
        d2 = (f2 - f1) / h2
        c = (d2 - d0) / (h1 + h2)
        # p(t) = f0 + d0 (t - t0) + c (t - t0)(t - t1)
        return f0 * h1 + d0 * h1**2 / 2.0 - c * h1**3 / 6.0
