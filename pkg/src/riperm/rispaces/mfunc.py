"""Increasing bijections M: [0, inf) -> [0, inf) generating Orlicz and Orlicz-Lorentz norms."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import ConvergenceError, ValidationError


class MFunc:
    label = "M"

    def __call__(self, u):
        raise NotImplementedError

    def log_eval(self, logu):
        """log M(e^logu); overridden where M overflows binary64."""
        logu = np.asarray(logu, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.log(self(np.exp(logu)))

    def inverse(self, w):
        """M^{-1}(w) by bisection on log u (vectorised)."""
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        flat_w, flat_o = w.reshape(-1), out.reshape(-1)
        for i, wi in enumerate(flat_w):
            flat_o[i] = self._inverse_scalar(float(wi))
        return out if out.ndim else float(out)

    def _inverse_scalar(self, w: float) -> float:
        if w <= 0:
            return 0.0
        if math.isinf(w):
            return math.inf
        lw = math.log(w)
        lo, hi = -1.0, 1.0
        while float(self.log_eval(lo)) > lw:
            lo *= 2
            if lo < -1e4:
                return 0.0
        while float(self.log_eval(hi)) < lw:
            hi *= 2
            if hi > 1e4:
                raise ConvergenceError(f"{self.label}: cannot bracket inverse of {w}")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.log_eval(mid)) < lw:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, abs(hi)):
                break
        return math.exp(hi)

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class PowerM(MFunc):
    """u^r."""

    def __init__(self, r: float):
        if r <= 0:
            raise ValidationError("power M needs r > 0")
        self.r = float(r)
        self.label = f"power:{r:g}"

    def __call__(self, u):
        return np.asarray(u, dtype=float) ** self.r

    def log_eval(self, logu):
        return self.r * np.asarray(logu, dtype=float)

    def inverse(self, w):
        return np.asarray(w, dtype=float) ** (1.0 / self.r)


class ExpM(MFunc):
    """M_p(u) = exp(|u|^p) - 1."""

    def __init__(self, p: float):
        if p <= 0:
            raise ValidationError("exp_p needs p > 0")
        self.p = float(p)
        self.label = f"exp_p:{p:g}"

    def __call__(self, u):
        with np.errstate(over="ignore"):
            return np.expm1(np.abs(np.asarray(u, dtype=float)) ** self.p)

    def log_eval(self, logu):
        logu = np.asarray(logu, dtype=float)
        with np.errstate(over="ignore"):
            z = np.exp(self.p * logu)
        # log(e^z - 1): log(expm1(z)) for small z, z + log1p(-e^-z) for large z
        small = z < 30
        out = np.empty_like(z)
        with np.errstate(divide="ignore"):
            out[small] = np.log(np.expm1(z[small]))
        out[~small] = z[~small] + np.log1p(-np.exp(-z[~small]))
        return out if out.ndim else float(out)

    def inverse(self, w):
        return np.log1p(np.asarray(w, dtype=float)) ** (1.0 / self.p)


class TabulatedM(MFunc):
    """Piecewise-linear through (u_i, M_i) with (0, 0) implied; linear extrapolation."""

    def __init__(self, us: Sequence[float], ms: Sequence[float], label: str = "tabulated"):
        us = np.asarray(us, dtype=float)
        ms = np.asarray(ms, dtype=float)
        if us[0] != 0.0:
            us = np.concatenate([[0.0], us])
            ms = np.concatenate([[0.0], ms])
        if np.any(np.diff(us) <= 0) or np.any(np.diff(ms) <= 0) or ms[0] != 0:
            raise ValidationError("tabulated M must be strictly increasing with M(0) = 0")
        self.us, self.ms = us, ms
        self.label = label
        self._slope = (ms[-1] - ms[-2]) / (us[-1] - us[-2])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.interp(u, self.us, self.ms)
        return np.where(u > self.us[-1], self.ms[-1] + self._slope * (u - self.us[-1]), inside)

    def inverse(self, w):
        w = np.asarray(w, dtype=float)
        inside = np.interp(w, self.ms, self.us)
        return np.where(w > self.ms[-1], self.us[-1] + (w - self.ms[-1]) / self._slope, inside)


class LorentzM(MFunc):
    """M with M(u) = u on [0, 1) and inverse w -> 1/phi(1/w) on [1, inf).

    Makes L_{M, t^r} coincide with Lambda_r(phi).
    """

    def __init__(self, phi):
        self.phi = phi
        self.label = f"lorentz[{phi.label}]"

    def inverse(self, w):
        w = np.asarray(w, dtype=float)
        out = w.copy()
        big = w >= 1
        wb = w[big]
        with np.errstate(divide="ignore"):
            out[big] = 1.0 / self.phi(np.where(np.isinf(wb), 0.0, 1.0 / wb))
        return out if out.ndim else float(out)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.array(u, copy=True)
        flat_u, flat_o = u.reshape(-1), out.reshape(-1)
        for i, ui in enumerate(flat_u):
            if ui >= 1:
                flat_o[i] = self._forward_scalar(float(ui))
        return out if out.ndim else float(out)

    def _forward_scalar(self, u: float) -> float:
        # inverse(w) is increasing; solve inverse(w) = u for w >= 1
        lo, hi = 1.0, 2.0
        while float(self.inverse(hi)) < u:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.inverse(mid)) < u:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return hi


def staircase_m(a: float, period: int, n_lo: int, n_hi: int, rise: float = 1e-6) -> TabulatedM:
    """Increasing bijection that is almost flat on stretches [a^(period*i), a^(period*(i+1))).

    Within a stretch M grows only by the factor (1 + rise), then jumps by a^period.
    """
    us, ms = [], []
    k = (n_lo // period) * period
    while k <= n_hi + period:
        base = float(a) ** k
        us.append(base)
        ms.append(base)
        us.append(float(a) ** (k + period) * (1 - 1e-9))
        ms.append(base * (1 + rise))
        k += period
    return TabulatedM(us, ms, label=f"staircase:{a:g}:{period}")
